//! Named experiments. Each writes its artifacts and a manifest under the
//! output directory and prints the paths it wrote.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use egyfrac::filters::{mertens_drift, passes_smoothness, sieve_density};
use egyfrac::fourier::{arc_classify, fourier_count};
use egyfrac::pomerance::{pomerance_set, sweep_c, verify_solution_free, DEFAULT_VERIFY_BUDGET};
use egyfrac::solver::{count_integral, count_subsets, find_subset, lambda_exact, SolverConfig};
use egyfrac::{lambda_lower_curve, lcm_set, prune_to_window, recip_sum, Error, IntSet, Rational};
use serde::Serialize;
use serde_json::json;

use crate::output::{csv_string, manifest_path, to_json, write_file, RunManifest};
use crate::{parse_int, parse_rational, parse_real, table_for, Failure};

pub const NAMES: [&str; 5] = ["mertens", "sieve", "pomerance", "lambda", "prune-demo"];

#[derive(Args)]
pub struct ExperimentArgs {
    /// One of: mertens, sieve, pomerance, lambda, prune-demo.
    name: String,
    /// Output directory (default: $EGYFRAC_OUT_DIR, else ./egyfrac-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// mertens: evaluation points (comma separated).
    #[arg(long = "X", value_delimiter = ',')]
    x: Vec<String>,
    /// mertens: point where the constant is fitted.
    #[arg(long)]
    fit: Option<String>,
    /// sieve: range start; pomerance: set bounds (comma separated).
    #[arg(long = "N", value_delimiter = ',')]
    n: Vec<String>,
    /// pomerance: constants (comma separated).
    #[arg(long = "C", value_delimiter = ',')]
    c: Vec<String>,
    #[arg(long)]
    y: Option<String>,
    #[arg(long)]
    z: Option<String>,
    /// lambda: largest N.
    #[arg(long)]
    max: Option<String>,
    /// pomerance: node budget for each verification.
    #[arg(long)]
    budget: Option<String>,
    /// prune-demo: elements are the divisors of this number.
    #[arg(long)]
    base: Option<String>,
    /// prune-demo: lower bound on elements.
    #[arg(long = "M")]
    m: Option<String>,
    /// prune-demo: per-prime-power floor.
    #[arg(long)]
    theta: Option<String>,
    /// prune-demo: number of window steps.
    #[arg(long)]
    steps: Option<String>,
}

fn out_dir(a: &ExperimentArgs) -> PathBuf {
    a.out
        .clone()
        .or_else(|| std::env::var_os("EGYFRAC_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("egyfrac-out"))
}

struct Artifact {
    file: String,
    body: String,
}

pub fn run(a: ExperimentArgs) -> Result<u8, Failure> {
    let (artifacts, params) = match a.name.as_str() {
        "mertens" => mertens(&a)?,
        "sieve" => sieve(&a)?,
        "pomerance" => pomerance(&a)?,
        "lambda" => lambda(&a)?,
        "prune-demo" => prune_demo(&a)?,
        other => {
            return Err(Failure::Usage(format!("unknown experiment {other:?}; expected one of {}", NAMES.join(", "))))
        }
    };
    let dir = out_dir(&a);
    for art in artifacts {
        let path = dir.join(&art.file);
        write_file(&path, art.body.as_bytes())?;
        let m = RunManifest::new(&format!("experiment {}", a.name), params.clone(), &[], &path);
        write_file(&manifest_path(&path), to_json(&m).as_bytes())?;
        println!("{}", path.display());
    }
    Ok(0)
}

type Output = (Vec<Artifact>, BTreeMap<String, String>);

fn ints(name: &str, raw: &[String], default: &[u64]) -> Result<Vec<u64>, Failure> {
    if raw.is_empty() {
        return Ok(default.to_vec());
    }
    raw.iter().map(|s| parse_int(name, s)).collect()
}

fn int_or(name: &str, raw: &Option<String>, default: u64) -> Result<u64, Failure> {
    raw.as_deref().map_or(Ok(default), |s| parse_int(name, s))
}

fn real_or(name: &str, raw: &Option<String>, default: f64) -> Result<f64, Failure> {
    raw.as_deref().map_or(Ok(default), |s| parse_real(name, s))
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Serialize)]
struct MertensRow {
    x: u64,
    q_sum: f64,
    log_log_x: f64,
    c_hat: f64,
    drift: f64,
    tolerance: f64,
    within: bool,
}

fn mertens(a: &ExperimentArgs) -> Result<Output, Failure> {
    let xs = ints("X", &a.x, &[1_000, 10_000, 100_000])?;
    let fit = int_or("fit", &a.fit, 1_000_000)?;
    let t = table_for(xs.iter().copied().max().unwrap_or(2).max(fit))?;
    let (c_hat, rows) = mertens_drift(&xs, fit, &t)?;
    let rows: Vec<MertensRow> = rows
        .into_iter()
        .map(|r| MertensRow {
            x: r.x,
            q_sum: r.q_sum,
            log_log_x: r.log_log_x,
            c_hat,
            drift: r.drift,
            tolerance: r.tolerance,
            within: r.within,
        })
        .collect();
    let params = [("X".to_string(), join(&xs)), ("fit".to_string(), fit.to_string())].into();
    Ok((vec![Artifact { file: "mertens.csv".into(), body: csv_string(&rows)? }], params))
}

fn sieve(a: &ExperimentArgs) -> Result<Output, Failure> {
    let n = ints("N", &a.n, &[1_000_000])?;
    let [n] = n[..] else {
        return Err(Failure::Usage("sieve takes a single --N".into()));
    };
    let y = real_or("y", &a.y, 3.0)?;
    let z = real_or("z", &a.z, 100.0)?;
    let t = table_for(2 * n)?;
    let report = sieve_density(n, y, z, &t)?;
    let mut v = serde_json::to_value(&report).expect("serializable");
    let obj = v.as_object_mut().expect("object");
    obj.insert("N".into(), json!(n));
    obj.insert("y".into(), json!(y));
    obj.insert("z".into(), json!(z));
    let params = [("N".to_string(), n.to_string()), ("y".to_string(), y.to_string()), ("z".to_string(), z.to_string())].into();
    Ok((vec![Artifact { file: "sieve.json".into(), body: to_json(&v) }], params))
}

#[derive(Serialize)]
struct PomeranceRow {
    #[serde(rename = "N")]
    n: u64,
    #[serde(rename = "C")]
    c: f64,
    size: usize,
    recip: f64,
    recip_exact: String,
    verified: String,
}

#[derive(Serialize)]
struct SweepCsvRow {
    #[serde(rename = "C")]
    c: f64,
    verified_up_to: u64,
    first_solution_at: Option<u64>,
    witness: String,
}

fn pomerance(a: &ExperimentArgs) -> Result<Output, Failure> {
    let ns = ints("N", &a.n, &[200])?;
    let cs: Vec<f64> = if a.c.is_empty() {
        vec![1.0]
    } else {
        a.c.iter().map(|s| parse_real("C", s)).collect::<Result<_, _>>()?
    };
    let budget = int_or("budget", &a.budget, DEFAULT_VERIFY_BUDGET)?;
    let n_max = ns.iter().copied().max().unwrap_or(2);
    let t = table_for(n_max)?;
    let mut rows = Vec::new();
    for &c in &cs {
        for &n in &ns {
            let rep = pomerance_set(n, c, &t)?;
            let verified = match verify_solution_free(&rep.set, budget) {
                Ok(b) => b.to_string(),
                Err(Error::Inconclusive { .. }) => "inconclusive".into(),
                Err(e) => return Err(e.into()),
            };
            rows.push(PomeranceRow {
                n,
                c,
                size: rep.set.len(),
                recip: rep.recip.to_f64(),
                recip_exact: rep.recip.to_string(),
                verified,
            });
        }
    }
    let sweep: Vec<SweepCsvRow> = sweep_c(&cs, n_max, budget, &t)?
        .into_iter()
        .map(|r| SweepCsvRow {
            c: r.c,
            verified_up_to: r.verified_up_to,
            first_solution_at: r.first_solution_at,
            witness: r.witness.map(|w| join(w.as_slice())).unwrap_or_default(),
        })
        .collect();
    let params = [
        ("N".to_string(), join(&ns)),
        ("C".to_string(), cs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")),
        ("budget".to_string(), budget.to_string()),
    ]
    .into();
    Ok((
        vec![
            Artifact { file: "pomerance.csv".into(), body: csv_string(&rows)? },
            Artifact { file: "pomerance_sweep.csv".into(), body: csv_string(&sweep)? },
        ],
        params,
    ))
}

#[derive(Serialize)]
struct LambdaRow {
    #[serde(rename = "N")]
    n: u64,
    lambda: String,
    lambda_f64: f64,
    witness: String,
    lower_bound: String,
    lower_bound_f64: f64,
}

fn lambda(a: &ExperimentArgs) -> Result<Output, Failure> {
    let max = int_or("max", &a.max, 10)?;
    if max < 2 {
        return Err(Failure::Usage("--max must be at least 2".into()));
    }
    let t = table_for(max)?;
    let ns: Vec<u64> = (2..=max).collect();
    let lower = lambda_lower_curve(&ns, 1.0, &t)?;
    let mut rows = Vec::new();
    for (n, lo) in lower {
        let (v, w) = lambda_exact(n)?;
        rows.push(LambdaRow {
            n,
            lambda_f64: v.to_f64(),
            lambda: v.to_string(),
            witness: join(w.as_slice()),
            lower_bound_f64: lo.to_f64(),
            lower_bound: lo.to_string(),
        });
    }
    let params = [("max".to_string(), max.to_string())].into();
    Ok((vec![Artifact { file: "lambda.csv".into(), body: csv_string(&rows)? }], params))
}

/// Divisors of `base` that are at least `m` and, when `theta > 0`, whose
/// exact prime powers are at most `m * theta`; then nested windows
/// `[2/d - 1/M, 2/d)` for consecutive `d`, with exponential-sum diagnostics
/// at each step.
fn prune_demo(a: &ExperimentArgs) -> Result<Output, Failure> {
    let base = int_or("base", &a.base, 5040)?;
    let m = int_or("M", &a.m, 20)?;
    let theta = parse_rational("theta", a.theta.as_deref().unwrap_or("0"))?;
    let steps = int_or("steps", &a.steps, 4)?;
    if base < 2 || m < 2 {
        return Err(Failure::Usage("--base and --M must be at least 2".into()));
    }
    let t = table_for(base)?;
    let smooth = (&theta * &Rational::from(m)).to_f64();
    let mut start = Vec::new();
    for n in m..=base {
        if base % n == 0 && (theta.is_zero() || passes_smoothness(n, smooth, &t)?) {
            start.push(n);
        }
    }
    let start = IntSet::new(start)?;
    let r0 = recip_sum(&start);
    let mut report = json!({
        "base": base,
        "M": m,
        "theta": theta.to_string(),
        "start": start,
        "R_start": r0.to_string(),
    });
    let mut rows = Vec::new();
    if !r0.is_zero() {
        // smallest d with 2/d <= R(A)
        let two = Rational::from(2u64);
        let mut d = (&two / &r0).to_f64().ceil().max(1.0) as u64;
        while Rational::new(2, d as i64)? > r0 {
            d += 1;
        }
        let mut cur = start.clone();
        for _ in 0..steps {
            let alpha = Rational::new(2, d as i64)?;
            let trace = match prune_to_window(&cur, &alpha, &theta, m, &t) {
                Ok(tr) => tr,
                Err(e) => {
                    rows.push(json!({ "d": d, "alpha": alpha.to_string(), "error": e.to_string() }));
                    break;
                }
            };
            let b = trace.final_set.clone();
            rows.push(window_step(&b, d, m, &trace)?);
            cur = b;
            d += 1;
        }
    }
    report.as_object_mut().expect("object").insert("steps".into(), json!(rows));
    let params = [
        ("base".to_string(), base.to_string()),
        ("M".to_string(), m.to_string()),
        ("theta".to_string(), theta.to_string()),
        ("steps".to_string(), steps.to_string()),
    ]
    .into();
    Ok((vec![Artifact { file: "prune_demo.json".into(), body: to_json(&report) }], params))
}

fn window_step(b: &IntSet, d: u64, m: u64, trace: &egyfrac::PruneTrace) -> Result<serde_json::Value, Failure> {
    let l = lcm_set(b);
    let target = Rational::recip_of(d);
    let f = fourier_count(b, d)?;
    let exact = count_integral(b, d)?;
    let solutions = count_subsets(b, &target)?;
    let arcs = arc_classify(b, d, m as f64 / 2.0)?;
    let witness = find_subset(b, &target, &SolverConfig::default())?.witness;
    Ok(json!({
        "d": d,
        "alpha": Rational::new(2, d as i64)?.to_string(),
        "size": b.len(),
        "R": trace.r_final.to_string(),
        "window_removals": trace.window_removals,
        "removed_qs": trace.removed_qs,
        "lcm": l.to_string(),
        "d_divides_lcm": (&l % d) == 0u32.into(),
        "F": f.rounded.to_string(),
        "F_exact": exact.to_string(),
        "solutions": solutions.to_string(),
        "identity_holds": solutions + 1 == exact,
        "major_count": arcs.major_hs.len(),
        "minor_count": arcs.minor_hs.len(),
        "major_contribution": arcs.major_contribution,
        "minor_weight_sum": arcs.minor_weight_sum,
        "minor_within_quarter": arcs.minor_within_quarter,
        "witness": witness,
    }))
}
