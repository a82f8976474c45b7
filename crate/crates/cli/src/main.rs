//! `egyfrac`: batch commands over sets of positive integers.
//!
//! Exit codes: 0 success (or a solution found), 1 search exhausted without a
//! solution, 2 search budget exhausted, 3 resource limit or numerical
//! instability, 64 usage or parse error, 65 input outside an operation's
//! domain, 66 unreadable input, 70 internal error.

mod experiments;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use egyfrac::decomposition::Decomposition;
use egyfrac::fourier::arc_classify_with_bound;
use egyfrac::solver::{count_integral, find_subset, SolverConfig, SolverStatus, Strategy};
use egyfrac::{prune_ppower, prune_to_window, recip_sum, Error, FactorTable, IntSet, Rational};
use serde_json::json;

use output::{emit, to_json, RunManifest};

#[derive(Parser)]
#[command(name = "egyfrac", version, about = "Exact unit-fraction experiments")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a subset whose reciprocal sum equals the target.
    Solve(SolveArgs),
    /// Count subsets with k R(S) integral by the exponential sum, with arc diagnostics.
    Fourier(FourierArgs),
    /// Split a set by exact prime-power divisors.
    Decompose(DecomposeArgs),
    /// Prune a set by prime-power mass, optionally into a window.
    Prune(PruneArgs),
    /// Run a named experiment and write its artifacts.
    Experiment(experiments::ExperimentArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Set file: one integer per line, or a JSON array.
    file: PathBuf,
    /// Target reciprocal sum, e.g. 1/1 or 1/3.
    #[arg(long)]
    target: String,
    /// dfs_bnb, meet_middle, residue_dp or auto.
    #[arg(long, default_value = "auto")]
    strategy: String,
    #[arg(long, default_value_t = 50_000_000)]
    budget: u64,
    /// Allow parallel search; the witness may then differ between runs.
    #[arg(long)]
    nondeterministic: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FourierArgs {
    file: PathBuf,
    #[arg(long, default_value = "1")]
    k: String,
    /// Arc width K; defaults to min(A)/2.
    #[arg(long = "K")]
    big_k: Option<String>,
    #[arg(long, default_value_t = egyfrac::fourier::DEFAULT_LCM_BOUND)]
    lcm_bound: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PruneArgs {
    file: PathBuf,
    /// Per-prime-power floor.
    #[arg(long, default_value = "0")]
    theta: String,
    /// Upper end of the target window; enables window trimming.
    #[arg(long, requires = "m")]
    alpha: Option<String>,
    /// Lower bound on elements; the window is [alpha - 1/M, alpha).
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Lib(Error),
    Internal(String),
}

impl Failure {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Input(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Input(_) => 66,
            Failure::Internal(_) => 70,
            Failure::Lib(e) => match e {
                Error::Parse(_) => 64,
                Error::Resource(_) | Error::NumericalInstability { .. } => 3,
                Error::Inconclusive { .. } => 2,
                Error::Domain(_) | Error::Range { .. } | Error::Infeasible(_) => 65,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Internal(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

pub fn parse_rational(name: &str, s: &str) -> Result<Rational, Failure> {
    s.parse().map_err(|e: Error| Failure::Usage(format!("--{name}: {e}")))
}

/// Integer parameter, also accepting `p/q` forms with integral value.
pub fn parse_int(name: &str, s: &str) -> Result<u64, Failure> {
    let r = parse_rational(name, s)?;
    if !r.is_integer() || r.is_negative() {
        return Err(Failure::Usage(format!("--{name}: expected a nonnegative integer, got {s}")));
    }
    r.numer().to_string().parse().map_err(|_| Failure::Usage(format!("--{name}: {s} is too large")))
}

/// Real parameter given as a decimal, an integer or `p/q`.
pub fn parse_real(name: &str, s: &str) -> Result<f64, Failure> {
    if let Ok(r) = s.parse::<Rational>() {
        return Ok(r.to_f64());
    }
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Failure::Usage(format!("--{name}: not a number: {s}")))
}

pub fn read_set(path: &Path) -> Result<(IntSet, Vec<u8>), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::Usage(format!("{}: not UTF-8 text", path.display())))?;
    let set = IntSet::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((set, bytes))
}

pub fn table_for(max: u64) -> Result<FactorTable, Failure> {
    Ok(FactorTable::build(max.max(2))?)
}

fn params<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn cmd_solve(a: SolveArgs) -> Result<u8, Failure> {
    let (set, bytes) = read_set(&a.file)?;
    let target = parse_rational("target", &a.target)?;
    let strategy: Strategy = a.strategy.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let cfg = SolverConfig::new(strategy, a.budget, !a.nondeterministic)?;
    let r = find_subset(&set, &target, &cfg)?;
    let body = to_json(&r);
    emit(&body, a.out.as_deref(), |p| {
        RunManifest::new(
            "solve",
            params([
                ("target", target.to_string()),
                ("strategy", a.strategy.clone()),
                ("budget", a.budget.to_string()),
                ("deterministic", (!a.nondeterministic).to_string()),
            ]),
            &[&bytes],
            p,
        )
    })?;
    Ok(match r.status {
        SolverStatus::Found => 0,
        SolverStatus::ExhaustedNone => 1,
        SolverStatus::BudgetExceeded => 2,
    })
}

fn cmd_fourier(a: FourierArgs) -> Result<u8, Failure> {
    let (set, bytes) = read_set(&a.file)?;
    let k = parse_int("k", &a.k)?;
    let big_k = match &a.big_k {
        Some(s) => parse_real("K", s)?,
        None => IntSet::min(&set).map_or(0.0, |m| m as f64 / 2.0),
    };
    let diag = arc_classify_with_bound(&set, k, big_k, a.lcm_bound)?;
    let exact = count_integral(&set, k)?;
    let mut v = serde_json::to_value(&diag).expect("serializable");
    let obj = v.as_object_mut().expect("object");
    obj.insert("F".into(), json!(diag.rounded.to_string().parse::<u64>().unwrap_or(u64::MAX)));
    obj.insert("count_integral".into(), json!(exact.to_string()));
    obj.insert("consistent".into(), json!(diag.rounded == exact));
    obj.insert("R".into(), json!(recip_sum(&set).to_string()));
    let body = to_json(&v);
    emit(&body, a.out.as_deref(), |p| {
        RunManifest::new(
            "fourier",
            params([("k", k.to_string()), ("K", big_k.to_string()), ("lcm_bound", a.lcm_bound.to_string())]),
            &[&bytes],
            p,
        )
    })?;
    Ok(0)
}

fn cmd_decompose(a: DecomposeArgs) -> Result<u8, Failure> {
    let (set, bytes) = read_set(&a.file)?;
    let t = table_for(IntSet::max(&set).unwrap_or(2))?;
    let d = Decomposition::new(&set, &t)?;
    let masses: BTreeMap<String, String> = d.qset.iter().map(|q| (q.to_string(), d.rec_sum_q(q).to_string())).collect();
    let parts: BTreeMap<String, &IntSet> = d.parts.iter().map(|(q, s)| (q.to_string(), s)).collect();
    let v = json!({
        "set": set,
        "parts": parts,
        "Q_A": d.qset,
        "R": recip_sum(&set).to_string(),
        "R_q": masses,
    });
    emit(&to_json(&v), a.out.as_deref(), |p| RunManifest::new("decompose", BTreeMap::new(), &[&bytes], p))?;
    Ok(0)
}

fn cmd_prune(a: PruneArgs) -> Result<u8, Failure> {
    let (set, bytes) = read_set(&a.file)?;
    let theta = parse_rational("theta", &a.theta)?;
    let t = table_for(IntSet::max(&set).unwrap_or(2))?;
    let mut p = params([("theta", theta.to_string())]);
    let trace = match (&a.alpha, &a.m) {
        (Some(alpha), Some(m)) => {
            let alpha = parse_rational("alpha", alpha)?;
            let m = parse_int("M", m)?;
            p.insert("alpha".into(), alpha.to_string());
            p.insert("M".into(), m.to_string());
            prune_to_window(&set, &alpha, &theta, m, &t)?
        }
        _ => prune_ppower(&set, &theta, &t)?,
    };
    emit(&to_json(&trace), a.out.as_deref(), |path| RunManifest::new("prune", p, &[&bytes], path))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if cli.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    // the global pool can only be set once per process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Fourier(a) => cmd_fourier(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Prune(a) => cmd_prune(a),
        Command::Experiment(a) => experiments::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("egyfrac: {f}");
            ExitCode::from(f.code())
        }
    }
}
