use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

/// Everything needed to reproduce one output artifact.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub input_digest: String,
    pub output_path: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, String>, inputs: &[&[u8]], output: &Path) -> Self {
        let mut h = Sha256::new();
        for bytes in inputs {
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        RunManifest {
            command: command.to_string(),
            parameters,
            input_digest: format!("sha256:{}", hex::encode(h.finalize())),
            output_path: output.display().to_string(),
        }
    }
}

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    // serde_json::Value keeps objects in a BTreeMap, so keys come out sorted
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

/// Writes `body` to `out` (with a manifest beside it) or to stdout.
pub fn emit(body: &str, out: Option<&Path>, manifest: impl FnOnce(&Path) -> RunManifest) -> Result<(), Failure> {
    match out {
        Some(path) => {
            write_file(path, body.as_bytes())?;
            let m = manifest(path);
            write_file(&manifest_path(path), to_json(&m).as_bytes())
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

pub fn csv_string<R: Serialize>(rows: &[R]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Internal(e.to_string()))
}
