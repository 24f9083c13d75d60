use std::env;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde_json::Value;

use crate::CliError;

/// Overrides the directory that relative `--output` paths resolve against.
pub const OUT_DIR_VAR: &str = "QASPACE_OUT_DIR";

pub fn json_document(config: Value, result: Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("config".into(), config);
    match result {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
    text.push('\n');
    text
}

/// CSV with the configuration echoed as a leading `#` comment line.
pub fn csv_document(config: &Value, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut text = format!("# {}\n{}\n", config, header.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    text
}

fn resolve(path: &str) -> PathBuf {
    let p = PathBuf::from(path);
    match env::var_os(OUT_DIR_VAR) {
        Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
        _ => p,
    }
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(text: &str, path: Option<&str>) -> Result<(), CliError> {
    match path {
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::usage(format!("cannot write to stdout: {e}"))),
        Some(p) => {
            let target = resolve(p);
            if let Some(parent) = target.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .map_err(|e| CliError::usage(format!("cannot create {}: {e}", parent.display())))?;
            }
            fs::write(&target, text)
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", target.display())))
        }
    }
}
