use std::io::Write;
use std::path::Path;

use rmroute_core::sim::Report;
use rmroute_core::{Error, VERSION};
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Output document: tool, version, command, seed and resolved configuration,
/// followed by the command's own fields.
pub fn document(command: &str, config: &impl Serialize, seed: Option<u64>, body: Value) -> Result<Value, Error> {
    let mut doc = Map::new();
    doc.insert("tool".into(), json!("rmroute"));
    doc.insert("version".into(), json!(VERSION));
    doc.insert("command".into(), json!(command));
    doc.insert("seed".into(), json!(seed));
    doc.insert("config".into(), serde_json::to_value(config)?);
    if let Value::Object(fields) = body {
        doc.extend(fields);
    }
    Ok(Value::Object(doc))
}

/// Pretty JSON to `out`, or to stdout.
pub fn emit(doc: &Value, out: Option<&Path>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(doc)? + "\n";
    write_text(&text, out)
}

pub fn write_text(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

pub fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn report_table(report: &Report) -> String {
    let mut s = format!(
        "{:<8} {:>5} {:>14} {:>12} {:>14} {:>14} {:>9}\n",
        "policy", "runs", "mean", "std", "min", "max", "truncated"
    );
    for p in &report.policies {
        let m = &p.summary;
        s.push_str(&format!(
            "{:<8} {:>5} {:>14.3} {:>12.3} {:>14.3} {:>14.3} {:>9}\n",
            p.label, m.count, m.mean, m.std, m.min, m.max, p.truncated_runs
        ));
    }
    s
}
