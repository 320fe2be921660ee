//! CSV formatting, output files and structured errors.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use serde_json::json;

/// A failed run: reported as JSON on stderr with exit code 1 (bad input) or
/// 2 (numerical failure).
#[derive(Debug)]
pub struct Failure {
    kind: String,
    message: String,
    code: u8,
}

impl Failure {
    pub fn usage(message: String) -> Self {
        Failure { kind: "Usage".into(), message, code: 1 }
    }

    pub fn io(message: String) -> Self {
        Failure { kind: "Io".into(), message, code: 1 }
    }

    pub fn report(&self) -> ExitCode {
        let doc = json!({ "error": self.kind, "message": self.message.trim_end() });
        eprintln!("{doc}");
        ExitCode::from(self.code)
    }
}

impl From<callspace::Error> for Failure {
    fn from(e: callspace::Error) -> Self {
        let code = if e.is_numerical() { 2 } else { 1 };
        Failure { kind: e.kind().into(), message: e.to_string(), code }
    }
}

/// Formats a value with 17 significant digits; `inf`, `-inf` and `nan` are
/// spelled out.
pub fn number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| number(v)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    text
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::io(e.to_string())),
    }
}
