use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// CSV text whose first line echoes the configuration as JSON.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config: &impl Serialize, header: &[&str]) -> CliResult<Self> {
        let json = serde_json::to_string(config).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            text: format!("# config: {json}\n{}\n", header.join(",")),
        })
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        fs::write(path, &self.text).map_err(|e| CliError::io(path, e))
    }
}

pub fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v}")
    }
}

/// Empty field for frames without a decision.
pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
