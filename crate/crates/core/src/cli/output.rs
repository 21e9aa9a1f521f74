use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;

use super::CliError;

/// 17 significant digits, round-trip exact and platform independent.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // no signed zeros in tables
        "0.0000000000000000e0".into()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn complex_json(z: Complex64) -> Value {
    serde_json::json!([z.re, z.im])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Whitespace-separated columns with a `#` header line.
pub fn dat(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = format!("# {}\n", columns.join(" "));
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| num(*x)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

/// Everything a command produces, held in memory until the command has
/// succeeded so that failures leave no partial output behind.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub csv: Vec<(String, CsvTable)>,
    pub json: Vec<(String, Value)>,
    pub dat: Vec<(String, String)>,
}

impl Artifacts {
    pub fn write(&self, dir: &Path, format: Format, plots: bool) -> Result<Vec<String>, CliError> {
        let mut files: Vec<(&str, String)> = Vec::new();
        if format.csv() {
            files.extend(self.csv.iter().map(|(n, t)| (n.as_str(), t.render())));
        }
        if format.json() {
            for (name, value) in &self.json {
                let mut text =
                    serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
                text.push('\n');
                files.push((name.as_str(), text));
            }
        }
        if plots {
            files.extend(self.dat.iter().map(|(n, t)| (n.as_str(), t.clone())));
        }
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            written.push(name.to_string());
        }
        Ok(written)
    }
}
