//! Versioned CSV and gnuplot `.dat` result tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Dat,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Dat => "dat",
        }
    }
}

/// Rows of one result file. The first two columns of every row are the base
/// seed and the configuration hash.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    seed: u64,
    config_hash: String,
}

/// Shortest round-trip representation, so files are reproducible bit for bit.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

impl Table {
    pub fn new(name: &str, columns: &[&str], seed: u64, config_hash: &str) -> Self {
        let mut all = vec!["seed".to_string(), "config_hash".to_string()];
        all.extend(columns.iter().map(|c| c.to_string()));
        Table {
            name: name.into(),
            columns: all,
            rows: Vec::new(),
            seed,
            config_hash: config_hash.into(),
        }
    }

    pub fn push(&mut self, values: Vec<String>) {
        assert_eq!(values.len() + 2, self.columns.len(), "row width does not match the header");
        let mut row = vec![self.seed.to_string(), self.config_hash.clone()];
        row.extend(values);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn schema_line(&self) -> String {
        format!("# scs-fri {} schema v{SCHEMA_VERSION}", self.name)
    }

    pub fn render(&self, format: OutputFormat) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "{}", self.schema_line())?;
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                w.flush()?;
            }
            OutputFormat::Dat => {
                writeln!(out, "# {}", self.columns.join(" "))?;
                for row in &self.rows {
                    writeln!(out, "{}", row.join(" "))?;
                }
            }
        }
        Ok(out)
    }

    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        fs::write(&path, self.render(format)?)?;
        Ok(path)
    }
}

/// Parses a CSV file written by [`Table::render`]: skips `#` lines and
/// returns the header and the records.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}
