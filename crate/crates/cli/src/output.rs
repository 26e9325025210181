use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context as _;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Format, GlobalOpts};
use heralink::Scenario;

/// Where and how a subcommand writes its result.
pub struct Context {
    pub format: Format,
    pub seed: u64,
    pub jobs: Option<usize>,
    out: Option<PathBuf>,
    config_hash: String,
}

impl Context {
    pub fn new(sc: &Scenario, opts: &GlobalOpts) -> Self {
        Self {
            format: opts.format,
            seed: sc.run.seed,
            jobs: opts.jobs,
            out: opts.out.clone(),
            config_hash: hex::encode(Sha256::digest(sc.to_json_pretty().as_bytes())),
        }
    }

    pub fn header(&self) -> String {
        format!("# config_sha256={} seed={}\n", self.config_hash, self.seed)
    }

    fn emit(&self, stem: &str, ext: &str, body: String) -> anyhow::Result<()> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let path = dir.join(format!("{stem}.{ext}"));
                fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            }
            None => std::io::stdout().lock().write_all(body.as_bytes())?,
        }
        Ok(())
    }

    pub fn csv(&self, stem: &str, table: &Table) -> anyhow::Result<()> {
        self.emit(stem, "csv", format!("{}{}", self.header(), table.render()))
    }

    pub fn json<S: Serialize>(&self, stem: &str, value: &S) -> anyhow::Result<()> {
        let wrapped = serde_json::json!({
            "config_sha256": self.config_hash,
            "seed": self.seed,
            "result": value,
        });
        self.emit(stem, "json", serde_json::to_string_pretty(&wrapped)? + "\n")
    }

    /// Writes `table` as CSV, or its rows as JSON objects.
    pub fn table(&self, stem: &str, table: &Table) -> anyhow::Result<()> {
        match self.format {
            Format::Csv => self.csv(stem, table),
            Format::Json => self.json(stem, &table.records()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::Value::from(*x),
            Cell::Int(n) => serde_json::Value::from(*n),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    fn records(&self) -> Vec<serde_json::Map<String, serde_json::Value>> {
        self.rows
            .iter()
            .map(|r| self.columns.iter().map(|c| c.to_string()).zip(r.iter().map(Cell::json)).collect())
            .collect()
    }
}
