//! Output directory handling: tables, JSON reports, plot stubs, manifest.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

/// A rectangular table of numbers, written as CSV or as a JSON array of
/// records.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|v| match v {
                            Value::String(s) => s.clone(),
                            Value::Null => String::new(),
                            other => other.to_string(),
                        })
                        .collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
            }
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        Value::Object(
                            self.columns
                                .iter()
                                .zip(row)
                                .map(|(c, v)| (c.to_string(), v.clone()))
                                .collect(),
                        )
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut out, &records)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Collects everything one command writes and finishes with `manifest.json`.
pub struct OutputDir {
    dir: PathBuf,
    format: Format,
    command: String,
    seed: u64,
    config: RunConfig,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(command: &str, config: &RunConfig, seed: u64) -> Result<Self, CliError> {
        let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("selfrepel-out"));
        fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        let mut o = Self {
            dir,
            format: config.format.unwrap_or(Format::Csv),
            command: command.to_string(),
            seed,
            config: config.clone(),
            files: Vec::new(),
        };
        let mut resolved = config.clone();
        resolved.out = None;
        resolved.threads = None;
        resolved.seed = Some(seed);
        o.write_text("config.toml", &resolved.to_toml())?;
        Ok(o)
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<fs::File>, CliError> {
        let p = self.dir.join(name);
        let f = fs::File::create(&p).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display())))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(BufWriter::new(f))
    }

    /// Writes `table` as `<stem>.csv` or `<stem>.json`; returns the file name.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<String, CliError> {
        let name = format!("{stem}.{}", self.format.extension());
        let format = self.format;
        let mut w = self.open(&name)?;
        table.write(format, &mut w).and_then(|_| w.flush()).map_err(io)?;
        Ok(name)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut w = self.open(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(io)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let mut w = self.open(name)?;
        w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(io)
    }

    /// Writes a matplotlib script reading `data` (relative to the script).
    pub fn plot_stub(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let reader = match self.format {
            Format::Csv => "pd.read_csv",
            Format::Json => "pd.read_json",
        };
        let text = format!(
            "# Plotting stub generated by selfrepel {}; edit freely.\n\
             import os\n\
             import matplotlib.pyplot as plt\n\
             import pandas as pd\n\n\
             HERE = os.path.dirname(os.path.abspath(__file__))\n\n\n\
             def load(name):\n    return {reader}(os.path.join(HERE, name))\n\n\n\
             {body}\n",
            selfrepel_core::VERSION
        );
        self.write_text(name, &text)
    }

    /// Writes `manifest.json`. The timestamp lives only here, so every other
    /// file is byte-identical across reruns.
    pub fn finish(mut self, summary: Value) -> Result<PathBuf, CliError> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let manifest = json!({
            "version": selfrepel_core::VERSION,
            "command": self.command,
            "seed": self.seed,
            "config_hash": self.config.hash(&self.command),
            "timestamp": timestamp,
            "files": self.files,
            "summary": summary,
        });
        self.json("manifest.json", &manifest)?;
        Ok(self.dir)
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Runtime(e.to_string())
}
