//! Result tables with a metadata header, written as CSV or JSON.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Float(f64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

/// Rounds to 9 significant digits and prints the shortest exact form of the
/// rounded value.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        round9(v).to_string()
    }
}

fn round9(v: f64) -> f64 {
    format!("{v:.8e}").parse().expect("formatted float parses")
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
        }
    }

    /// Non-finite floats become strings, since JSON has no infinity.
    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => json!(s),
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(round9(*v)),
            Cell::Float(v) => json!(format_float(*v)),
        }
    }
}

/// Run provenance written ahead of the data.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub beam_grid: String,
    pub config: RunConfig,
}

impl Metadata {
    pub fn new(subcommand: &str, config: &RunConfig) -> Self {
        let side = |n: usize| (n as f64).sqrt().round() as usize;
        let [az0, az1] = config.beam_azimuth_deg;
        let [po0, po1] = config.beam_polar_deg;
        let beam_grid = format!(
            "bs {b}x{b} and ue {u}x{u} beams over azimuth [{az0}, {az1}] deg, polar [{po0}, {po1}] deg; ue grid reversed, {frame:?} frame",
            b = side(config.n_beams_bs),
            u = side(config.n_beams_ue),
            frame = config.ue_beam_frame,
        );
        Self {
            tool: "twl".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            seed: config.seed,
            beam_grid,
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub metadata: Metadata,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Marks the start of the config echo in CSV headers.
pub const CONFIG_MARKER: &str = "# [config]";

impl Table {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let m = &self.metadata;
        writeln!(out, "# {} {}", m.tool, m.version)?;
        writeln!(out, "# subcommand: {}", m.subcommand)?;
        writeln!(out, "# seed: {}", m.seed)?;
        writeln!(out, "# beam_grid: {}", m.beam_grid)?;
        writeln!(out, "{CONFIG_MARKER}")?;
        for line in m.config.to_toml().lines() {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = json!({
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)?;
        Ok(())
    }
}

/// Recovers the echoed config from a CSV produced by [`Table::write`].
pub fn config_from_csv_header(text: &str) -> Result<RunConfig, CliError> {
    let echo: String = text
        .lines()
        .skip_while(|l| *l != CONFIG_MARKER)
        .skip(1)
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.trim_start_matches('#').trim_start()))
        .collect();
    RunConfig::from_toml(&echo)
}
