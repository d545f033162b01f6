use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ContinuationRow, SweepRow};
use crate::error::{Error, Result};
use crate::ham::OrderRow;
use crate::pade::PadeRow;

/// Row of `iterate` output: `pass,e_hat,residual`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassRow {
    pub pass: usize,
    pub e_hat: String,
    pub residual: String,
}

/// Row of `oracle` output: `index,eigenvalue`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenRow {
    pub index: usize,
    pub eigenvalue: String,
}

/// Everything one CLI run produced. Numbers are preformatted strings so the
/// report serializes losslessly at the configured number of digits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Subcommand that produced the report.
    pub command: String,
    /// Effective settings after merging the config file and flags.
    pub config: BTreeMap<String, String>,
    pub residual_mode: Option<String>,
    pub pade_requested: bool,
    #[serde(default)]
    pub orders: Vec<OrderRow>,
    #[serde(default)]
    pub pade: Vec<PadeRow>,
    #[serde(default)]
    pub sweep: Vec<SweepRow>,
    pub best_c0: Option<String>,
    #[serde(default)]
    pub passes: Vec<PassRow>,
    #[serde(default)]
    pub continuation: Vec<ContinuationRow>,
    #[serde(default)]
    pub eigenvalues: Vec<EigenRow>,
    /// Final energy at full digits, when the run has one.
    pub e_hat: Option<String>,
    pub wallclock_ms: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown output format '{other}' (expected csv or json)"))),
        }
    }
}

type Table = (&'static [&'static str], Vec<Vec<String>>);

impl SolveReport {
    /// Main table of the report, picked by command.
    fn primary_table(&self) -> Table {
        match self.command.as_str() {
            "sweep" => (
                &["c0", "order", "e_hat", "residual"],
                self.sweep.iter().map(|r| vec![r.c0.clone(), r.order.to_string(), r.e_hat.clone(), r.residual.clone()]).collect(),
            ),
            "iterate" => (
                &["pass", "e_hat", "residual"],
                self.passes.iter().map(|r| vec![r.pass.to_string(), r.e_hat.clone(), r.residual.clone()]).collect(),
            ),
            "continue" => (
                &["beta", "e_hat", "c0", "n_s"],
                self.continuation.iter().map(|r| vec![r.beta.clone(), r.e_hat.clone(), r.c0.clone(), r.n_s.to_string()]).collect(),
            ),
            "oracle" => {
                (&["index", "eigenvalue"], self.eigenvalues.iter().map(|r| vec![r.index.to_string(), r.eigenvalue.clone()]).collect())
            }
            _ => (
                &["order", "e_hat", "residual"],
                self.orders.iter().map(|r| vec![r.order.to_string(), r.e_hat.clone(), r.residual.clone()]).collect(),
            ),
        }
    }

    fn pade_table(&self) -> Table {
        (
            &["m", "value", "degenerate"],
            self.pade.iter().map(|r| vec![r.m.to_string(), r.value.clone(), r.degenerate.to_string()]).collect(),
        )
    }
}

fn write_table<W: Write>(out: W, (header, rows): &Table) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(*header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the primary table of `report` as CSV. Headers are always written,
/// so an empty table gives a header-only file.
pub fn write_csv<W: Write>(report: &SolveReport, out: W) -> Result<()> {
    write_table(out, &report.primary_table())
}

/// Path of the Padé table written next to a CSV report.
pub fn pade_sidecar(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.pade.csv"))
}

/// Writes `report` to `path`, or stdout when `path` is `None`.
///
/// CSV output holds the primary table; a Padé table goes to
/// `<stem>.pade.csv` beside the file, or after a blank line on stdout.
pub fn emit_report(report: &SolveReport, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    match (format, path) {
        (ReportFormat::Json, Some(p)) => {
            let mut w = BufWriter::new(File::create(p)?);
            serde_json::to_writer_pretty(&mut w, report)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        (ReportFormat::Json, None) => {
            let mut w = io::stdout().lock();
            serde_json::to_writer_pretty(&mut w, report)?;
            w.write_all(b"\n")?;
        }
        (ReportFormat::Csv, Some(p)) => {
            write_csv(report, BufWriter::new(File::create(p)?))?;
            if !report.pade.is_empty() {
                write_table(BufWriter::new(File::create(pade_sidecar(p))?), &report.pade_table())?;
            }
        }
        (ReportFormat::Csv, None) => {
            let mut w = io::stdout().lock();
            write_csv(report, &mut w)?;
            if !report.pade.is_empty() {
                w.write_all(b"\n")?;
                write_table(&mut w, &report.pade_table())?;
            }
        }
    }
    Ok(())
}
