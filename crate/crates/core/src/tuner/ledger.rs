//! JSON-lines experiment ledger and CSV plot data.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Deserialize;

use super::{ExperimentResult, Hyperparameters, OptionSummary, RankedRow, TopKTable};
use crate::dataset::Level;
use crate::nn::ActivationKind;
use crate::{Error, Result};

/// Appends one JSON object per line and flushes after each, so an interrupted
/// run loses at most the line being written.
pub struct LedgerWriter {
    path: PathBuf,
    file: Mutex<File>,
}

impl LedgerWriter {
    pub fn append(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(LedgerWriter {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn write(&self, result: &ExperimentResult) -> Result<()> {
        let mut line = serde_json::to_string(result)?;
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|p| p.into_inner());
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes `results` to `path`, replacing any existing file.
pub fn write_ledger(path: impl AsRef<Path>, results: &[ExperimentResult]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for r in results {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a ledger, sorted by grid index. A truncated final line is dropped;
/// a malformed line anywhere else is an error. Later duplicates of an index win.
pub fn read_ledger(path: impl AsRef<Path>) -> Result<Vec<ExperimentResult>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut out: Vec<ExperimentResult> = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ExperimentResult>(line) {
            Ok(r) => out.push(r),
            Err(_) if Some(i) == last => break,
            Err(e) => return Err(e.into()),
        }
    }
    out.reverse();
    out.sort_by_key(|r| r.index);
    out.dedup_by_key(|r| r.index);
    Ok(out)
}

/// `index,accuracy,status,reason` per experiment; accuracy is blank for failures.
pub fn scatter_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from("index,accuracy,status,reason\n");
    for r in results {
        let _ = match (r.accuracy(), r.failure()) {
            (Some(a), _) => writeln!(out, "{},{a},success,", r.index),
            (None, Some(reason)) => {
                let reason = serde_json::to_value(reason).ok();
                let reason = reason.as_ref().and_then(|v| v.as_str()).unwrap_or("");
                writeln!(out, "{},,failed,{reason}", r.index)
            }
            (None, None) => Ok(()),
        };
    }
    out
}

/// Bar-chart data: `axis,option,experiments,successes,mean_accuracy`.
pub fn summary_csv(summary: &OptionSummary) -> String {
    let mut out = String::from("axis,option,experiments,successes,mean_accuracy\n");
    for axis in &summary.axes {
        for o in &axis.options {
            let mean = o.mean_accuracy.map(|m| m.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{mean}", axis.axis, o.option, o.experiments, o.successes);
        }
    }
    out
}

const TOP_K_HEADER: &str =
    "level,rank,index,accuracy,neurons,batch_size,epochs,optimizer,hidden_activation,output_activation";

pub fn top_k_csv(tables: &[TopKTable]) -> String {
    let mut out = format!("{TOP_K_HEADER}\n");
    for t in tables {
        for r in &t.rows {
            let c = &r.config;
            let index = r.index.map(|i| i.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{index},{},{},{},{},{},{},{}",
                t.level,
                r.rank,
                r.accuracy,
                c.neurons,
                c.batch_size,
                c.epochs,
                c.optimizer.name(),
                c.hidden_activation,
                c.output_activation
            );
        }
    }
    out
}

#[derive(Deserialize)]
struct TopKRecord {
    level: String,
    rank: usize,
    index: Option<usize>,
    accuracy: f64,
    neurons: usize,
    batch_size: usize,
    epochs: usize,
    optimizer: String,
    hidden_activation: String,
    output_activation: String,
}

/// Parses [`top_k_csv`] output. Optimizers named here get default settings.
/// Tables keep the order in which their levels first appear.
pub fn read_top_k_csv(text: &str) -> Result<Vec<TopKTable>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut tables: Vec<TopKTable> = Vec::new();
    for rec in reader.deserialize::<TopKRecord>() {
        let rec = rec?;
        let level: Level = rec.level.parse()?;
        let act = |s: &str| -> Result<ActivationKind> { s.parse() };
        let row = RankedRow {
            rank: rec.rank,
            index: rec.index,
            accuracy: rec.accuracy,
            config: Hyperparameters::new(
                rec.epochs,
                rec.batch_size,
                rec.neurons,
                rec.optimizer.parse()?,
                act(&rec.hidden_activation)?,
                act(&rec.output_activation)?,
            ),
        };
        match tables.iter_mut().find(|t| t.level == level) {
            Some(t) => t.rows.push(row),
            None => tables.push(TopKTable {
                level,
                rows: vec![row],
            }),
        }
    }
    if tables.is_empty() {
        return Err(Error::Schema("top-k table has no rows".into()));
    }
    Ok(tables)
}
