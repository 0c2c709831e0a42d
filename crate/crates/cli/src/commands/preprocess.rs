use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use mamid_core::dataset::{load_csv, preprocess, write_csv, Provenance};
use serde::Serialize;

use crate::args::{Common, PreprocessArgs};
use crate::layout::StageWriter;

pub fn run(args: &PreprocessArgs) -> Result<()> {
    run_stage(&args.data, &args.common)
}

#[derive(Serialize)]
struct Config<'a> {
    data: &'a Path,
}

pub fn run_stage(data: &Path, common: &Common) -> Result<()> {
    let table = load_csv(data)?;
    let pre = preprocess(&table)?;
    let mut stage = StageWriter::new(&common.out, "preprocess")?;
    stage.input(data);
    let features = stage.artifact("features.csv")?;
    write_csv(&pre.dataset.to_flow_table(), &features)?;
    stage.write_json("provenance.json", &pre.provenance)?;
    let log = provenance_log(&pre.provenance);
    stage.write("provenance.txt", &log)?;
    stage.finish(&Config { data })?;
    print!("{log}");
    Ok(())
}

fn provenance_log(p: &Provenance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "input: {} rows, {} numeric columns, {} malformed cells", p.input_rows, p.input_columns, p.malformed_cells);
    let _ = writeln!(out, "dropped {} columns:", p.dropped.len());
    for d in &p.dropped {
        let reason = serde_json::to_value(d.reason).ok();
        let reason = reason.as_ref().and_then(|v| v.as_str()).unwrap_or("");
        let _ = writeln!(out, "  {} ({reason})", d.column);
    }
    let touched: Vec<_> = p.sanitized.iter().filter(|s| s.pos_inf + s.neg_inf + s.nan > 0).collect();
    let _ = writeln!(out, "sanitized {} columns{}", touched.len(), if touched.is_empty() { "" } else { ":" });
    for s in touched {
        let _ = writeln!(out, "  {}: +inf {}, -inf {}, nan {}", s.column, s.pos_inf, s.neg_inf, s.nan);
    }
    let _ = writeln!(out, "kept {} features, min-max scaled to [0, 1]", p.kept.len());
    out
}
