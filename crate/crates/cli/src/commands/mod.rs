pub mod explain;
pub mod preprocess;
pub mod report;
pub mod synth;
pub mod tune;
pub mod validate;

use std::path::Path;

use anyhow::{Context, Result};
use mamid_core::dataset::{load_csv, Dataset};
use mamid_core::par::Execution;

use crate::args::Common;
use crate::layout::FEATURES;
use crate::UsageError;

pub fn execution(common: &Common) -> Execution {
    let threads = common.parallelism.map(|n| n as usize).unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    Execution::with_threads(threads)
}

/// The preprocessed feature file, running the preprocess stage from `raw`
/// first when it has not been run yet.
pub fn features(common: &Common, raw: Option<&Path>) -> Result<(Dataset, std::path::PathBuf)> {
    let path = common.out.join(FEATURES);
    if !path.exists() {
        match raw {
            Some(raw) => preprocess::run_stage(raw, common)?,
            None => {
                return Err(UsageError(format!(
                    "{} not found; run `mamid preprocess --data <csv>` first or pass --data",
                    path.display()
                ))
                .into())
            }
        }
    }
    let table = load_csv(&path)?;
    let data = Dataset::from_flow_table(&table).with_context(|| format!("reading {}", path.display()))?;
    Ok((data, path))
}
