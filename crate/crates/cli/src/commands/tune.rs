use std::path::Path;

use anyhow::{Context, Result};
use mamid_core::dataset::{split_indices, stratified_indices, Dataset, Level};
use mamid_core::tuner::{
    option_summary, read_ledger, read_top_k_csv, run_grid_resumable, scatter_csv, select_optimal,
    summary_csv, top_k_csv, top_k_table, write_ledger, ExperimentData, GridSpace, LedgerWriter,
    OptionSummary, Selection, SelectionPolicy, TopKTable,
};
use serde::{Deserialize, Serialize};

use super::{execution, features};
use crate::args::{Common, SplitArgs, TuneArgs};
use crate::layout::{read_json, StageWriter, SELECTION, SPLIT};
use crate::UsageError;

/// Row indices into the feature file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFile {
    pub rows: usize,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitFile {
    pub fn apply(&self, data: &Dataset) -> Result<(Dataset, Dataset)> {
        if data.len() != self.rows {
            return Err(mamid_core::Error::Schema(format!(
                "split was made for {} rows, feature file has {}",
                self.rows,
                data.len()
            ))
            .into());
        }
        Ok(data.select(&self.train).rescale_pair(&data.select(&self.test)))
    }
}

/// A stratified subset of at most `subset_size` rows, split into train and test.
pub fn subset_split(data: &Dataset, split: &SplitArgs, seed: u64) -> Result<SplitFile> {
    let labels = data.labels_at(Level::Subcategory);
    let subset: Vec<usize> = if data.len() > split.subset_size {
        stratified_indices(&labels, split.subset_size, seed)?
    } else {
        (0..data.len()).collect()
    };
    let sub_labels: Vec<&str> = subset.iter().map(|&i| labels[i]).collect();
    let (train, test) = split_indices(&sub_labels, split.test_fraction, seed)?;
    Ok(SplitFile {
        rows: data.len(),
        seed,
        train: train.into_iter().map(|i| subset[i]).collect(),
        test: test.into_iter().map(|i| subset[i]).collect(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionFile {
    pub source: String,
    pub levels: Vec<Level>,
    #[serde(flatten)]
    pub selection: Selection,
}

pub fn run(args: &TuneArgs) -> Result<()> {
    let policy = SelectionPolicy {
        tie_tolerance: args.tie_tolerance,
    };
    if let Some(tables) = &args.from_tables {
        return select_from_tables(args, tables, &policy);
    }
    let common = &args.common;
    let space = match &args.grid {
        Some(path) => GridSpace::load(path)?,
        None => GridSpace::default(),
    };
    let (data, features_path) = features(common, args.data.as_deref())?;
    let split = subset_split(&data, &args.split, common.seed)?;
    let (train, test) = split.apply(&data)?;

    let mut stage = StageWriter::new(&common.out, "tune")?;
    stage.input(&features_path);
    if let Some(grid) = &args.grid {
        stage.input(grid);
    }
    stage.write_json("split.json", &split)?;
    eprintln!(
        "tuning on {} train / {} test rows, {} grid points per level",
        train.len(),
        test.len(),
        space.cardinality()
    );

    let exec = execution(common);
    let mut tables: Vec<TopKTable> = Vec::new();
    let mut summaries: Vec<OptionSummary> = Vec::new();
    let levels = args.level.levels();
    for &level in &levels {
        let exp = ExperimentData::from_datasets(&train, &test, level)?;
        let ledger_path = stage.artifact(&format!("{level}/ledger.jsonl"))?;
        let done = if ledger_path.exists() {
            read_ledger(&ledger_path)?
        } else {
            Vec::new()
        };
        if !done.is_empty() {
            eprintln!("{level}: resuming with {} finished experiments", done.len());
        }
        let writer = LedgerWriter::append(&ledger_path)?;
        let sink = |r: &mamid_core::tuner::ExperimentResult| {
            if let Err(e) = writer.write(r) {
                eprintln!("warning: ledger write failed: {e}");
            }
        };
        let results = run_grid_resumable(&space, &exp, common.seed, exec, done, &sink).map_err(|e| {
            anyhow::Error::from(UsageError(format!(
                "{e}; remove {} to start over",
                ledger_path.display()
            )))
        })?;
        drop(writer);
        // Rewritten in grid order so the file does not depend on completion order.
        write_ledger(&ledger_path, &results)?;

        let table = top_k_table(level, &results, args.top_k);
        let summary = option_summary(&results);
        stage.write(&format!("{level}/top{}.csv", args.top_k), top_k_csv(std::slice::from_ref(&table)))?;
        stage.write(&format!("{level}/top{}.txt", args.top_k), table.to_text())?;
        stage.write(&format!("{level}/summary.csv"), summary_csv(&summary))?;
        stage.write_json(&format!("{level}/summary.json"), &summary)?;
        stage.write(&format!("{level}/scatter.csv"), scatter_csv(&results))?;

        let failed = results.len() - summary.successes;
        let diverged = results
            .iter()
            .filter(|r| r.failure() == Some(mamid_core::tuner::FailureReason::TrainingDiverged))
            .count();
        println!(
            "{level}: {} succeeded, {failed} failed ({} incompatible, {diverged} diverged)",
            summary.successes,
            failed - diverged
        );
        print!("{}", table.to_text());
        tables.push(table);
        summaries.push(summary);
    }

    let selection = select_optimal(&tables, &summaries, &policy)?;
    finish_selection(&mut stage, "grid", &levels, selection)?;
    stage.finish(args)
}

fn select_from_tables(args: &TuneArgs, path: &Path, policy: &SelectionPolicy) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| mamid_core::Error::io(path, e))?;
    let tables = read_top_k_csv(&text).with_context(|| format!("reading {}", path.display()))?;
    let levels: Vec<Level> = tables.iter().map(|t| t.level).collect();
    let selection = select_optimal(&tables, &[], policy)?;
    let mut stage = StageWriter::new(&args.common.out, "tune")?;
    stage.input(path);
    finish_selection(&mut stage, "tables", &levels, selection)?;
    stage.finish(args)
}

fn finish_selection(stage: &mut StageWriter, source: &str, levels: &[Level], selection: Selection) -> Result<()> {
    let mut text = format!("selected: {}\n", selection.hyperparameters);
    for line in &selection.log {
        text.push_str("  ");
        text.push_str(line);
        text.push('\n');
    }
    stage.write("selection.txt", &text)?;
    stage.write_json(
        "selection.json",
        &SelectionFile {
            source: source.into(),
            levels: levels.to_vec(),
            selection,
        },
    )?;
    print!("{text}");
    Ok(())
}

pub fn load_selection(common: &Common, path: Option<&Path>) -> Result<SelectionFile> {
    let default = common.out.join(SELECTION);
    let path = path.unwrap_or(&default);
    if !path.exists() {
        return Err(UsageError(format!(
            "{} not found; run `mamid tune` first or pass --selection",
            path.display()
        ))
        .into());
    }
    read_json(path)
}

pub fn load_split(common: &Common) -> Result<SplitFile> {
    let path = common.out.join(SPLIT);
    if !path.exists() {
        return Err(UsageError(format!("{} not found; run `mamid tune` first", path.display())).into());
    }
    read_json(&path)
}
