use std::fmt::Write as _;

use anyhow::{Context, Result};
use mamid_core::dataset::{load_csv, stratified_indices, Dataset};
use mamid_core::explain::{
    explain, feature_importance, force_csv, importance_csv, summary_csv, Players, ShapConfig,
};
use ndarray::{Array2, Axis};

use super::execution;
use super::tune::SplitFile;
use crate::args::ExplainArgs;
use crate::bundle::ModelBundle;
use crate::layout::{read_json, StageWriter, FEATURES};
use crate::UsageError;

pub fn run(args: &ExplainArgs) -> Result<()> {
    let common = &args.common;
    let bundle = ModelBundle::load(&args.model).with_context(|| format!("loading {}", args.model.display()))?;
    let model = bundle.instantiate()?;
    let mut stage = StageWriter::new(&common.out, "explain")?;
    stage.input(&args.model);

    // Background rows come from training data when the split is known.
    let (background_pool, explain_pool) = match (&args.data, &bundle.split) {
        (Some(path), _) => {
            stage.input(path);
            let data = Dataset::from_flow_table(&load_csv(path)?)?;
            (data.clone(), data)
        }
        (None, Some(split_rel)) => {
            let features_path = common.out.join(FEATURES);
            let split_path = common.out.join(split_rel);
            stage.input(&features_path);
            stage.input(&split_path);
            let data = Dataset::from_flow_table(&load_csv(&features_path)?)?;
            let split: SplitFile = read_json(&split_path)?;
            (data.select(&split.train), data.select(&split.test))
        }
        (None, None) => {
            return Err(UsageError("the model bundle names no split; pass --data".into()).into());
        }
    };

    let background = sample_rows(&background_pool, &bundle, args.background, common.seed)?;
    let instances = sample_rows(&explain_pool, &bundle, args.samples, common.seed.wrapping_add(1))?;
    if background.nrows() == 0 || instances.nrows() == 0 {
        return Err(mamid_core::Error::Precondition("no rows to explain".into()).into());
    }
    let players = Players::top_variance(&bundle.features, background.view(), args.max_players)?;
    let outputs = bundle.output_names(&model);
    let cfg = ShapConfig {
        max_enumerated_players: 12,
        n_coalition_samples: args.coalitions,
        seed: common.seed,
    };
    let report = explain(&model, background.view(), instances.view(), &players, &outputs, &cfg, execution(common))?;

    let level = bundle.level;
    stage.write(&format!("{level}/importance.csv"), importance_csv(&report))?;
    stage.write(&format!("{level}/summary.csv"), summary_csv(&report))?;
    stage.write(&format!("{level}/force.csv"), force_csv(&report)?)?;
    stage.write_json(&format!("{level}/attributions.json"), &report)?;
    stage.write_json(&format!("{level}/players.json"), &players)?;

    let mut text = format!(
        "{level}: {} rows explained against {} background rows, {} players ({})\n",
        instances.nrows(),
        background.nrows(),
        players.len(),
        if report.enumerated { "exact" } else { "sampled" }
    );
    for imp in feature_importance(&report).iter().take(10) {
        let _ = writeln!(text, "  {:<28} {:.6}", imp.player, imp.total);
    }
    let regularized = report.samples.iter().filter(|s| s.regularized).count();
    if regularized > 0 {
        let _ = writeln!(text, "warning: {regularized} rows needed a regularized solve");
    }
    stage.write(&format!("{level}/importance.txt"), &text)?;
    print!("{text}");
    stage.finish(args)
}

/// Up to `n` rows stratified on the bundle's level, in model feature order and scaling.
fn sample_rows(data: &Dataset, bundle: &ModelBundle, n: usize, seed: u64) -> Result<Array2<f64>> {
    let cols: Vec<usize> = bundle
        .features
        .iter()
        .map(|f| {
            data.features
                .columns
                .iter()
                .position(|c| c == f)
                .ok_or_else(|| mamid_core::Error::Schema(format!("feature {f} missing from data")))
        })
        .collect::<std::result::Result<_, _>>()?;
    let take = n.min(data.len());
    let idx = stratified_indices(&data.labels_at(bundle.level), take, seed)?;
    let rows = data.features.values.select(Axis(0), &idx).select(Axis(1), &cols);
    Ok(bundle.scaler.transform(&rows))
}
