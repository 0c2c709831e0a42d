use anyhow::Result;
use mamid_core::dataset::{split_indices, Level};
use mamid_core::metrics::{confusion, report};
use mamid_core::nn::NetworkFile;
use mamid_core::tuner::{fit, ExperimentData};
use serde::Serialize;

use super::tune::{load_selection, load_split, subset_split, SplitFile};
use super::features;
use crate::args::ValidateArgs;
use crate::bundle::{ModelBundle, ModelSpec};
use crate::layout::{StageWriter, SPLIT};

pub fn run(args: &ValidateArgs) -> Result<()> {
    let common = &args.common;
    let selection = load_selection(common, args.selection.as_deref())?;
    let config = selection.selection.hyperparameters.clone();
    let (data, features_path) = features(common, args.data.as_deref())?;

    let scope = if args.full { "validate-full" } else { "validate-subset" };
    let mut stage = StageWriter::new(&common.out, scope)?;
    stage.input(&features_path);
    let default_selection = common.out.join(crate::layout::SELECTION);
    stage.input(args.selection.as_deref().unwrap_or(&default_selection));

    let (split, split_rel) = if args.full {
        let labels = data.labels_at(Level::Subcategory);
        let (train, test) = split_indices(&labels, args.split.test_fraction, common.seed)?;
        let split = SplitFile {
            rows: data.len(),
            seed: common.seed,
            train,
            test,
        };
        stage.write_json("split.json", &split)?;
        (split, "validate/full/split.json".to_string())
    } else {
        let path = common.out.join(SPLIT);
        let split = if path.exists() {
            stage.input(&path);
            load_split(common)?
        } else {
            let split = subset_split(&data, &args.split, common.seed)?;
            stage.write_json("split.json", &split)?;
            split
        };
        let rel = if path.exists() { SPLIT.to_string() } else { "validate/subset/split.json".to_string() };
        (split, rel)
    };
    let (train, test) = split.apply(&data)?;
    let source = if args.full { "Full Dataset" } else { "Subset Dataset" };
    println!("{source}: {} train / {} test rows; {config}", train.len(), test.len());

    for level in args.level.levels() {
        let exp = ExperimentData::from_datasets(&train, &test, level)?;
        let (net, _) = fit(&config, &exp, common.seed)?;
        let preds = net.predict_classes(exp.test_x.view())?;
        let cm = confusion(&preds, &exp.test_y, &exp.classes)?;
        let rep = report(&cm)?;
        let table = rep.to_table(&format!("{source}, {level}"));
        stage.write(&format!("{level}/report.txt"), &table)?;
        stage.write(&format!("{level}/report.csv"), rep.to_csv())?;
        stage.write_json(&format!("{level}/report.json"), &rep)?;
        let bundle = ModelBundle {
            level,
            classes: exp.classes.clone(),
            features: train.features.columns.clone(),
            scaler: train.features.scaling.clone(),
            hyperparameters: Some(config.clone()),
            split: Some(split_rel.clone()),
            model: ModelSpec::Network(NetworkFile::from(&net)),
        };
        stage.write_json(&format!("{level}/model.json"), &bundle)?;
        print!("{table}");
        if rep.has_undefined() {
            println!("note: some classes were never predicted or absent; their undefined ratios are reported as 0");
        }
        println!();
    }

    #[derive(Serialize)]
    struct Config<'a> {
        #[serde(flatten)]
        args: &'a ValidateArgs,
        selection_source: &'a str,
    }
    stage.finish(&Config {
        args,
        selection_source: &selection.source,
    })
}
