use std::fmt::Write as _;

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{kernel_shap, Players, Predictor, ShapConfig};
use crate::par::Execution;
use crate::{Error, Result};

/// Attributions below this magnitude are left out of force data.
const NEGLIGIBLE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleAttribution {
    pub prediction: Vec<f64>,
    /// `shap[player][output]`.
    pub shap: Vec<Vec<f64>>,
    /// The instance value of each single-feature player; `None` for groups.
    pub values: Vec<Option<f64>>,
    /// Fraction of background rows at or below `values`, per player.
    pub percentiles: Vec<Option<f64>>,
    pub regularized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub players: Vec<String>,
    pub outputs: Vec<String>,
    pub base_value: Vec<f64>,
    pub enumerated: bool,
    pub samples: Vec<SampleAttribution>,
}

/// Explains every row of `instances`, in parallel when `exec` allows.
pub fn explain(
    model: &dyn Predictor,
    background: ArrayView2<'_, f64>,
    instances: ArrayView2<'_, f64>,
    players: &Players,
    outputs: &[String],
    cfg: &ShapConfig,
    exec: Execution,
) -> Result<AttributionReport> {
    if outputs.len() != model.n_outputs() {
        return Err(Error::Dimension(format!(
            "{} output names for {} model outputs",
            outputs.len(),
            model.n_outputs()
        )));
    }
    let rows: Vec<usize> = (0..instances.nrows()).collect();
    let explained = exec.map(&rows, |_, &i| {
        kernel_shap(model, background, instances.row(i), players, cfg, i as u64)
    });
    let mut samples = Vec::with_capacity(rows.len());
    let mut base_value = Vec::new();
    let mut enumerated = true;
    for (i, e) in explained.into_iter().enumerate() {
        let e = e?;
        let values: Vec<Option<f64>> = players
            .members
            .iter()
            .map(|m| (m.len() == 1).then(|| instances[[i, m[0]]]))
            .collect();
        let percentiles = players
            .members
            .iter()
            .zip(&values)
            .map(|(m, v)| {
                v.map(|v| {
                    let col = background.column(m[0]);
                    col.iter().filter(|&&b| b <= v).count() as f64 / col.len() as f64
                })
            })
            .collect();
        enumerated &= e.enumerated;
        base_value = e.base_value;
        samples.push(SampleAttribution {
            prediction: e.prediction,
            shap: e.shap,
            values,
            percentiles,
            regularized: e.regularized,
        });
    }
    if base_value.is_empty() {
        base_value = model
            .predict(background)?
            .mean_axis(Axis(0))
            .ok_or_else(|| Error::Precondition("background set is empty".into()))?
            .to_vec();
    }
    Ok(AttributionReport {
        players: players.names.clone(),
        outputs: outputs.to_vec(),
        base_value,
        enumerated,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub player: String,
    /// Mean absolute attribution per output.
    pub per_output: Vec<f64>,
    pub total: f64,
}

/// Players by total mean |shap| descending; ties keep player order.
pub fn feature_importance(report: &AttributionReport) -> Vec<Importance> {
    let n = report.samples.len().max(1) as f64;
    let mut out: Vec<Importance> = report
        .players
        .iter()
        .enumerate()
        .map(|(p, name)| {
            let per_output: Vec<f64> = (0..report.outputs.len())
                .map(|o| report.samples.iter().map(|s| s.shap[p][o].abs()).sum::<f64>() / n)
                .collect();
            Importance {
                player: name.clone(),
                total: per_output.iter().sum(),
                per_output,
            }
        })
        .collect();
    out.sort_by(|a, b| b.total.total_cmp(&a.total));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub player: String,
    pub value: Option<f64>,
    pub shap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceData {
    pub base_value: f64,
    pub prediction: f64,
    /// Non-negligible attributions by magnitude, largest first.
    pub contributions: Vec<Contribution>,
}

pub fn force_data(report: &AttributionReport, sample: usize, output: usize) -> Result<ForceData> {
    let s = report
        .samples
        .get(sample)
        .ok_or_else(|| Error::Precondition(format!("no sample {sample}")))?;
    if output >= report.outputs.len() {
        return Err(Error::Precondition(format!("no output {output}")));
    }
    let mut contributions: Vec<Contribution> = report
        .players
        .iter()
        .enumerate()
        .filter(|(p, _)| s.shap[*p][output].abs() > NEGLIGIBLE)
        .map(|(p, name)| Contribution {
            player: name.clone(),
            value: s.values[p],
            shap: s.shap[p][output],
        })
        .collect();
    contributions.sort_by(|a, b| b.shap.abs().total_cmp(&a.shap.abs()));
    Ok(ForceData {
        base_value: report.base_value[output],
        prediction: s.prediction[output],
        contributions,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `player,<one column per output>,total`.
pub fn importance_csv(report: &AttributionReport) -> String {
    let mut out = String::from("player");
    for o in &report.outputs {
        let _ = write!(out, ",\"{o}\"");
    }
    out.push_str(",total\n");
    for imp in feature_importance(report) {
        out.push_str(&imp.player);
        for v in &imp.per_output {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", imp.total);
    }
    out
}

/// Summary-plot data: `sample,player,value,percentile,output,shap`.
pub fn summary_csv(report: &AttributionReport) -> String {
    let mut out = String::from("sample,player,value,percentile,output,shap\n");
    for (i, s) in report.samples.iter().enumerate() {
        for (p, name) in report.players.iter().enumerate() {
            for (o, oname) in report.outputs.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{i},{name},{},{},\"{oname}\",{}",
                    opt(s.values[p]),
                    opt(s.percentiles[p]),
                    s.shap[p][o]
                );
            }
        }
    }
    out
}

/// Force-plot data: `sample,output,base_value,prediction,rank,player,value,shap`.
/// A sample with no contributions gets one row with rank 0.
pub fn force_csv(report: &AttributionReport) -> Result<String> {
    let mut out = String::from("sample,output,base_value,prediction,rank,player,value,shap\n");
    for i in 0..report.samples.len() {
        for (o, oname) in report.outputs.iter().enumerate() {
            let f = force_data(report, i, o)?;
            let head = format!("{i},\"{oname}\",{},{}", f.base_value, f.prediction);
            if f.contributions.is_empty() {
                let _ = writeln!(out, "{head},0,,,");
            }
            for (r, c) in f.contributions.iter().enumerate() {
                let _ = writeln!(out, "{head},{},{},{},{}", r + 1, c.player, opt(c.value), c.shap);
            }
        }
    }
    Ok(out)
}
