use std::collections::BTreeSet;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::iotid20::{CONSTANT_COLUMNS, IDENTIFIER_COLUMNS};
use super::{Dataset, FeatureMatrix, FlowTable};
use crate::{Error, Result};

/// Per-column min-max scaling to `[0, 1]`.
///
/// Columns with `max == min` map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(values: &Array2<f64>) -> Self {
        let (mut min, mut max) = (vec![f64::INFINITY; values.ncols()], vec![f64::NEG_INFINITY; values.ncols()]);
        for row in values.axis_iter(Axis(0)) {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        MinMaxScaler { min, max }
    }

    pub fn identity(width: usize) -> Self {
        MinMaxScaler {
            min: vec![0.0; width],
            max: vec![1.0; width],
        }
    }

    /// Values outside the fitted range land outside `[0, 1]`; they are not clipped.
    pub fn transform(&self, values: &Array2<f64>) -> Array2<f64> {
        let mut out = values.clone();
        for mut row in out.axis_iter_mut(Axis(0)) {
            for (j, v) in row.iter_mut().enumerate() {
                let span = self.max[j] - self.min[j];
                *v = if span > 0.0 { (*v - self.min[j]) / span } else { 0.0 };
            }
        }
        out
    }

    pub fn inverse(&self, values: &Array2<f64>) -> Array2<f64> {
        let mut out = values.clone();
        for mut row in out.axis_iter_mut(Axis(0)) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.min[j] + *v * (self.max[j] - self.min[j]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Flow identifier (addresses, ports, protocol).
    Identifier,
    /// Named as single-valued for the IoTID20 dataset.
    ListedConstant,
    /// Holds one distinct value in the data being processed.
    SingleValued,
    /// Text column that never reached the numeric table.
    NonNumeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub column: String,
    pub reason: DropReason,
}

/// Replacement values for one kept column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnFill {
    pub column: String,
    /// Largest finite value; replaces `+inf`.
    pub pos_inf: f64,
    /// Smallest finite value; replaces `-inf`.
    pub neg_inf: f64,
    /// Median of finite values; replaces NaN.
    pub nan: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSanitization {
    pub column: String,
    pub pos_inf: usize,
    pub neg_inf: usize,
    pub nan: usize,
}

/// Everything preprocessing did, sufficient to replay it on other records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_rows: usize,
    pub input_columns: usize,
    pub malformed_cells: usize,
    pub dropped: Vec<DroppedColumn>,
    /// Only columns where at least one value was replaced.
    pub sanitized: Vec<ColumnSanitization>,
    pub fills: Vec<ColumnFill>,
    pub kept: Vec<String>,
    pub scaling: MinMaxScaler,
}

impl Provenance {
    /// Applies the recorded column selection, fills and scaling to `table`.
    pub fn apply(&self, table: &FlowTable) -> Result<Dataset> {
        let idx: Vec<usize> = self
            .kept
            .iter()
            .map(|c| {
                table
                    .column_index(c)
                    .ok_or_else(|| Error::Schema(format!("column {c:?} missing")))
            })
            .collect::<Result<_>>()?;
        let mut values = Array2::zeros((table.len(), idx.len()));
        for (r, record) in table.records.iter().enumerate() {
            for (j, (&c, fill)) in idx.iter().zip(&self.fills).enumerate() {
                values[[r, j]] = replace_non_finite(record.values[c], fill);
            }
        }
        Ok(Dataset {
            features: FeatureMatrix {
                columns: self.kept.clone(),
                values: self.scaling.transform(&values),
                scaling: self.scaling.clone(),
            },
            labels: table.labels(),
        })
    }

    pub fn count_dropped(&self, reason: DropReason) -> usize {
        self.dropped.iter().filter(|d| d.reason == reason).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub dataset: Dataset,
    pub provenance: Provenance,
}

fn replace_non_finite(v: f64, fill: &ColumnFill) -> f64 {
    if v.is_nan() {
        fill.nan
    } else if v == f64::INFINITY {
        fill.pos_inf
    } else if v == f64::NEG_INFINITY {
        fill.neg_inf
    } else {
        v
    }
}

fn median(mut finite: Vec<f64>) -> f64 {
    let n = finite.len();
    let mid = n / 2;
    let (_, &mut upper, _) = finite.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = finite[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lower + upper) / 2.0
    }
}

/// Drops identifier and single-valued columns, replaces non-finite values and
/// min-max scales every remaining column to `[0, 1]`.
pub fn preprocess(table: &FlowTable) -> Result<Preprocessed> {
    if table.is_empty() {
        return Err(Error::Precondition("no records to preprocess".into()));
    }
    let identifiers: BTreeSet<&str> = IDENTIFIER_COLUMNS.into_iter().collect();
    let constants: BTreeSet<&str> = CONSTANT_COLUMNS.into_iter().collect();

    let mut dropped = Vec::new();
    for name in &table.text_columns {
        let reason = if identifiers.contains(name.as_str()) {
            DropReason::Identifier
        } else {
            DropReason::NonNumeric
        };
        dropped.push(DroppedColumn {
            column: name.clone(),
            reason,
        });
    }

    let mut kept = Vec::new();
    let mut fills = Vec::new();
    let mut sanitized = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (c, name) in table.columns.iter().enumerate() {
        let named_reason = if identifiers.contains(name.as_str()) {
            Some(DropReason::Identifier)
        } else if constants.contains(name.as_str()) {
            Some(DropReason::ListedConstant)
        } else {
            None
        };
        if let Some(reason) = named_reason {
            dropped.push(DroppedColumn {
                column: name.clone(),
                reason,
            });
            continue;
        }

        let raw: Vec<f64> = table.records.iter().map(|r| r.values[c]).collect();
        let finite: Vec<f64> = raw.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            dropped.push(DroppedColumn {
                column: name.clone(),
                reason: DropReason::SingleValued,
            });
            continue;
        }
        let fill = ColumnFill {
            column: name.clone(),
            pos_inf: finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            neg_inf: finite.iter().copied().fold(f64::INFINITY, f64::min),
            nan: median(finite),
        };
        let mut counts = ColumnSanitization {
            column: name.clone(),
            pos_inf: 0,
            neg_inf: 0,
            nan: 0,
        };
        let clean: Vec<f64> = raw
            .iter()
            .map(|&v| {
                if v.is_nan() {
                    counts.nan += 1;
                } else if v == f64::INFINITY {
                    counts.pos_inf += 1;
                } else if v == f64::NEG_INFINITY {
                    counts.neg_inf += 1;
                }
                replace_non_finite(v, &fill)
            })
            .collect();
        if clean.iter().all(|&v| v == clean[0]) {
            dropped.push(DroppedColumn {
                column: name.clone(),
                reason: DropReason::SingleValued,
            });
            continue;
        }
        if counts.nan + counts.pos_inf + counts.neg_inf > 0 {
            sanitized.push(counts);
        }
        kept.push(name.clone());
        fills.push(fill);
        columns.push(clean);
    }

    if kept.is_empty() {
        return Err(Error::EmptyFeatureSpace);
    }

    let n = table.len();
    let raw = Array2::from_shape_fn((n, kept.len()), |(r, j)| columns[j][r]);
    let scaling = MinMaxScaler::fit(&raw);
    let values = scaling.transform(&raw);

    let provenance = Provenance {
        input_rows: n,
        input_columns: table.columns.len() + table.text_columns.len(),
        malformed_cells: table.malformed.len(),
        dropped,
        sanitized,
        fills,
        kept: kept.clone(),
        scaling: scaling.clone(),
    };
    Ok(Preprocessed {
        dataset: Dataset {
            features: FeatureMatrix {
                columns: kept,
                values,
                scaling,
            },
            labels: table.labels(),
        },
        provenance,
    })
}
