use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::iotid20::{self, CONSTANT_COLUMNS};
use super::{check_hierarchy, FlowRecord, FlowTable, HierLabel};
use crate::{Error, Result};

/// One synthetic class: its labels, share of the records and per-feature Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthClass {
    pub label: HierLabel,
    pub proportion: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub features: Vec<String>,
    pub classes: Vec<SynthClass>,
    /// Extra columns written with a fixed value in every record.
    pub constant_columns: Vec<(String, f64)>,
    /// Extra columns filled with uniform random integers in `[lo, hi]`.
    pub identifier_columns: Vec<(String, u32, u32)>,
}

/// Informative columns of the IoTID20-like generator.
const SYNTH_FEATURES: [&str; 12] = [
    "Flow_Duration",
    "Tot_Fwd_Pkts",
    "Tot_Bwd_Pkts",
    "TotLen_Fwd_Pkts",
    "TotLen_Bwd_Pkts",
    "Fwd_Pkt_Len_Max",
    "Fwd_Pkt_Len_Mean",
    "Bwd_Pkt_Len_Max",
    "Flow_IAT_Mean",
    "Flow_IAT_Max",
    "ACK_Flag_Cnt",
    "Pkt_Size_Avg",
];

impl SynthSpec {
    /// Nine IoTID20 subcategories with the published class proportions.
    ///
    /// Class `c` has mean `separation` on feature `c` and 0 elsewhere, all with
    /// unit variance; the last three features carry no class signal. The
    /// output also has numeric identifier columns and the listed constant
    /// columns so preprocessing has work to do.
    pub fn iotid20_like(separation: f64) -> Self {
        let features: Vec<String> = SYNTH_FEATURES.iter().map(|s| s.to_string()).collect();
        let d = features.len();
        let classes = iotid20::CLASSES
            .iter()
            .enumerate()
            .map(|(c, (b, cat, sub, count))| SynthClass {
                label: HierLabel::new(b, cat, sub),
                proportion: *count as f64 / iotid20::TOTAL_RECORDS as f64,
                means: (0..d).map(|j| if j == c { separation } else { 0.0 }).collect(),
                stds: vec![1.0; d],
            })
            .collect();
        SynthSpec {
            features,
            classes,
            constant_columns: CONSTANT_COLUMNS.iter().map(|c| (c.to_string(), 0.0)).collect(),
            identifier_columns: vec![
                ("Dst_Port".into(), 1, 65_535),
                ("Protocol".into(), 0, 17),
            ],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::Precondition("no synthetic classes".into()));
        }
        let total: f64 = self.classes.iter().map(|c| c.proportion).sum();
        if (total - 1.0).abs() > 1e-9 || self.classes.iter().any(|c| c.proportion.is_nan() || c.proportion < 0.0) {
            return Err(Error::Precondition(format!(
                "class proportions must be nonnegative and sum to 1 (got {total})"
            )));
        }
        let d = self.features.len();
        for c in &self.classes {
            if c.means.len() != d || c.stds.len() != d {
                return Err(Error::Dimension(format!(
                    "class {} has {} means / {} stds for {d} features",
                    c.label.subcategory,
                    c.means.len(),
                    c.stds.len()
                )));
            }
            if c.stds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
                return Err(Error::Precondition("standard deviations must be finite and >= 0".into()));
            }
        }
        let labels: Vec<HierLabel> = self.classes.iter().map(|c| c.label.clone()).collect();
        check_hierarchy(&labels)
    }
}

/// Largest-remainder split of `n` by real-valued proportions.
fn class_counts(proportions: &[f64], n: usize) -> Vec<usize> {
    let quotas: Vec<f64> = proportions.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Draws `n` labelled records from `spec`; rows are shuffled so classes interleave.
pub fn synth_generate(spec: &SynthSpec, n: usize, seed: u64) -> Result<FlowTable> {
    spec.validate()?;
    let proportions: Vec<f64> = spec.classes.iter().map(|c| c.proportion).collect();
    let counts = class_counts(&proportions, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut columns: Vec<String> = spec.identifier_columns.iter().map(|c| c.0.clone()).collect();
    columns.extend(spec.features.iter().cloned());
    columns.extend(spec.constant_columns.iter().map(|c| c.0.clone()));

    let mut records = Vec::with_capacity(n);
    for (class, &count) in spec.classes.iter().zip(&counts) {
        let dists: Vec<Normal<f64>> = class
            .means
            .iter()
            .zip(&class.stds)
            .map(|(&m, &s)| Normal::new(m, s).expect("validated std"))
            .collect();
        for _ in 0..count {
            let mut values = Vec::with_capacity(columns.len());
            for &(_, lo, hi) in &spec.identifier_columns {
                values.push(f64::from(rng.gen_range(lo..=hi)));
            }
            values.extend(dists.iter().map(|d| d.sample(&mut rng)));
            values.extend(spec.constant_columns.iter().map(|c| c.1));
            records.push(FlowRecord {
                values,
                label: class.label.clone(),
            });
        }
    }
    records.shuffle(&mut rng);

    Ok(FlowTable {
        columns,
        records,
        text_columns: Vec::new(),
        malformed: Vec::new(),
    })
}
