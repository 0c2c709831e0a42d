//! Confusion matrices and precision / recall / F1 reports.
//!
//! Per-class scores use a one-vs-rest reduction of the confusion matrix.
//! Macro averages are unweighted means over classes; weighted averages weight
//! each class by its support. Two F1 aggregates are reported for each: the
//! harmonic mean of the averaged precision and recall, and the average of the
//! per-class F1 scores.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `counts[t * k + p]` is the number of samples of true class `t` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k() + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k()).map(|i| self.get(i, i)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.k().max(1)).map(<[u64]>::to_vec).collect()
    }

    pub fn from_rows(classes: Vec<String>, rows: &[Vec<u64>]) -> Result<Self> {
        let k = classes.len();
        if rows.len() != k || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension(format!("confusion rows must be {k}x{k}")));
        }
        Ok(ConfusionMatrix {
            classes,
            counts: rows.concat(),
        })
    }
}

/// Tallies predictions against ground truth.
pub fn confusion(preds: &[usize], truth: &[usize], classes: &[String]) -> Result<ConfusionMatrix> {
    let k = classes.len();
    if preds.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            preds.len(),
            truth.len()
        )));
    }
    let mut counts = vec![0u64; k * k];
    for (&p, &t) in preds.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(Error::Precondition(format!(
                "class index out of range (pred {p}, truth {t}, k {k})"
            )));
        }
        counts[t * k + p] += 1;
    }
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// No predictions of this class: precision is 0/0, reported as 0.
    pub precision_undefined: bool,
    /// No true samples of this class: recall is 0/0, reported as 0.
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// `trace / total`.
    pub accuracy_plain: f64,
    /// Mean over classes of one-vs-rest accuracy `(TP + TN) / total`.
    pub accuracy_eq3: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    /// Harmonic mean of macro precision and macro recall.
    #[serde(rename = "f1_macro_eq8")]
    pub f1_macro_harmonic: f64,
    /// Unweighted mean of per-class F1.
    #[serde(rename = "f1_macro_std")]
    pub f1_macro_mean: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    /// Harmonic mean of weighted precision and weighted recall.
    #[serde(rename = "f1_weighted_eq9")]
    pub f1_weighted_harmonic: f64,
    /// Support-weighted mean of per-class F1.
    #[serde(rename = "f1_weighted_std")]
    pub f1_weighted_mean: f64,
    pub total: u64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Computes every score from a confusion matrix.
pub fn report(cm: &ConfusionMatrix) -> Result<ClassificationReport> {
    let k = cm.k();
    let total = cm.total();
    if k == 0 || total == 0 {
        return Err(Error::Precondition("empty confusion matrix".into()));
    }
    let n = total as f64;
    let mut per_class = Vec::with_capacity(k);
    let mut accuracy_sum = 0.0;
    for i in 0..k {
        let tp = cm.get(i, i);
        let predicted: u64 = (0..k).map(|t| cm.get(t, i)).sum();
        let support: u64 = (0..k).map(|p| cm.get(i, p)).sum();
        let fp = predicted - tp;
        let fn_ = support - tp;
        let tn = total - tp - fp - fn_;
        accuracy_sum += (tp + tn) as f64 / n;
        let (precision, precision_undefined) = ratio(tp, predicted);
        let (recall, recall_undefined) = ratio(tp, support);
        per_class.push(ClassMetrics {
            class: cm.classes[i].clone(),
            precision,
            recall,
            f1: harmonic(precision, recall),
            support,
            precision_undefined,
            recall_undefined,
        });
    }

    let kf = k as f64;
    let macro_of = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / kf;
    let weighted_of =
        |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / n;

    let precision_macro = macro_of(|c| c.precision);
    let recall_macro = macro_of(|c| c.recall);
    let precision_weighted = weighted_of(|c| c.precision);
    // Support cancels: Σ (TP_i / s_i)(s_i / n) = trace / n, computed exactly.
    let recall_weighted = cm.trace() as f64 / n;

    Ok(ClassificationReport {
        accuracy_plain: cm.trace() as f64 / n,
        accuracy_eq3: accuracy_sum / kf,
        precision_macro,
        recall_macro,
        f1_macro_harmonic: harmonic(precision_macro, recall_macro),
        f1_macro_mean: macro_of(|c| c.f1),
        precision_weighted,
        recall_weighted,
        f1_weighted_harmonic: harmonic(precision_weighted, recall_weighted),
        f1_weighted_mean: weighted_of(|c| c.f1),
        total,
        per_class,
        confusion: cm.clone(),
    })
}

impl ClassificationReport {
    pub fn has_undefined(&self) -> bool {
        self.per_class
            .iter()
            .any(|c| c.precision_undefined || c.recall_undefined)
    }

    /// Text table: accuracy header, then Macro, Weighted and one row per class.
    pub fn to_table(&self, source: &str) -> String {
        let width = self
            .per_class
            .iter()
            .map(|c| c.class.len())
            .max()
            .unwrap_or(0)
            .max(8);
        let mut out = String::new();
        let _ = writeln!(out, "Source : {source}");
        let _ = writeln!(out, "Accuracy : {:.6}", self.accuracy_plain);
        let _ = writeln!(out, "Accuracy (mean one-vs-rest) : {:.6}", self.accuracy_eq3);
        let _ = writeln!(
            out,
            "{:width$}  {:>9}  {:>9}  {:>9}  {:>9}  {:>8}",
            "", "Precision", "Recall", "f1-score", "f1-hmean", "Support"
        );
        let mut row = |name: &str, p: f64, r: f64, f1: f64, h: Option<f64>, s: u64| {
            let h = h.map_or_else(|| format!("{:>9}", ""), |h| format!("{h:>9.6}"));
            let _ = writeln!(out, "{name:width$}  {p:>9.6}  {r:>9.6}  {f1:>9.6}  {h}  {s:>8}");
        };
        row(
            "Macro",
            self.precision_macro,
            self.recall_macro,
            self.f1_macro_mean,
            Some(self.f1_macro_harmonic),
            self.total,
        );
        row(
            "Weighted",
            self.precision_weighted,
            self.recall_weighted,
            self.f1_weighted_mean,
            Some(self.f1_weighted_harmonic),
            self.total,
        );
        for c in &self.per_class {
            row(&c.class, c.precision, c.recall, c.f1, None, c.support);
        }
        out
    }

    /// CSV with header `row,precision,recall,f1,f1_harmonic,support`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,precision,recall,f1,f1_harmonic,support\n");
        let _ = writeln!(
            out,
            "Macro,{},{},{},{},{}",
            self.precision_macro, self.recall_macro, self.f1_macro_mean, self.f1_macro_harmonic, self.total
        );
        let _ = writeln!(
            out,
            "Weighted,{},{},{},{},{}",
            self.precision_weighted,
            self.recall_weighted,
            self.f1_weighted_mean,
            self.f1_weighted_harmonic,
            self.total
        );
        for c in &self.per_class {
            let _ = writeln!(out, "\"{}\",{},{},{},,{}", c.class, c.precision, c.recall, c.f1, c.support);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn hand_counted_matrix() {
        let cm = confusion(&[0, 1, 1], &[0, 0, 1], &names(2)).unwrap();
        assert_eq!(cm.rows(), vec![vec![1, 1], vec![0, 1]]);
    }

    #[test]
    fn perfect_predictions_are_diagonal_and_score_one() {
        let truth = [0, 1, 2, 2, 1, 0, 0];
        let cm = confusion(&truth, &truth, &names(3)).unwrap();
        for t in 0..3 {
            for p in 0..3 {
                if t != p {
                    assert_eq!(cm.get(t, p), 0);
                }
            }
        }
        let r = report(&cm).unwrap();
        for v in [
            r.accuracy_plain,
            r.accuracy_eq3,
            r.precision_macro,
            r.recall_macro,
            r.f1_macro_harmonic,
            r.f1_macro_mean,
            r.precision_weighted,
            r.recall_weighted,
            r.f1_weighted_harmonic,
            r.f1_weighted_mean,
        ] {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn tally_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = 4;
        let preds: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..k)).collect();
        let truth: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..k)).collect();
        let cm = confusion(&preds, &truth, &names(k)).unwrap();
        for t in 0..k {
            for p in 0..k {
                let oracle = preds
                    .iter()
                    .zip(&truth)
                    .filter(|(&pp, &tt)| pp == p && tt == t)
                    .count() as u64;
                assert_eq!(cm.get(t, p), oracle);
            }
        }
    }

    /// Binary `[[50, 10], [5, 35]]` evaluated by hand.
    #[test]
    fn binary_formula_oracle() {
        let cm = ConfusionMatrix::from_rows(names(2), &[vec![50, 10], vec![5, 35]]).unwrap();
        let r = report(&cm).unwrap();
        let (p0, r0) = (50.0 / 55.0, 50.0 / 60.0);
        let (p1, r1) = (35.0 / 45.0, 35.0 / 40.0);
        let f0 = 2.0 * p0 * r0 / (p0 + r0);
        let f1 = 2.0 * p1 * r1 / (p1 + r1);
        let close = |a: f64, b: f64| assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        close(r.accuracy_plain, 0.85);
        close(r.accuracy_eq3, 0.85);
        close(r.precision_macro, (p0 + p1) / 2.0);
        close(r.recall_macro, (r0 + r1) / 2.0);
        let (pm, rm) = ((p0 + p1) / 2.0, (r0 + r1) / 2.0);
        close(r.f1_macro_harmonic, 2.0 * pm * rm / (pm + rm));
        close(r.f1_macro_mean, (f0 + f1) / 2.0);
        let (pw, rw) = ((p0 * 60.0 + p1 * 40.0) / 100.0, (r0 * 60.0 + r1 * 40.0) / 100.0);
        close(r.precision_weighted, pw);
        close(r.recall_weighted, rw);
        close(r.f1_weighted_harmonic, 2.0 * pw * rw / (pw + rw));
        close(r.f1_weighted_mean, (f0 * 60.0 + f1 * 40.0) / 100.0);
    }

    #[test]
    fn zero_division_is_flagged() {
        // Class 2 is never predicted and never true.
        let cm = confusion(&[0, 1, 0], &[0, 1, 1], &names(3)).unwrap();
        let r = report(&cm).unwrap();
        assert!(r.per_class[2].precision_undefined && r.per_class[2].recall_undefined);
        assert_eq!(r.per_class[2].f1, 0.0);
        assert!(r.has_undefined());
    }

    #[test]
    fn empty_matrix_is_rejected() {
        let cm = confusion(&[], &[], &names(2)).unwrap();
        assert!(matches!(report(&cm), Err(Error::Precondition(_))));
    }

    #[test]
    fn out_of_range_index_rejected() {
        assert!(confusion(&[2], &[0], &names(2)).is_err());
        assert!(confusion(&[0, 1], &[0], &names(2)).is_err());
    }

    #[test]
    fn equal_supports_make_macro_equal_weighted() {
        let cm = ConfusionMatrix::from_rows(
            names(3),
            &[vec![8, 1, 1], vec![2, 7, 1], vec![0, 3, 7]],
        )
        .unwrap();
        let r = report(&cm).unwrap();
        assert!((r.precision_macro - r.precision_weighted).abs() < 1e-15);
        assert!((r.recall_macro - r.recall_weighted).abs() < 1e-15);
        assert!((r.f1_macro_mean - r.f1_weighted_mean).abs() < 1e-15);
    }

    #[test]
    fn class_permutation_keeps_aggregates() {
        let rows = [vec![30, 2, 5], vec![4, 12, 0], vec![1, 6, 40]];
        let a = report(&ConfusionMatrix::from_rows(names(3), &rows).unwrap()).unwrap();
        let perm = [2, 0, 1];
        let permuted: Vec<Vec<u64>> = perm
            .iter()
            .map(|&t| perm.iter().map(|&p| rows[t][p]).collect())
            .collect();
        let b = report(&ConfusionMatrix::from_rows(names(3), &permuted).unwrap()).unwrap();
        for (x, y) in [
            (a.precision_macro, b.precision_macro),
            (a.recall_weighted, b.recall_weighted),
            (a.f1_macro_mean, b.f1_macro_mean),
            (a.f1_weighted_harmonic, b.f1_weighted_harmonic),
            (a.accuracy_eq3, b.accuracy_eq3),
        ] {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(a.per_class[2].f1, b.per_class[0].f1);
    }

    #[test]
    fn table_layout_rows() {
        let cm = ConfusionMatrix::from_rows(
            vec!["Anomaly".into(), "Normal".into()],
            &[vec![90, 3], vec![2, 5]],
        )
        .unwrap();
        let text = report(&cm).unwrap().to_table("Subset Dataset");
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].contains("Subset Dataset"));
        assert!(lines[4].starts_with("Macro"));
        assert!(lines[5].starts_with("Weighted"));
        assert!(lines[6].starts_with("Anomaly"));
        assert!(lines[7].starts_with("Normal"));
        let json = serde_json::to_string(&report(&cm).unwrap()).unwrap();
        assert!(json.contains("\"f1_weighted_eq9\"") && json.contains("\"f1_weighted_std\""));
    }
}
