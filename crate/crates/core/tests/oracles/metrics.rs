//! Per-class counts and every aggregate, straight from the definitions.

pub struct Oracle {
    pub accuracy_plain: f64,
    pub accuracy_ovr: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro_harmonic: f64,
    pub f1_macro_mean: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted_harmonic: f64,
    pub f1_weighted_mean: f64,
}

fn div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

pub fn evaluate(rows: &[Vec<u64>]) -> Oracle {
    let k = rows.len();
    let n: f64 = rows.iter().flatten().map(|&c| c as f64).sum();
    let mut tp = vec![0.0; k];
    let mut fp = vec![0.0; k];
    let mut fn_ = vec![0.0; k];
    let mut support = vec![0.0; k];
    for t in 0..k {
        for p in 0..k {
            let c = rows[t][p] as f64;
            support[t] += c;
            if t == p {
                tp[t] += c;
            } else {
                fp[p] += c;
                fn_[t] += c;
            }
        }
    }
    let tn: Vec<f64> = (0..k).map(|i| n - tp[i] - fp[i] - fn_[i]).collect();
    let precision: Vec<f64> = (0..k).map(|i| div(tp[i], tp[i] + fp[i])).collect();
    let recall: Vec<f64> = (0..k).map(|i| div(tp[i], tp[i] + fn_[i])).collect();
    let f1: Vec<f64> = (0..k).map(|i| div(2.0 * precision[i] * recall[i], precision[i] + recall[i])).collect();
    let kf = k as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / kf;
    let wmean = |v: &[f64]| v.iter().zip(&support).map(|(a, s)| a * s).sum::<f64>() / n;
    let pm = mean(&precision);
    let rm = mean(&recall);
    let pw = wmean(&precision);
    let rw = wmean(&recall);
    Oracle {
        accuracy_plain: tp.iter().sum::<f64>() / n,
        accuracy_ovr: (0..k).map(|i| (tp[i] + tn[i]) / n).sum::<f64>() / kf,
        f1_macro_harmonic: div(2.0 * pm * rm, pm + rm),
        f1_macro_mean: mean(&f1),
        f1_weighted_harmonic: div(2.0 * pw * rw, pw + rw),
        f1_weighted_mean: wmean(&f1),
        precision_macro: pm,
        recall_macro: rm,
        precision_weighted: pw,
        recall_weighted: rw,
        precision,
        recall,
        f1,
    }
}
