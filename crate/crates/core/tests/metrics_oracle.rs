mod oracles;

use mamid_core::metrics::{report, ConfusionMatrix};
use oracles::metrics::evaluate;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn random_rows(rng: &mut ChaCha8Rng, k: usize) -> Vec<Vec<u64>> {
    loop {
        let sparse = rng.gen_bool(0.3);
        let rows: Vec<Vec<u64>> = (0..k)
            .map(|_| {
                (0..k)
                    .map(|_| if sparse && rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..500) })
                    .collect()
            })
            .collect();
        if rows.iter().flatten().any(|&c| c > 0) {
            return rows;
        }
    }
}

fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("c{i}")).collect()
}

pub fn check(rows: &[Vec<u64>]) -> Result<(), String> {
    let k = rows.len();
    let cm = ConfusionMatrix::from_rows(names(k), rows).unwrap();
    let r = report(&cm).unwrap();
    let o = evaluate(rows);
    let pairs = [
        ("accuracy", r.accuracy_plain, o.accuracy_plain),
        ("accuracy_ovr", r.accuracy_eq3, o.accuracy_ovr),
        ("precision_macro", r.precision_macro, o.precision_macro),
        ("recall_macro", r.recall_macro, o.recall_macro),
        ("f1_macro_harmonic", r.f1_macro_harmonic, o.f1_macro_harmonic),
        ("f1_macro_mean", r.f1_macro_mean, o.f1_macro_mean),
        ("precision_weighted", r.precision_weighted, o.precision_weighted),
        ("recall_weighted", r.recall_weighted, o.recall_weighted),
        ("f1_weighted_harmonic", r.f1_weighted_harmonic, o.f1_weighted_harmonic),
        ("f1_weighted_mean", r.f1_weighted_mean, o.f1_weighted_mean),
    ];
    for (name, a, b) in pairs {
        if (a - b).abs() > TOL {
            return Err(format!("{name}: {a} vs {b}"));
        }
    }
    for (i, c) in r.per_class.iter().enumerate() {
        if (c.precision - o.precision[i]).abs() > TOL
            || (c.recall - o.recall[i]).abs() > TOL
            || (c.f1 - o.f1[i]).abs() > TOL
        {
            return Err(format!("class {i} differs"));
        }
    }
    if r.recall_weighted != cm.trace() as f64 / cm.total() as f64 {
        return Err("weighted recall is not trace/total".into());
    }
    Ok(())
}

#[test]
fn two_hundred_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for i in 0..200 {
        let k = [2, 5, 9][i % 3];
        let rows = random_rows(&mut rng, k);
        check(&rows).unwrap_or_else(|e| panic!("matrix {i} (k={k}): {e}"));
    }
}

proptest! {
    #[test]
    fn scores_are_probabilities(rows in (2usize..6).prop_flat_map(|k| prop::collection::vec(prop::collection::vec(0u64..50, k), k))) {
        prop_assume!(rows.iter().flatten().any(|&c| c > 0));
        let r = report(&ConfusionMatrix::from_rows(names(rows.len()), &rows).unwrap()).unwrap();
        for v in [r.accuracy_plain, r.accuracy_eq3, r.precision_macro, r.recall_macro, r.f1_macro_harmonic,
                  r.f1_macro_mean, r.precision_weighted, r.recall_weighted, r.f1_weighted_harmonic, r.f1_weighted_mean] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(check(&rows).is_ok());
    }
}
