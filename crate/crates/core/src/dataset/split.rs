use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, Level};
use crate::{Error, Result};

/// Splits `target` across classes in proportion to `counts` by largest remainder.
///
/// Every class receives its exact quota `counts[c] * target / total` rounded
/// up or down, so it is within one record of proportional. Ties in the
/// remainder go to the earlier class.
pub fn allocate(counts: &[usize], target: usize) -> Vec<usize> {
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let mut alloc = Vec::with_capacity(counts.len());
    let mut remainders = Vec::with_capacity(counts.len());
    for (i, &c) in counts.iter().enumerate() {
        let scaled = c as u128 * target as u128;
        alloc.push((scaled / total) as usize);
        remainders.push((scaled % total, i));
    }
    let assigned: usize = alloc.iter().sum();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(target - assigned) {
        alloc[i] += 1;
    }
    alloc
}

/// Draws `n` row indices with per-class counts from [`allocate`].
///
/// The returned indices are in ascending row order.
pub fn stratified_indices(labels: &[&str], n: usize, seed: u64) -> Result<Vec<usize>> {
    if n > labels.len() {
        return Err(Error::Precondition(format!(
            "requested {n} rows from {}",
            labels.len()
        )));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let counts: Vec<usize> = by_class.values().map(Vec::len).collect();
    let alloc = allocate(&counts, n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(n);
    for (rows, take) in by_class.into_values().zip(alloc) {
        let mut rows = rows;
        rows.shuffle(&mut rng);
        chosen.extend_from_slice(&rows[..take]);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// A stratified sample of `n` rows, stratified on the labels at `level`.
pub fn stratified_subset(data: &Dataset, n: usize, level: Level, seed: u64) -> Result<Dataset> {
    let idx = stratified_indices(&data.labels_at(level), n, seed)?;
    Ok(data.select(&idx))
}

/// Stratified `(train, test)` split with `round(test_fraction * n)` test rows.
pub fn stratified_split(
    data: &Dataset,
    test_fraction: f64,
    level: Level,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let (train_idx, test_idx) = split_indices(&data.labels_at(level), test_fraction, seed)?;
    Ok((data.select(&train_idx), data.select(&test_idx)))
}

/// Row indices behind [`stratified_split`], each list ascending.
pub fn split_indices(labels: &[&str], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Precondition(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let n_test = (test_fraction * labels.len() as f64).round() as usize;
    let test_idx = stratified_indices(labels, n_test, seed)?;
    let mut in_test = vec![false; labels.len()];
    for &i in &test_idx {
        in_test[i] = true;
    }
    let train_idx = (0..labels.len()).filter(|&i| !in_test[i]).collect();
    Ok((train_idx, test_idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{iotid20, FeatureMatrix, HierLabel, MinMaxScaler};
    use ndarray::Array2;
    use proptest::prelude::*;

    fn iotid20_counts() -> Vec<usize> {
        iotid20::CLASSES.iter().map(|c| c.3).collect()
    }

    fn dataset(labels: &[&str]) -> Dataset {
        let n = labels.len();
        Dataset {
            features: FeatureMatrix {
                columns: vec!["row".into()],
                values: Array2::from_shape_fn((n, 1), |(r, _)| r as f64),
                scaling: MinMaxScaler::identity(1),
            },
            labels: labels.iter().map(|l| HierLabel::new(l, l, l)).collect(),
        }
    }

    #[test]
    fn iotid20_subset_normal_count() {
        let alloc = allocate(&iotid20_counts(), 10_000);
        assert_eq!(alloc.iter().sum::<usize>(), 10_000);
        // Normal is the seventh class in the table; 40,073 / 625,783 * 10,000 = 640.37.
        let normal = alloc[6];
        assert!((639..=641).contains(&normal), "{normal}");
        for (a, c) in alloc.iter().zip(iotid20_counts()) {
            let exact = c as f64 * 10_000.0 / iotid20::TOTAL_RECORDS as f64;
            assert!((*a as f64 - exact).abs() < 1.0);
        }
    }

    #[test]
    fn full_dataset_test_support() {
        let n_test = (0.25 * iotid20::TOTAL_RECORDS as f64).round() as usize;
        assert_eq!(n_test, 156_446);
        // Published full-data reports carry a support of 156,354.
        let published = 156_354.0;
        assert!((n_test as f64 - published).abs() / published < 1e-3);
    }

    #[test]
    fn whole_dataset_subset_is_identity() {
        let labels = ["a", "b", "a", "c", "b", "a"];
        let d = dataset(&labels);
        let s = stratified_subset(&d, labels.len(), Level::Binary, 3).unwrap();
        assert_eq!(s, d);
    }

    #[test]
    fn seeds_change_membership_not_counts() {
        let labels: Vec<&str> = (0..300).map(|i| ["x", "y", "z"][i % 3]).collect();
        let a = stratified_indices(&labels, 100, 1).unwrap();
        let b = stratified_indices(&labels, 100, 2).unwrap();
        assert_ne!(a, b);
        let count = |idx: &[usize], l: &str| idx.iter().filter(|&&i| labels[i] == l).count();
        for l in ["x", "y", "z"] {
            assert_eq!(count(&a, l), count(&b, l));
        }
    }

    #[test]
    fn ten_thousand_split_quarter() {
        let labels: Vec<&str> = (0..10_000).map(|i| if i % 16 == 0 { "n" } else { "a" }).collect();
        let (train, test) = stratified_split(&dataset(&labels), 0.25, Level::Binary, 0).unwrap();
        assert_eq!(test.len(), 2_500);
        assert_eq!(train.len(), 7_500);
    }

    #[test]
    fn degenerate_fractions_rejected() {
        let d = dataset(&["a", "b"]);
        for f in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(
                stratified_split(&d, f, Level::Binary, 0),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn oversized_subset_rejected() {
        assert!(stratified_indices(&["a"], 2, 0).is_err());
    }

    proptest! {
        #[test]
        fn split_is_disjoint_stratified_cover(
            raw in proptest::collection::vec(0usize..4, 4..200),
            frac in 0.05f64..0.95,
            seed in any::<u64>(),
        ) {
            let names = ["a", "b", "c", "d"];
            let labels: Vec<&str> = raw.iter().map(|&i| names[i]).collect();
            let d = dataset(&labels);
            let (train, test) = stratified_split(&d, frac, Level::Binary, seed).unwrap();
            let mut rows: Vec<usize> = train.features.values.column(0).iter()
                .chain(test.features.values.column(0).iter())
                .map(|&v| v as usize)
                .collect();
            rows.sort_unstable();
            prop_assert_eq!(rows, (0..labels.len()).collect::<Vec<_>>());
            let n_test = test.len() as f64;
            for name in names {
                let total = labels.iter().filter(|&&l| l == name).count() as f64;
                let got = test.labels.iter().filter(|l| l.binary == name).count() as f64;
                let exact = total * n_test / labels.len() as f64;
                prop_assert!((got - exact).abs() < 1.0);
            }
        }
    }
}
