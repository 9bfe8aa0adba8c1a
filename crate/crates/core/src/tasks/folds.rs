use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

/// Random partition of `0..n_items` into `n_folds` test folds whose sizes
/// differ by at most one. Each fold is sorted.
pub fn crossval_folds(n_items: usize, n_folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    check(n_items, n_folds)?;
    let mut order: Vec<usize> = (0..n_items).collect();
    order.shuffle(&mut seed::rng(seed));
    Ok(deal(order.into_iter(), n_folds))
}

/// Like [`crossval_folds`], but each label is shuffled separately and dealt
/// round-robin with a counter that carries over between labels, so class
/// proportions match across folds and fold sizes still differ by at most
/// one.
pub fn stratified_folds<S: AsRef<str>>(labels: &[S], n_folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    check(labels.len(), n_folds)?;
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_label.entry(l.as_ref()).or_default().push(i);
    }
    let mut rng = seed::rng(seed);
    let mut order = Vec::with_capacity(labels.len());
    for items in by_label.values_mut() {
        items.shuffle(&mut rng);
        order.extend_from_slice(items);
    }
    Ok(deal(order.into_iter(), n_folds))
}

fn check(n_items: usize, n_folds: usize) -> Result<()> {
    if n_folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {n_folds}")));
    }
    if n_items < n_folds {
        return Err(Error::InvalidArgument(format!(
            "{n_items} items cannot fill {n_folds} folds"
        )));
    }
    Ok(())
}

fn deal(order: impl Iterator<Item = usize>, n_folds: usize) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); n_folds];
    for (k, i) in order.enumerate() {
        folds[k % n_folds].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sizes() {
        assert!(crossval_folds(320, 10, 1).unwrap().iter().all(|f| f.len() == 32));
        assert!(crossval_folds(10, 10, 1).unwrap().iter().all(|f| f.len() == 1));
    }

    #[test]
    fn partition_laws_across_seeds() {
        for seed in 0..100 {
            let n = 37 + seed as usize;
            let folds = crossval_folds(n, 10, seed).unwrap();
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn bad_sizes() {
        assert!(crossval_folds(5, 10, 0).is_err());
        assert!(crossval_folds(5, 1, 0).is_err());
    }

    #[test]
    fn stratified_balance() {
        let labels: Vec<&str> = (0..130).map(|i| if i % 3 == 0 { "a" } else { "b" }).collect();
        let folds = stratified_folds(&labels, 10, 4).unwrap();
        let mut all = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..130).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.len(), 13);
            let a = f.iter().filter(|&&i| labels[i] == "a").count();
            assert!((4..=5).contains(&a));
        }
    }
}
