//! Labeled pairs under stratified cross-validation.

use log::warn;
use rayon::prelude::*;

use super::folds::stratified_folds;
use super::report::{Evaluation, Summary};
use super::{check_rows, LabeledPairSet};
use crate::classifier::{CalibratedModel, Hyperparams};
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::seed;

/// Predicts every pair with the model of the fold that held it out and
/// reports accuracy, per-class precision and recall, the confusion matrix,
/// and the majority-class baseline.
///
/// `data` must hold the set's pairs in order.
pub fn eval_labeled_pairs(
    set: &LabeledPairSet,
    data: &Dataset,
    hp: &Hyperparams,
    n_folds: usize,
    seed: u64,
) -> Result<Evaluation> {
    check_rows(data, set.pairs().iter().map(|(p, _)| p))?;
    let classes = set.labels();
    let labels: Vec<String> = set.pairs().iter().map(|(_, l)| l.clone()).collect();
    let truth: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label is in class list"))
        .collect();
    let mut counts = vec![0usize; classes.len()];
    for &t in &truth {
        counts[t] += 1;
    }
    // Stratified dealing spreads a class of two or more items over distinct
    // folds, so every training split sees every class. A singleton class
    // cannot be both trained on and tested.
    if let Some(k) = counts.iter().position(|&c| c < 2) {
        return Err(Error::Training(format!(
            "class {:?} has a single pair; cross-validation needs at least two",
            classes[k]
        )));
    }
    let folds = stratified_folds(&labels, n_folds, seed::derive(seed, "folds"))?;

    let fold_results: Vec<(Vec<(usize, usize)>, CalibratedModel)> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train: Vec<usize> = (0..labels.len()).filter(|i| test.binary_search(i).is_err()).collect();
            let train_labels: Vec<String> = train.iter().map(|&i| labels[i].clone()).collect();
            let hp_f = Hyperparams {
                seed: seed::derive(seed, &format!("fold {f}")),
                ..*hp
            };
            let model = CalibratedModel::fit(data, &train, &train_labels, &hp_f)?;
            let preds = test
                .iter()
                .map(|&i| {
                    let k = model.predict(&data.rows[i].vector)?;
                    let global = classes.binary_search(&model.classes()[k]).expect("known class");
                    Ok((i, global))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((preds, model))
        })
        .collect::<Result<_>>()?;

    let mut predicted = vec![0usize; labels.len()];
    let mut models = Vec::new();
    for (f, (preds, model)) in fold_results.into_iter().enumerate() {
        for (i, k) in preds {
            predicted[i] = k;
        }
        models.push((format!("fold{f}"), model));
    }

    let n = classes.len();
    let mut confusion = vec![vec![0usize; n]; n];
    for (&t, &p) in truth.iter().zip(&predicted) {
        confusion[t][p] += 1;
    }
    let correct: usize = (0..n).map(|k| confusion[k][k]).sum();
    let mut summary = Summary::new("labeled", seed, hp);
    summary.folds = Some(n_folds);
    summary.baseline = *counts.iter().max().unwrap() as f64 / labels.len() as f64;
    summary.precision = (0..n)
        .map(|k| {
            let col: usize = (0..n).map(|t| confusion[t][k]).sum();
            (col > 0).then(|| confusion[k][k] as f64 / col as f64)
        })
        .collect();
    summary.recall = (0..n)
        .map(|k| (counts[k] > 0).then(|| confusion[k][k] as f64 / counts[k] as f64))
        .collect();
    summary.confusion = confusion;
    summary.classes = classes.clone();
    summary.zero_vectors = data.zero_rows();
    if summary.zero_vectors > 0 {
        warn!("{} pair vectors are all zero", summary.zero_vectors);
    }
    summary.set_counts(labels.len(), correct);

    let mut details = vec!["item\tpair\tlabel\tpredicted".to_string()];
    for (i, ((pair, label), &p)) in set.pairs().iter().zip(&predicted).enumerate() {
        details.push(format!("{i}\t{pair}\t{label}\t{}", classes[p]));
    }
    Ok(Evaluation {
        summary,
        details,
        models,
    })
}
