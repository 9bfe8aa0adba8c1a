//! Analogy questions by bagged one-positive, one-negative training.
//!
//! Each round trains on the stem as a positive example and the stem of a
//! randomly chosen other question as a negative, then scores every choice
//! by its probability of being positive. Scores are averaged over rounds.

use log::{info, warn};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::report::{Evaluation, Summary};
use super::{lookup, row_index, SatQuestion, NEGATIVE, POSITIVE};
use crate::classifier::{argmax, CalibratedModel, Hyperparams};
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::pair::WordPair;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SatAnswer {
    pub index: usize,
    /// Averaged positive probability of each choice.
    pub probabilities: Vec<f64>,
    /// More than one choice shared the top probability.
    pub tie: bool,
    /// All five choices had the same probability.
    pub degenerate: bool,
}

/// Answers one question. `pool` holds candidate negative stems; `q`'s own
/// stem is never drawn. Negatives are drawn without replacement unless the
/// pool has fewer than `rounds` stems.
pub fn answer_sat(
    q: &SatQuestion,
    pool: &[WordPair],
    data: &Dataset,
    hp: &Hyperparams,
    rounds: usize,
    seed: u64,
) -> Result<(SatAnswer, Vec<CalibratedModel>)> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("bagging rounds must be positive".into()));
    }
    let pool: Vec<&WordPair> = pool.iter().filter(|p| **p != q.stem).collect();
    if pool.is_empty() {
        return Err(Error::InvalidArgument(format!("{}: no negative stems available", q.stem)));
    }
    let mut rng = seed::rng(seed);
    let negatives: Vec<&WordPair> = if pool.len() >= rounds {
        sample(&mut rng, pool.len(), rounds).into_iter().map(|i| pool[i]).collect()
    } else {
        warn!(
            "{}: only {} negative stems for {rounds} rounds, sampling with replacement",
            q.stem,
            pool.len()
        );
        (0..rounds).map(|_| pool[rng.gen_range(0..pool.len())]).collect()
    };

    let rows = row_index(data);
    let stem_row = lookup(&rows, &q.stem)?;
    let choice_rows: Vec<usize> = q.choices.iter().map(|c| lookup(&rows, c)).collect::<Result<_>>()?;
    let labels = [POSITIVE.to_string(), NEGATIVE.to_string()];

    let per_round: Vec<(Vec<f64>, CalibratedModel)> = negatives
        .par_iter()
        .enumerate()
        .map(|(r, neg)| {
            let hp_r = Hyperparams {
                seed: seed::derive(seed, &format!("round {r}")),
                ..*hp
            };
            let model = CalibratedModel::fit(data, &[stem_row, lookup(&rows, neg)?], &labels, &hp_r)?;
            let pos = model.class_index(POSITIVE).expect("trained with both labels");
            let probs = choice_rows
                .iter()
                .map(|&c| Ok(model.predict_proba(&data.rows[c].vector)?[pos]))
                .collect::<Result<Vec<f64>>>()?;
            Ok((probs, model))
        })
        .collect::<Result<_>>()?;

    // Summing each choice's values in sorted order makes the average
    // independent of round order.
    let probabilities: Vec<f64> = (0..5)
        .map(|c| {
            let mut vals: Vec<f64> = per_round.iter().map(|(p, _)| p[c]).collect();
            vals.sort_by(f64::total_cmp);
            vals.iter().sum::<f64>() / rounds as f64
        })
        .collect();
    let index = argmax(&probabilities);
    let best = probabilities[index];
    let tie = probabilities.iter().filter(|&&p| p == best).count() > 1;
    let degenerate = probabilities.iter().all(|&p| p == probabilities[0]);
    if tie {
        info!("{}: tie among top choices, taking choice {index}", q.stem);
    }
    let models = per_round.into_iter().map(|(_, m)| m).collect();
    Ok((
        SatAnswer {
            index,
            probabilities,
            tie,
            degenerate,
        },
        models,
    ))
}

/// Answers every question, drawing negatives from the other questions'
/// stems. Question `i` uses a seed derived from `seed` and `i`.
pub fn eval_sat(
    questions: &[SatQuestion],
    data: &Dataset,
    hp: &Hyperparams,
    rounds: usize,
    seed: u64,
) -> Result<Evaluation> {
    let stems: Vec<WordPair> = questions.iter().map(|q| q.stem.clone()).collect();
    let rows = row_index(data);
    let answers: Vec<(SatAnswer, Vec<CalibratedModel>)> = questions
        .iter()
        .enumerate()
        .map(|(i, q)| answer_sat(q, &stems, data, hp, rounds, seed::derive(seed, &format!("sat question {i}"))))
        .collect::<Result<_>>()?;

    let mut summary = Summary::new("sat", seed, hp);
    summary.baseline = 0.2;
    summary.bagging_rounds = Some(rounds);
    let mut details = vec!["question\tstem\tguess\tanswer\tprobabilities".to_string()];
    let mut models = Vec::new();
    let mut correct = 0;
    for (i, (q, (a, ms))) in questions.iter().zip(answers).enumerate() {
        correct += usize::from(a.index == q.answer);
        summary.ties += usize::from(a.tie);
        for c in &q.choices {
            if data.rows[lookup(&rows, c)?].vector.is_zero() {
                summary.zero_vectors += 1;
            }
        }
        let probs: Vec<String> = a.probabilities.iter().map(|p| format!("{p:.6}")).collect();
        details.push(format!("{i}\t{}\t{}\t{}\t{}", q.stem, a.index, q.answer, probs.join(",")));
        for (r, m) in ms.into_iter().enumerate() {
            models.push((format!("q{i}.r{r}"), m));
        }
    }
    if summary.zero_vectors > 0 {
        warn!("{} choice vectors are all zero", summary.zero_vectors);
    }
    summary.set_counts(questions.len(), correct);
    Ok(Evaluation {
        summary,
        details,
        models,
    })
}
