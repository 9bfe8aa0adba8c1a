//! Four-choice synonym questions as binary pair classification under
//! cross-validation.

use log::{info, warn};
use rayon::prelude::*;

use super::folds::stratified_folds;
use super::report::{Evaluation, Summary};
use super::{check_rows, ChoiceQuestion, NEGATIVE, POSITIVE};
use crate::classifier::{argmax, CalibratedModel, Hyperparams};
use crate::error::Result;
use crate::features::Dataset;
use crate::pair::WordPair;
use crate::seed;

/// The stem paired with each choice; the answer's pair is positive.
pub fn expand_choice_question(q: &ChoiceQuestion) -> Vec<(WordPair, String)> {
    q.choices
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let label = if i == q.answer { POSITIVE } else { NEGATIVE };
            (WordPair::new(q.stem.clone(), c.clone()), label.to_string())
        })
        .collect()
}

/// Cross-validates over the expanded pairs, then answers each question with
/// the choice whose pair is most probably positive. A pair's probability
/// comes from the model of the fold that held it out, even when a
/// question's pairs fall in different folds.
///
/// `data` must hold the expanded pairs in question order.
pub fn eval_toefl(
    questions: &[ChoiceQuestion],
    data: &Dataset,
    hp: &Hyperparams,
    n_folds: usize,
    seed: u64,
) -> Result<Evaluation> {
    let expanded: Vec<(WordPair, String)> = questions.iter().flat_map(expand_choice_question).collect();
    check_rows(data, expanded.iter().map(|(p, _)| p))?;
    let labels: Vec<String> = expanded.iter().map(|(_, l)| l.clone()).collect();
    // Folds are stratified by label. With plain random folds, holding out a
    // positive lowers its fold's training base rate, which pushes answers
    // below chance even when the vectors carry no information.
    let folds = stratified_folds(&labels, n_folds, seed::derive(seed, "folds"))?;

    let fold_results: Vec<(Vec<(usize, f64)>, CalibratedModel)> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train: Vec<usize> = (0..expanded.len()).filter(|i| test.binary_search(i).is_err()).collect();
            let train_labels: Vec<String> = train.iter().map(|&i| labels[i].clone()).collect();
            let hp_f = Hyperparams {
                seed: seed::derive(seed, &format!("fold {f}")),
                ..*hp
            };
            let model = CalibratedModel::fit(data, &train, &train_labels, &hp_f)?;
            let pos = model.class_index(POSITIVE).expect("both labels present");
            let probs = test
                .iter()
                .map(|&i| Ok((i, model.predict_proba(&data.rows[i].vector)?[pos])))
                .collect::<Result<Vec<_>>>()?;
            Ok((probs, model))
        })
        .collect::<Result<_>>()?;

    let mut prob = vec![0.0; expanded.len()];
    let mut models = Vec::new();
    for (f, (probs, model)) in fold_results.into_iter().enumerate() {
        for (i, p) in probs {
            prob[i] = p;
        }
        models.push((format!("fold{f}"), model));
    }

    let mut summary = Summary::new("toefl", seed, hp);
    summary.baseline = 0.25;
    summary.folds = Some(n_folds);
    summary.zero_vectors = data.zero_rows();
    if summary.zero_vectors > 0 {
        warn!("{} pair vectors are all zero", summary.zero_vectors);
    }
    let mut details = vec!["question\tstem\tguess\tanswer\tprobabilities".to_string()];
    let mut correct = 0;
    for (qi, q) in questions.iter().enumerate() {
        let p = &prob[qi * 4..qi * 4 + 4];
        let guess = argmax(p);
        if p.iter().filter(|&&x| x == p[guess]).count() > 1 {
            summary.ties += 1;
            info!("{}: tie among top choices, taking choice {guess}", q.stem);
        }
        correct += usize::from(guess == q.answer);
        let ps: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
        details.push(format!("{qi}\t{}\t{guess}\t{}\t{}", q.stem, q.answer, ps.join(",")));
    }
    summary.set_counts(questions.len(), correct);
    Ok(Evaluation {
        summary,
        details,
        models,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::vector::SparseVec;

    fn words(ws: [&str; 4]) -> [String; 4] {
        ws.map(String::from)
    }

    #[test]
    fn expansion_labels() {
        let q = ChoiceQuestion::new("levied", words(["imposed", "believed", "requested", "correlated"]), 0).unwrap();
        let e = expand_choice_question(&q);
        assert_eq!(e[0], (WordPair::new("levied", "imposed"), POSITIVE.to_string()));
        assert!(e[1..].iter().all(|(_, l)| l == NEGATIVE));
        let q2 = ChoiceQuestion::new("s", words(["a", "b", "c", "d"]), 2).unwrap();
        let labels: Vec<String> = expand_choice_question(&q2).into_iter().map(|(_, l)| l).collect();
        assert_eq!(labels, [NEGATIVE, NEGATIVE, POSITIVE, NEGATIVE]);
    }

    fn questions(n: usize) -> Vec<ChoiceQuestion> {
        (0..n)
            .map(|i| {
                let w = |k: usize| format!("w{}x{}", letters(i), letters(k));
                ChoiceQuestion::new(format!("s{}", letters(i)), [w(0), w(1), w(2), w(3)], i % 4).unwrap()
            })
            .collect()
    }

    fn letters(i: usize) -> String {
        format!("{}{}", (b'a' + (i / 26) as u8) as char, (b'a' + (i % 26) as u8) as char)
    }

    #[test]
    fn indicator_feature_gives_perfect_accuracy() {
        let qs = questions(20);
        let mut d = Dataset::new(2, "sum");
        for q in &qs {
            for (pair, label) in expand_choice_question(q) {
                let v = if label == POSITIVE { [1.0, 0.0] } else { [0.0, 1.0] };
                d.push(
                    FeatureVector {
                        pair,
                        vector: SparseVec::from_dense(&v),
                    },
                    Some(label),
                )
                .unwrap();
            }
        }
        let e = eval_toefl(&qs, &d, &Hyperparams::default(), 10, 3).unwrap();
        assert_eq!(e.summary.accuracy, 1.0);
        assert_eq!(e.models.len(), 10);
    }

    #[test]
    fn zero_features_always_guess_first() {
        let qs = questions(20);
        let mut d = Dataset::new(2, "sum");
        for q in &qs {
            for (pair, label) in expand_choice_question(q) {
                d.push(
                    FeatureVector {
                        pair,
                        vector: SparseVec::zeros(2),
                    },
                    Some(label),
                )
                .unwrap();
            }
        }
        let e = eval_toefl(&qs, &d, &Hyperparams::default(), 10, 3).unwrap();
        // Every fold trains on the same class mix, so all probabilities tie
        // and the first choice is always taken.
        assert_eq!(e.summary.ties, 20);
        assert_eq!(e.summary.correct, 5);
        assert_eq!(e.summary.zero_vectors, 80);
        let again = eval_toefl(&qs, &d, &Hyperparams::default(), 10, 3).unwrap();
        assert_eq!(e.details, again.details);
    }

    #[test]
    fn misaligned_rows_are_rejected() {
        let qs = questions(3);
        let d = Dataset::new(2, "sum");
        assert!(eval_toefl(&qs, &d, &Hyperparams::default(), 2, 0).is_err());
    }
}
