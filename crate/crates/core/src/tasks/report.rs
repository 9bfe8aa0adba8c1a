use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifier::{CalibratedModel, Hyperparams};

/// Machine-readable outcome of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub task: String,
    pub items: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Random guessing for multiple-choice tasks, the majority class for
    /// labeled pairs.
    pub baseline: f64,
    /// Class labels, in confusion-matrix order. Empty for multiple choice.
    pub classes: Vec<String>,
    /// `confusion[true][predicted]`
    pub confusion: Vec<Vec<usize>>,
    /// `None` where a class was never predicted.
    pub precision: Vec<Option<f64>>,
    /// `None` where a class never occurs.
    pub recall: Vec<Option<f64>>,
    /// Items decided by the lowest-index tie-break.
    pub ties: usize,
    /// All-zero vectors among the items evaluated.
    pub zero_vectors: usize,
    pub seed: u64,
    pub hyperparams: Hyperparams,
    pub folds: Option<usize>,
    pub bagging_rounds: Option<usize>,
}

impl Summary {
    pub(crate) fn new(task: &str, seed: u64, hp: &Hyperparams) -> Self {
        Summary {
            task: task.to_owned(),
            items: 0,
            correct: 0,
            accuracy: 0.0,
            baseline: 0.0,
            classes: Vec::new(),
            confusion: Vec::new(),
            precision: Vec::new(),
            recall: Vec::new(),
            ties: 0,
            zero_vectors: 0,
            seed,
            hyperparams: *hp,
            folds: None,
            bagging_rounds: None,
        }
    }

    pub(crate) fn set_counts(&mut self, items: usize, correct: usize) {
        self.items = items;
        self.correct = correct;
        self.accuracy = if items == 0 { 0.0 } else { correct as f64 / items as f64 };
    }
}

/// A summary with per-item detail lines and the models trained on the way.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub summary: Summary,
    pub details: Vec<String>,
    pub models: Vec<(String, CalibratedModel)>,
}

impl Evaluation {
    /// Deterministic plain-text report.
    pub fn report_text(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        writeln!(out, "task\t{}", s.task).unwrap();
        writeln!(out, "items\t{}", s.items).unwrap();
        writeln!(out, "correct\t{}", s.correct).unwrap();
        writeln!(out, "accuracy\t{:.6}", s.accuracy).unwrap();
        writeln!(out, "baseline\t{:.6}", s.baseline).unwrap();
        writeln!(out, "ties\t{}", s.ties).unwrap();
        writeln!(out, "zero_vectors\t{}", s.zero_vectors).unwrap();
        writeln!(out, "seed\t{}", s.seed).unwrap();
        let hp = &s.hyperparams;
        writeln!(out, "c\t{}\ngamma\t{}\ntol\t{}", hp.c, hp.gamma, hp.tol).unwrap();
        if let Some(f) = s.folds {
            writeln!(out, "folds\t{f}").unwrap();
        }
        if let Some(r) = s.bagging_rounds {
            writeln!(out, "bagging_rounds\t{r}").unwrap();
        }
        if !s.classes.is_empty() {
            writeln!(out, "\nclass\tprecision\trecall").unwrap();
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
            for (i, c) in s.classes.iter().enumerate() {
                writeln!(out, "{c}\t{}\t{}", fmt(s.precision[i]), fmt(s.recall[i])).unwrap();
            }
            writeln!(out, "\nconfusion (rows true, columns predicted)\n\t{}", s.classes.join("\t")).unwrap();
            for (c, row) in s.classes.iter().zip(&s.confusion) {
                let cells: Vec<String> = row.iter().map(usize::to_string).collect();
                writeln!(out, "{c}\t{}", cells.join("\t")).unwrap();
            }
        }
        if !self.details.is_empty() {
            out.push('\n');
            for d in &self.details {
                out.push_str(d);
                out.push('\n');
            }
        }
        out
    }
}
