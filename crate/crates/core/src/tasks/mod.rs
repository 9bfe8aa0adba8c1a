//! Evaluation harnesses that cast multiple-choice and labeled-pair problems
//! as supervised pair classification.
//!
//! Every harness reads vectors from one [`Dataset`] built over a single
//! feature space covering all pairs involved, test pairs included.

mod choice;
mod folds;
mod labeled;
mod report;
mod sat;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::pair::WordPair;

pub use choice::{eval_toefl, expand_choice_question};
pub use folds::{crossval_folds, stratified_folds};
pub use labeled::eval_labeled_pairs;
pub use report::{Evaluation, Summary};
pub use sat::{answer_sat, eval_sat, SatAnswer};

pub const POSITIVE: &str = "positive";
pub const NEGATIVE: &str = "negative";

/// A five-choice analogy: which choice relates like the stem?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatQuestion {
    pub stem: WordPair,
    pub choices: [WordPair; 5],
    pub answer: usize,
}

impl SatQuestion {
    pub fn new(stem: WordPair, choices: [WordPair; 5], answer: usize) -> Result<Self> {
        if answer >= 5 {
            return Err(Error::InvalidArgument(format!("answer index {answer} out of range")));
        }
        if choices.iter().collect::<HashSet<_>>().len() != 5 {
            return Err(Error::InvalidArgument(format!("{stem}: choices are not distinct")));
        }
        Ok(SatQuestion { stem, choices, answer })
    }

    /// The stem followed by the choices.
    pub fn pairs(&self) -> impl Iterator<Item = &WordPair> {
        std::iter::once(&self.stem).chain(&self.choices)
    }
}

/// A four-choice synonym question over single words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceQuestion {
    pub stem: String,
    pub choices: [String; 4],
    pub answer: usize,
}

impl ChoiceQuestion {
    pub fn new(stem: impl Into<String>, choices: [String; 4], answer: usize) -> Result<Self> {
        let stem = stem.into();
        if answer >= 4 {
            return Err(Error::InvalidArgument(format!("answer index {answer} out of range")));
        }
        if choices.iter().collect::<HashSet<_>>().len() != 4 {
            return Err(Error::InvalidArgument(format!("{stem}: choices are not distinct")));
        }
        Ok(ChoiceQuestion { stem, choices, answer })
    }
}

/// Pairs with class labels; no pair repeats and at least two labels occur.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPairSet {
    pairs: Vec<(WordPair, String)>,
}

impl LabeledPairSet {
    pub fn new(pairs: Vec<(WordPair, String)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (p, _) in &pairs {
            if !seen.insert(p) {
                return Err(Error::InvalidArgument(format!("duplicate pair {p}")));
            }
        }
        let labels: BTreeSet<&str> = pairs.iter().map(|(_, l)| l.as_str()).collect();
        if labels.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two labels, found {}",
                labels.len()
            )));
        }
        Ok(LabeledPairSet { pairs })
    }

    pub fn pairs(&self) -> &[(WordPair, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct labels, sorted.
    pub fn labels(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.pairs.iter().map(|(_, l)| l).collect();
        set.into_iter().cloned().collect()
    }
}

fn data_lines(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').map(|f| f.trim().to_owned()).collect()))
        .collect())
}

fn parse_answer(path: &Path, n: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(path, n, format!("bad answer index {s:?}")))
}

/// `stemX:stemY<TAB>c1X:c1Y<TAB>...<TAB>c5X:c5Y<TAB>answer_index`
pub fn read_sat_questions(path: &Path) -> Result<Vec<SatQuestion>> {
    data_lines(path)?
        .into_iter()
        .map(|(n, f)| {
            if f.len() != 7 {
                return Err(Error::parse(path, n, format!("expected 7 fields, found {}", f.len())));
            }
            let pair = |s: &str| s.parse::<WordPair>().map_err(|e| Error::parse(path, n, e.to_string()));
            let choices = [pair(&f[1])?, pair(&f[2])?, pair(&f[3])?, pair(&f[4])?, pair(&f[5])?];
            SatQuestion::new(pair(&f[0])?, choices, parse_answer(path, n, &f[6])?)
                .map_err(|e| Error::parse(path, n, e.to_string()))
        })
        .collect()
}

/// `stem<TAB>c1<TAB>c2<TAB>c3<TAB>c4<TAB>answer_index`
pub fn read_choice_questions(path: &Path) -> Result<Vec<ChoiceQuestion>> {
    data_lines(path)?
        .into_iter()
        .map(|(n, f)| {
            if f.len() != 6 {
                return Err(Error::parse(path, n, format!("expected 6 fields, found {}", f.len())));
            }
            let w = |s: &String| s.to_lowercase();
            ChoiceQuestion::new(w(&f[0]), [w(&f[1]), w(&f[2]), w(&f[3]), w(&f[4])], parse_answer(path, n, &f[5])?)
                .map_err(|e| Error::parse(path, n, e.to_string()))
        })
        .collect()
}

/// `x<TAB>y<TAB>label`
pub fn read_labeled_pairs(path: &Path) -> Result<LabeledPairSet> {
    let pairs = data_lines(path)?
        .into_iter()
        .map(|(n, f)| {
            if f.len() != 3 || f.iter().any(String::is_empty) {
                return Err(Error::parse(path, n, "expected x, y, label"));
            }
            Ok((WordPair::new(f[0].to_lowercase(), f[1].to_lowercase()), f[2].clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledPairSet::new(pairs).map_err(|e| Error::parse(path, 0, e.to_string()))
}

pub fn write_sat_questions(path: &Path, questions: &[SatQuestion]) -> Result<()> {
    let mut s = String::new();
    for q in questions {
        let cols: Vec<String> = q.pairs().map(|p| p.to_string()).collect();
        s.push_str(&format!("{}\t{}\n", cols.join("\t"), q.answer));
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn write_choice_questions(path: &Path, questions: &[ChoiceQuestion]) -> Result<()> {
    let mut s = String::new();
    for q in questions {
        s.push_str(&format!("{}\t{}\t{}\n", q.stem, q.choices.join("\t"), q.answer));
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn write_labeled_pairs(path: &Path, set: &LabeledPairSet) -> Result<()> {
    let mut s = String::new();
    for (p, l) in set.pairs() {
        s.push_str(&format!("{}\t{}\t{l}\n", p.x, p.y));
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// First row of each pair.
fn row_index(data: &Dataset) -> HashMap<&WordPair, usize> {
    let mut map = HashMap::new();
    for (i, r) in data.rows.iter().enumerate() {
        map.entry(&r.pair).or_insert(i);
    }
    map
}

fn lookup(map: &HashMap<&WordPair, usize>, pair: &WordPair) -> Result<usize> {
    map.get(pair)
        .copied()
        .ok_or_else(|| Error::InvalidArgument(format!("pair {pair} has no row in the dataset")))
}

/// Rows `0..n` must hold `pairs` in order.
fn check_rows<'a>(data: &Dataset, pairs: impl ExactSizeIterator<Item = &'a WordPair>) -> Result<()> {
    if data.len() != pairs.len() {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} rows for {} pairs",
            data.len(),
            pairs.len()
        )));
    }
    for (i, (row, p)) in data.rows.iter().zip(pairs).enumerate() {
        if &row.pair != p {
            return Err(Error::InvalidArgument(format!("row {i} is {}, expected {p}", row.pair)));
        }
    }
    Ok(())
}
