//! Wildcard patterns over normalized phrases and feature selection by
//! pattern sharing.
//!
//! A phrase of `n` words yields `2^(n-2)` patterns: the pair members become
//! `X` and `Y` in their surface order, and every other word independently
//! stays literal or becomes `*`. A pattern's weight in selection is the
//! number of distinct pairs whose phrases generate it; the top `k * N`
//! patterns form the feature space.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use log::info;
use rand::seq::index::sample;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::index::PhraseMatch;
use crate::pair::WordPair;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    X,
    Y,
    Wildcard,
    Literal(String),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::X => f.write_str("X"),
            Slot::Y => f.write_str("Y"),
            Slot::Wildcard => f.write_str("*"),
            Slot::Literal(w) => f.write_str(w),
        }
    }
}

/// A phrase template with exactly one `X` and one `Y`. Its canonical text is
/// the slots joined by single spaces, e.g. `the X cut * Y with`; literals are
/// lowercase words, so the text form is unambiguous.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    slots: Vec<Slot>,
}

impl Pattern {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        let xs = slots.iter().filter(|s| **s == Slot::X).count();
        let ys = slots.iter().filter(|s| **s == Slot::Y).count();
        if xs != 1 || ys != 1 {
            return Err(Error::InvalidArgument(format!(
                "pattern needs exactly one X and one Y, got {xs} and {ys}"
            )));
        }
        for s in &slots {
            if let Slot::Literal(w) = s {
                if w.is_empty() || !w.chars().all(|c| c.is_alphabetic() && !c.is_uppercase()) {
                    return Err(Error::InvalidArgument(format!("bad literal {w:?}")));
                }
            }
        }
        Ok(Pattern { slots })
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let slots = s
            .split(' ')
            .map(|t| match t {
                "X" => Slot::X,
                "Y" => Slot::Y,
                "*" => Slot::Wildcard,
                w => Slot::Literal(w.to_owned()),
            })
            .collect();
        Pattern::new(slots)
    }
}

/// All `2^(n-2)` patterns of a normalized phrase, in mask order (bit `i` set
/// means the `i`-th context word becomes a wildcard).
pub fn patterns_from_phrase(m: &PhraseMatch) -> Vec<Pattern> {
    let context: Vec<usize> = (0..m.tokens.len())
        .filter(|&i| i != m.x_index && i != m.y_index)
        .collect();
    (0u32..1 << context.len())
        .map(|mask| {
            let mut slots: Vec<Slot> = m.tokens.iter().map(|t| Slot::Literal(t.clone())).collect();
            slots[m.x_index] = Slot::X;
            slots[m.y_index] = Slot::Y;
            for (bit, &i) in context.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    slots[i] = Slot::Wildcard;
                }
            }
            Pattern { slots }
        })
        .collect()
}

/// Canonical texts of [`patterns_from_phrase`], without building patterns.
pub fn pattern_keys(m: &PhraseMatch) -> Vec<String> {
    let n = m.tokens.len();
    let context: Vec<usize> = (0..n).filter(|&i| i != m.x_index && i != m.y_index).collect();
    let mut out = Vec::with_capacity(1 << context.len());
    let mut buf = String::new();
    for mask in 0u32..1 << context.len() {
        buf.clear();
        let mut bit = 0;
        for (i, tok) in m.tokens.iter().enumerate() {
            if i > 0 {
                buf.push(' ');
            }
            if i == m.x_index {
                buf.push('X');
            } else if i == m.y_index {
                buf.push('Y');
            } else {
                if mask & (1 << bit) != 0 {
                    buf.push('*');
                } else {
                    buf.push_str(tok);
                }
                bit += 1;
            }
        }
        out.push(buf.clone());
    }
    out
}

/// Lengths agree, `X`/`Y` sit on the phrase's pair positions, literals equal
/// the phrase word, and wildcards match any word.
pub fn pattern_matches(p: &Pattern, m: &PhraseMatch) -> bool {
    p.slots.len() == m.tokens.len()
        && p.slots.iter().zip(&m.tokens).enumerate().all(|(i, (slot, tok))| match slot {
            Slot::X => i == m.x_index,
            Slot::Y => i == m.y_index,
            Slot::Wildcard => i != m.x_index && i != m.y_index,
            Slot::Literal(w) => i != m.x_index && i != m.y_index && w == tok,
        })
}

/// Normalized phrases per pair, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhraseTable {
    entries: IndexMap<WordPair, Vec<PhraseMatch>>,
}

impl PhraseTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a pair; phrases for a pair already present are appended.
    pub fn insert(&mut self, pair: WordPair, phrases: Vec<PhraseMatch>) {
        self.entries.entry(pair).or_default().extend(phrases);
    }

    pub fn get(&self, pair: &WordPair) -> Option<&[PhraseMatch]> {
        self.entries.get(pair).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WordPair, &[PhraseMatch])> {
        self.entries.iter().map(|(p, v)| (p, v.as_slice()))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# pairclass phrases v1\n");
        for (pair, phrases) in &self.entries {
            s.push_str(&format!("pair\t{}\t{}\t{}\n", pair.x, pair.y, phrases.len()));
            for m in phrases {
                s.push_str(&format!(
                    "phrase\t{}\t{}\t{}\t{}\t{}\n",
                    m.doc,
                    m.offset,
                    m.x_index,
                    m.y_index,
                    m.tokens.join(" ")
                ));
            }
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "# pairclass phrases v1")) => {}
            other => {
                return Err(Error::FormatVersion {
                    path: path.to_path_buf(),
                    found: other.map(|(_, l)| l.to_owned()).unwrap_or_default(),
                    expected: "# pairclass phrases v1".into(),
                })
            }
        }
        let mut table = PhraseTable::new();
        let mut current: Option<(WordPair, usize, Vec<PhraseMatch>)> = None;
        let num = |n: usize, s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::parse(path, n, format!("bad number {s:?}")))
        };
        for (n, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["pair", x, y, count] => {
                    if let Some((pair, expected, phrases)) = current.take() {
                        if phrases.len() != expected {
                            return Err(Error::parse(path, n, format!("{pair}: expected {expected} phrases")));
                        }
                        table.insert(pair, phrases);
                    }
                    current = Some((WordPair::new(*x, *y), num(n, count)?, Vec::new()));
                }
                ["phrase", doc, offset, xi, yi, toks] => {
                    let (_, _, phrases) = current
                        .as_mut()
                        .ok_or_else(|| Error::parse(path, n, "phrase before any pair"))?;
                    let tokens = toks.split(' ').map(str::to_owned).collect();
                    let mut m = PhraseMatch::new(tokens, num(n, xi)?, num(n, yi)?)
                        .map_err(|e| Error::parse(path, n, e.to_string()))?;
                    m.doc = num(n, doc)? as u32;
                    m.offset = num(n, offset)? as u32;
                    phrases.push(m);
                }
                _ => return Err(Error::parse(path, n, "expected a pair or phrase record")),
            }
        }
        if let Some((pair, expected, phrases)) = current.take() {
            if phrases.len() != expected {
                return Err(Error::parse(path, 0, format!("{pair}: expected {expected} phrases")));
            }
            table.insert(pair, phrases);
        }
        Ok(table)
    }
}

/// Keeps at most `max` phrases, chosen uniformly at random without
/// replacement; survivors keep their original order.
pub fn downsample(pair: &WordPair, phrases: Vec<PhraseMatch>, max: usize, seed: u64) -> Vec<PhraseMatch> {
    if phrases.len() <= max {
        return phrases;
    }
    info!("{pair}: downsampling {} phrases to {max}", phrases.len());
    let mut rng = crate::seed::rng(seed);
    let mut keep = sample(&mut rng, phrases.len(), max).into_vec();
    keep.sort_unstable();
    let mut it = keep.into_iter().peekable();
    phrases
        .into_iter()
        .enumerate()
        .filter_map(|(i, m)| {
            if it.peek() == Some(&i) {
                it.next();
                Some(m)
            } else {
                None
            }
        })
        .collect()
}

/// The selected patterns, ordered by descending pair count with ascending
/// canonical text breaking ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpace {
    patterns: Vec<Pattern>,
    counts: Vec<usize>,
    k: usize,
    n_pairs: usize,
    index: HashMap<String, usize>,
}

const SPACE_HEADER: &str = "# pairclass feature-space v1";

impl FeatureSpace {
    fn from_parts(patterns: Vec<Pattern>, counts: Vec<usize>, k: usize, n_pairs: usize) -> Self {
        let index = patterns
            .iter()
            .enumerate()
            .map(|(i, p)| (p.canonical(), i))
            .collect();
        FeatureSpace {
            patterns,
            counts,
            k,
            n_pairs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    /// Number of distinct pairs that generated each selected pattern.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn position(&self, canonical: &str) -> Option<usize> {
        self.index.get(canonical).copied()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{SPACE_HEADER}\nk\t{}\npairs\t{}\npatterns\t{}\n",
            self.k,
            self.n_pairs,
            self.patterns.len()
        );
        for (p, c) in self.patterns.iter().zip(&self.counts) {
            s.push_str(&format!("{c}\t{p}\n"));
        }
        s
    }

    /// SHA-256 of the text form; ties datasets and models to this space.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|(n, msg)| match msg {
            None => Error::FormatVersion {
                path: path.to_path_buf(),
                found: text.lines().next().unwrap_or("").to_owned(),
                expected: SPACE_HEADER.into(),
            },
            Some(msg) => Error::parse(path, n, msg),
        })
    }

    fn parse(text: &str) -> std::result::Result<Self, (usize, Option<String>)> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        if lines.next().map(|(_, l)| l) != Some(SPACE_HEADER) {
            return Err((1, None));
        }
        let mut header = |name: &str| -> std::result::Result<usize, (usize, Option<String>)> {
            let (n, l) = lines.next().ok_or((0, Some(format!("missing {name}"))))?;
            l.strip_prefix(name)
                .and_then(|v| v.strip_prefix('\t'))
                .and_then(|v| v.parse().ok())
                .ok_or((n, Some(format!("expected {name}"))))
        };
        let k = header("k")?;
        let n_pairs = header("pairs")?;
        let m = header("patterns")?;
        let mut patterns = Vec::with_capacity(m);
        let mut counts = Vec::with_capacity(m);
        for (n, l) in lines {
            let (c, p) = l.split_once('\t').ok_or((n, Some("expected count<TAB>pattern".into())))?;
            counts.push(c.parse().map_err(|_| (n, Some(format!("bad count {c:?}"))))?);
            patterns.push(p.parse::<Pattern>().map_err(|e| (n, Some(e.to_string())))?);
        }
        if patterns.len() != m {
            return Err((0, Some(format!("expected {m} patterns, found {}", patterns.len()))));
        }
        Ok(Self::from_parts(patterns, counts, k, n_pairs))
    }
}

/// Counts, for every pattern, the distinct pairs whose phrases generate it,
/// and keeps the top `k * N` (N = pairs in the table). Labels play no part.
pub fn select_features(table: &PhraseTable, k: usize) -> Result<FeatureSpace> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let n_pairs = table.len();
    let tables: Vec<&Vec<PhraseMatch>> = table.entries.values().collect();
    let per_pair: Vec<HashSet<String>> = tables
        .par_iter()
        .map(|phrases| phrases.iter().flat_map(pattern_keys).collect())
        .collect();
    let mut counts: HashMap<String, usize> = HashMap::new();
    for keys in per_pair {
        for key in keys {
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    let total = counts.len();
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.par_sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k * n_pairs);
    info!(
        "selected {} of {} patterns (k = {k}, {n_pairs} pairs)",
        ranked.len(),
        total
    );
    let (patterns, counts) = ranked
        .into_iter()
        .map(|(key, c)| (key.parse::<Pattern>().expect("generated keys are canonical"), c))
        .unzip();
    Ok(FeatureSpace::from_parts(patterns, counts, k, n_pairs))
}
