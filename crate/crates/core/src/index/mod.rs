//! Positional inverted index over tokenized corpora and the two-word window
//! query `[before] X [between] Y [after]`, matched in either order.

mod query;
mod store;
pub mod tokenize;
mod varint;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use store::{build_index, corpus_checksum, CorpusIndex, Vocabulary, INDEX_FORMAT_VERSION};
pub use tokenize::{split_documents, tokenize};

/// Inclusive bounds on a number of words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRange {
    pub min: usize,
    pub max: usize,
}

impl GapRange {
    pub const fn new(min: usize, max: usize) -> Self {
        GapRange { min, max }
    }

    pub fn contains(&self, n: usize) -> bool {
        self.min <= n && n <= self.max
    }
}

/// Flank and gap sizes admitted around a co-occurring pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub before: GapRange,
    pub between: GapRange,
    pub after: GapRange,
}

impl Default for WindowSpec {
    /// `[0 to 1 words] X [0 to 3 words] Y [0 to 1 words]`
    fn default() -> Self {
        WindowSpec {
            before: GapRange::new(0, 1),
            between: GapRange::new(0, 3),
            after: GapRange::new(0, 1),
        }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("before", self.before),
            ("between", self.between),
            ("after", self.after),
        ] {
            if r.min > r.max {
                return Err(Error::InvalidArgument(format!(
                    "window {name}: min {} exceeds max {}",
                    r.min, r.max
                )));
            }
        }
        Ok(())
    }

    /// Longest phrase this spec can produce.
    pub fn max_len(&self) -> usize {
        2 + self.before.max + self.between.max + self.after.max
    }
}

/// One retrieved window containing both members of a pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhraseMatch {
    /// Document the window came from.
    pub doc: u32,
    /// Token offset of the window's first word within the document.
    pub offset: u32,
    pub tokens: Vec<String>,
    pub x_index: usize,
    pub y_index: usize,
    /// Whether the X member precedes the Y member.
    pub x_first: bool,
}

impl PhraseMatch {
    pub fn new(tokens: Vec<String>, x_index: usize, y_index: usize) -> Result<Self> {
        if x_index == y_index || x_index >= tokens.len() || y_index >= tokens.len() {
            return Err(Error::InvalidArgument(format!(
                "bad pair positions {x_index},{y_index} in a {}-token phrase",
                tokens.len()
            )));
        }
        Ok(PhraseMatch {
            doc: 0,
            offset: 0,
            tokens,
            x_index,
            y_index,
            x_first: x_index < y_index,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Words before the first pair member, between the members, and after
    /// the second.
    pub fn gaps(&self) -> (usize, usize, usize) {
        let (first, second) = if self.x_first {
            (self.x_index, self.y_index)
        } else {
            (self.y_index, self.x_index)
        };
        (first, second - first - 1, self.tokens.len() - second - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_window() {
        let w = WindowSpec::default();
        assert_eq!(w.before, GapRange::new(0, 1));
        assert_eq!(w.between, GapRange::new(0, 3));
        assert_eq!(w.after, GapRange::new(0, 1));
        assert_eq!(w.max_len(), 7);
        w.validate().unwrap();
    }

    #[test]
    fn inverted_range_rejected() {
        let w = WindowSpec {
            between: GapRange::new(3, 1),
            ..WindowSpec::default()
        };
        assert!(w.validate().is_err());
    }

    #[test]
    fn phrase_gaps() {
        let words = ["the", "mason", "cut", "the", "stone", "with"];
        let m = PhraseMatch::new(words.iter().map(|s| s.to_string()).collect(), 1, 4).unwrap();
        assert!(m.x_first);
        assert_eq!(m.gaps(), (1, 2, 1));
        let r = PhraseMatch::new(vec!["stone".into(), "mason".into()], 1, 0).unwrap();
        assert!(!r.x_first);
        assert_eq!(r.gaps(), (0, 0, 0));
        assert!(PhraseMatch::new(vec!["a".into()], 0, 0).is_err());
    }
}
