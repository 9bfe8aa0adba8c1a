use std::collections::BTreeSet;

use super::store::CorpusIndex;
use super::{PhraseMatch, WindowSpec};
use crate::error::{Error, Result};

impl CorpusIndex {
    /// Every window where a member of `x_variants` and a member of
    /// `y_variants` co-occur, in either order, with gap and flank sizes
    /// admitted by `spec`.
    ///
    /// Each co-occurring `(x position, y position)` yields exactly one match,
    /// using the widest flanks available within `spec`. Results are sorted by
    /// document, then by the positions of the two pair members.
    pub fn find_phrases<I, J, S, T>(
        &self,
        x_variants: I,
        y_variants: J,
        spec: &WindowSpec,
    ) -> Result<Vec<PhraseMatch>>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        spec.validate()?;
        let xs: BTreeSet<String> = x_variants.into_iter().map(|s| s.as_ref().to_owned()).collect();
        let ys: BTreeSet<String> = y_variants.into_iter().map(|s| s.as_ref().to_owned()).collect();
        if xs.is_empty() || ys.is_empty() {
            return Err(Error::InvalidArgument("empty variant set".into()));
        }
        if let Some(w) = xs.intersection(&ys).next() {
            return Err(Error::SameWordPair(w.clone(), w.clone()));
        }

        let x_post = self.merged_postings(&xs);
        let y_post = self.merged_postings(&ys);
        let mut out = Vec::new();
        let (mut a, mut b) = (0, 0);
        while a < x_post.len() && b < y_post.len() {
            let (dx, dy) = (x_post[a].0, y_post[b].0);
            if dx < dy {
                a = advance_doc(&x_post, a);
            } else if dy < dx {
                b = advance_doc(&y_post, b);
            } else {
                let (a_end, b_end) = (advance_doc(&x_post, a), advance_doc(&y_post, b));
                let xp: Vec<u32> = x_post[a..a_end].iter().map(|p| p.1).collect();
                let yp: Vec<u32> = y_post[b..b_end].iter().map(|p| p.1).collect();
                self.windows_in_doc(dx, &xp, &yp, spec, &mut out);
                a = a_end;
                b = b_end;
            }
        }
        out.sort_by_key(|m| {
            let (first, second) = if m.x_first {
                (m.x_index, m.y_index)
            } else {
                (m.y_index, m.x_index)
            };
            (m.doc, m.offset as usize + first, m.offset as usize + second)
        });
        Ok(out)
    }

    fn merged_postings(&self, words: &BTreeSet<String>) -> Vec<(u32, u32)> {
        let mut all: Vec<(u32, u32)> = words
            .iter()
            .filter_map(|w| self.vocab.id(w))
            .flat_map(|id| self.decode(id))
            .collect();
        all.sort_unstable();
        all
    }

    /// Drives the shorter position list and binary-searches the longer one
    /// for partners within the between-gap bound.
    fn windows_in_doc(
        &self,
        doc: u32,
        xp: &[u32],
        yp: &[u32],
        spec: &WindowSpec,
        out: &mut Vec<PhraseMatch>,
    ) {
        let reach = spec.between.max as u32 + 1;
        let x_drives = xp.len() <= yp.len();
        let (driver, other) = if x_drives { (xp, yp) } else { (yp, xp) };
        for &p in driver {
            let lo = other.partition_point(|&q| q < p.saturating_sub(reach));
            let hi = other.partition_point(|&q| q <= p.saturating_add(reach));
            for &q in &other[lo..hi] {
                let (x, y) = if x_drives { (p, q) } else { (q, p) };
                if let Some(m) = self.window(doc, x, y, spec) {
                    out.push(m);
                }
            }
        }
    }

    fn window(&self, doc: u32, x: u32, y: u32, spec: &WindowSpec) -> Option<PhraseMatch> {
        let tokens = &self.docs[doc as usize];
        let (first, second) = (x.min(y) as usize, x.max(y) as usize);
        if !spec.between.contains(second - first - 1) {
            return None;
        }
        let before = spec.before.max.min(first);
        let after = spec.after.max.min(tokens.len() - 1 - second);
        if before < spec.before.min || after < spec.after.min {
            return None;
        }
        let start = first - before;
        let words = tokens[start..=second + after]
            .iter()
            .map(|&w| self.vocab.word(w).to_owned())
            .collect();
        Some(PhraseMatch {
            doc,
            offset: start as u32,
            tokens: words,
            x_index: x as usize - start,
            y_index: y as usize - start,
            x_first: x < y,
        })
    }
}

fn advance_doc(list: &[(u32, u32)], from: usize) -> usize {
    let doc = list[from].0;
    from + list[from..].partition_point(|p| p.0 == doc)
}

#[cfg(test)]
mod tests {
    use super::super::GapRange;
    use super::*;

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn running_example() {
        let index = CorpusIndex::from_texts(&["the mason cut the stone with care"]);
        let found = index
            .find_phrases(["mason", "masons"], ["stone", "stones"], &WindowSpec::default())
            .unwrap();
        assert_eq!(found.len(), 1);
        let m = &found[0];
        assert_eq!(m.tokens, words(&["the", "mason", "cut", "the", "stone", "with"]));
        assert_eq!((m.x_index, m.y_index, m.x_first), (1, 4, true));
    }

    #[test]
    fn reversed_zero_gap() {
        let index = CorpusIndex::from_texts(&["stone mason"]);
        let found = index.find_phrases(["mason"], ["stone"], &WindowSpec::default()).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].tokens, words(&["stone", "mason"]));
        assert!(!found[0].x_first);
        assert_eq!((found[0].x_index, found[0].y_index), (1, 0));
    }

    #[test]
    fn gap_too_wide() {
        let index = CorpusIndex::from_texts(&["mason a b c d stone"]);
        assert!(index
            .find_phrases(["mason"], ["stone"], &WindowSpec::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn windows_stay_inside_documents() {
        let index = CorpusIndex::from_texts(&["x y mason", "stone z"]);
        assert!(index
            .find_phrases(["mason"], ["stone"], &WindowSpec::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn flank_minimums_are_enforced() {
        let index = CorpusIndex::from_texts(&["mason stone end", "start mason stone"]);
        let spec = WindowSpec {
            before: GapRange::new(1, 1),
            ..WindowSpec::default()
        };
        let found = index.find_phrases(["mason"], ["stone"], &spec).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].doc, 1);
        assert_eq!(found[0].tokens, words(&["start", "mason", "stone"]));
    }

    #[test]
    fn one_match_per_cooccurrence_sorted() {
        let index = CorpusIndex::from_texts(&["stone mason stone"]);
        let found = index.find_phrases(["mason"], ["stone"], &WindowSpec::default()).unwrap();
        assert_eq!(found.len(), 2);
        assert!(!found[0].x_first);
        assert_eq!(found[0].tokens, words(&["stone", "mason", "stone"]));
        assert!(found[1].x_first);
        assert_eq!(found[1].tokens, words(&["stone", "mason", "stone"]));
        assert_eq!((found[1].x_index, found[1].y_index), (1, 2));
    }

    #[test]
    fn rejects_overlapping_variants_and_empty_sets() {
        let index = CorpusIndex::from_texts(&["a b"]);
        assert!(matches!(
            index.find_phrases(["a"], ["a"], &WindowSpec::default()),
            Err(Error::SameWordPair(..))
        ));
        let none: [&str; 0] = [];
        assert!(index.find_phrases(none, ["a"], &WindowSpec::default()).is_err());
    }

    #[test]
    fn empty_index_finds_nothing() {
        let empty: [&str; 0] = [];
        let index = CorpusIndex::from_texts(&empty);
        assert!(index
            .find_phrases(["a"], ["b"], &WindowSpec::default())
            .unwrap()
            .is_empty());
    }
}
