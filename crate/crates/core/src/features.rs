//! Log-frequency pattern vectors, one per word pair.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::PhraseMatch;
use crate::pair::WordPair;
use crate::patterns::{pattern_keys, FeatureSpace, PhraseTable};
use crate::vector::SparseVec;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub pair: WordPair,
    pub vector: SparseVec,
}

/// Element `i` is `ln(1 + f_i)`, where `f_i` counts the phrases matched by
/// pattern `i`; the result is scaled to unit length unless it is all zero.
pub fn build_vector(pair: &WordPair, phrases: &[PhraseMatch], space: &FeatureSpace) -> FeatureVector {
    let mut counts = vec![0u32; space.len()];
    for m in phrases {
        // A phrase's pattern keys are distinct, so it adds at most one to
        // any feature.
        for key in pattern_keys(m) {
            if let Some(i) = space.position(&key) {
                counts[i] += 1;
            }
        }
    }
    let entries: Vec<(u32, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > 0)
        .map(|(i, &f)| (i as u32, (f as f64).ln_1p()))
        .collect();
    let mut vector = SparseVec::from_entries(space.len(), entries).expect("indices are in range and unique");
    let norm = vector.norm();
    if norm > 0.0 {
        vector.scale(1.0 / norm);
    }
    FeatureVector {
        pair: pair.clone(),
        vector,
    }
}

/// Feature rows in input order, with optional class labels, tied to the
/// space they were built over.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<Option<String>>,
    dim: usize,
    space_checksum: String,
}

impl Dataset {
    pub fn new(dim: usize, space_checksum: impl Into<String>) -> Self {
        Dataset {
            rows: Vec::new(),
            labels: Vec::new(),
            dim,
            space_checksum: space_checksum.into(),
        }
    }

    pub fn push(&mut self, row: FeatureVector, label: Option<String>) -> Result<()> {
        if row.vector.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: row.vector.dim(),
            });
        }
        self.rows.push(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space_checksum(&self) -> &str {
        &self.space_checksum
    }

    pub fn vectors(&self) -> Vec<&SparseVec> {
        self.rows.iter().map(|r| &r.vector).collect()
    }

    pub fn position(&self, pair: &WordPair) -> Option<usize> {
        self.rows.iter().position(|r| &r.pair == pair)
    }

    pub fn zero_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.vector.is_zero()).count()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# pairclass dataset v1\nfeatures\t{}\nspace_sha256\t{}\nrows\t{}\n",
            self.dim,
            self.space_checksum,
            self.rows.len()
        );
        for (row, label) in self.rows.iter().zip(&self.labels) {
            write!(s, "{}\t{}\t{}\t", row.pair.x, row.pair.y, label.as_deref().unwrap_or("")).unwrap();
            let dense = row.vector.to_dense();
            for (i, v) in dense.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{v}").unwrap();
            }
            s.push('\n');
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
            Some((_, "# pairclass dataset v1")) => {}
            other => {
                return Err(Error::FormatVersion {
                    path: path.to_path_buf(),
                    found: other.map(|(_, l)| l.to_owned()).unwrap_or_default(),
                    expected: "# pairclass dataset v1".into(),
                })
            }
        }
        let mut field = |name: &str| -> Result<String> {
            let (n, l) = lines.next().ok_or_else(|| Error::parse(path, 0, format!("missing {name}")))?;
            l.strip_prefix(name)
                .and_then(|v| v.strip_prefix('\t'))
                .map(str::to_owned)
                .ok_or_else(|| Error::parse(path, n, format!("expected {name}")))
        };
        let dim: usize = field("features")?
            .parse()
            .map_err(|_| Error::parse(path, 2, "bad feature count"))?;
        let checksum = field("space_sha256")?;
        let rows: usize = field("rows")?.parse().map_err(|_| Error::parse(path, 4, "bad row count"))?;
        let mut data = Dataset::new(dim, checksum);
        for (n, line) in lines {
            let mut parts = line.splitn(4, '\t');
            let (Some(x), Some(y), Some(label), Some(values)) = (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::parse(path, n, "expected x, y, label, values"));
            };
            let dense: Vec<f64> = if values.is_empty() {
                Vec::new()
            } else {
                values
                    .split(',')
                    .map(|v| v.parse::<f64>().map_err(|_| Error::parse(path, n, format!("bad value {v:?}"))))
                    .collect::<Result<_>>()?
            };
            if dense.len() != dim {
                return Err(Error::parse(path, n, format!("expected {dim} values, found {}", dense.len())));
            }
            let label = (!label.is_empty()).then(|| label.to_owned());
            data.push(
                FeatureVector {
                    pair: WordPair::new(x, y),
                    vector: SparseVec::from_dense(&dense),
                },
                label,
            )?;
        }
        if data.len() != rows {
            return Err(Error::parse(path, 0, format!("expected {rows} rows, found {}", data.len())));
        }
        Ok(data)
    }
}

/// One row per input pair, in input order. Every pair must be present in
/// `table`, possibly with no phrases.
pub fn build_matrix(
    pairs: &[(WordPair, Option<String>)],
    table: &PhraseTable,
    space: &FeatureSpace,
) -> Result<Dataset> {
    let rows: Vec<FeatureVector> = pairs
        .par_iter()
        .map(|(pair, _)| {
            table
                .get(pair)
                .map(|phrases| build_vector(pair, phrases, space))
                .ok_or_else(|| Error::InvalidArgument(format!("pair {pair} missing from phrase table")))
        })
        .collect::<Result<_>>()?;
    let mut data = Dataset::new(space.len(), space.checksum());
    for (row, (_, label)) in rows.into_iter().zip(pairs) {
        data.push(row, label.clone())?;
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::select_features;

    fn phrase(words: &[&str], x: usize, y: usize) -> PhraseMatch {
        PhraseMatch::new(words.iter().map(|s| s.to_string()).collect(), x, y).unwrap()
    }

    fn toy() -> PhraseTable {
        let mut t = PhraseTable::new();
        t.insert(
            WordPair::new("a", "aa"),
            vec![phrase(&["a", "of", "aa"], 0, 2), phrase(&["a", "of", "aa"], 0, 2)],
        );
        t.insert(
            WordPair::new("b", "bb"),
            vec![phrase(&["b", "of", "bb"], 0, 2), phrase(&["b", "to", "bb"], 0, 2)],
        );
        t.insert(WordPair::new("c", "cc"), vec![]);
        t
    }

    #[test]
    fn hand_counted_vectors() {
        let table = toy();
        let space = select_features(&table, 1).unwrap();
        // Three slots: "X * Y" (2 pairs), "X of Y" (2 pairs), "X to Y" (1 pair).
        let names: Vec<String> = space.patterns().iter().map(|p| p.canonical()).collect();
        assert_eq!(names, ["X * Y", "X of Y", "X to Y"]);

        let a = build_vector(&WordPair::new("a", "aa"), table.get(&WordPair::new("a", "aa")).unwrap(), &space);
        // f = (2, 2, 0): raw (ln 3, ln 3, 0)
        let r = 3f64.ln();
        let n = (2.0 * r * r).sqrt();
        for (g, e) in a.vector.to_dense().iter().zip([r / n, r / n, 0.0]) {
            assert!((g - e).abs() < 1e-12);
        }

        let b = build_vector(&WordPair::new("b", "bb"), table.get(&WordPair::new("b", "bb")).unwrap(), &space);
        // f = (2, 1, 1): raw (ln 3, ln 2, ln 2)
        let (r3, r2) = (3f64.ln(), 2f64.ln());
        let n = (r3 * r3 + 2.0 * r2 * r2).sqrt();
        let got = b.vector.to_dense();
        for (g, e) in got.iter().zip([r3 / n, r2 / n, r2 / n]) {
            assert!((g - e).abs() < 1e-12);
        }

        let c = build_vector(&WordPair::new("c", "cc"), &[], &space);
        assert!(c.vector.is_zero());
        assert_eq!(c.vector.dim(), 3);
    }

    #[test]
    fn equal_log_values_normalize_to_half_root_two() {
        let mut t = PhraseTable::new();
        t.insert(WordPair::new("a", "b"), vec![phrase(&["a", "of", "b"], 0, 2)]);
        let space = select_features(&t, 2).unwrap();
        assert_eq!(space.len(), 2);
        let v = build_vector(&WordPair::new("a", "b"), t.get(&WordPair::new("a", "b")).unwrap(), &space);
        for x in v.vector.to_dense() {
            assert!((x - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        }
    }

    #[test]
    fn matrix_rows_match_vectors() {
        let table = toy();
        let space = select_features(&table, 1).unwrap();
        let pairs: Vec<(WordPair, Option<String>)> = table
            .iter()
            .map(|(p, _)| (p.clone(), Some("r".to_string())))
            .collect();
        let data = build_matrix(&pairs, &table, &space).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.zero_rows(), 1);
        for (row, (p, _)) in data.rows.iter().zip(&pairs) {
            assert_eq!(row, &build_vector(p, table.get(p).unwrap(), &space));
        }
        assert!(build_matrix(&[], &table, &space).unwrap().is_empty());
        let missing = [(WordPair::new("q", "r"), None)];
        assert!(build_matrix(&missing, &table, &space).is_err());
    }

    #[test]
    fn push_checks_dimension() {
        let mut data = Dataset::new(3, "x");
        let row = FeatureVector {
            pair: WordPair::new("a", "b"),
            vector: SparseVec::zeros(4),
        };
        assert!(matches!(data.push(row, None), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dump_reloads_bit_exact() {
        let table = toy();
        let space = select_features(&table, 1).unwrap();
        let pairs = vec![
            (WordPair::new("a", "aa"), Some("one".to_string())),
            (WordPair::new("b", "bb"), None),
            (WordPair::new("c", "cc"), Some("two".to_string())),
        ];
        let data = build_matrix(&pairs, &table, &space).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.tsv");
        data.write(&path).unwrap();
        let back = Dataset::read(&path).unwrap();
        assert_eq!(back, data);
        for (a, b) in back.rows.iter().zip(&data.rows) {
            let bits = |v: &SparseVec| v.to_dense().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.vector), bits(&b.vector));
        }
    }
}
