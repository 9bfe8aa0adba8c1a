use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::platt::{fit_sigmoid, Sigmoid};
use super::smo::{solve, DualSolution};
use super::{rbf_kernel, Hyperparams};
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::seed;
use crate::vector::SparseVec;

/// Kernel expansion over the support vectors. `sv_indices` name rows of the
/// training input.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    sv_indices: Vec<usize>,
    coef: Vec<f64>,
    svs: Vec<SparseVec>,
    bias: f64,
    gamma: f64,
    dim: usize,
}

impl BinaryModel {
    /// `coef[i]` is `alpha_i * y_i` for support vector `svs[i]`.
    pub fn from_parts(
        sv_indices: Vec<usize>,
        coef: Vec<f64>,
        svs: Vec<SparseVec>,
        bias: f64,
        gamma: f64,
        dim: usize,
    ) -> Result<Self> {
        if sv_indices.len() != coef.len() || coef.len() != svs.len() {
            return Err(Error::InvalidArgument("support vector arrays differ in length".into()));
        }
        if let Some(v) = svs.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        Ok(BinaryModel {
            sv_indices,
            coef,
            svs,
            bias,
            gamma,
            dim,
        })
    }

    pub fn support_indices(&self) -> &[usize] {
        &self.sv_indices
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `sum_i coef_i K(sv_i, v) + b`
    pub fn decision(&self, v: &SparseVec) -> Result<f64> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        let mut sum = 0.0;
        for (sv, c) in self.svs.iter().zip(&self.coef) {
            sum += c * rbf_kernel(sv, v, self.gamma)?;
        }
        Ok(sum + self.bias)
    }

    fn remap(mut self, rows: &[usize]) -> Self {
        for i in &mut self.sv_indices {
            *i = rows[*i];
        }
        self
    }
}

/// Trains on labels in `{-1, +1}`. Returns the model with the dual solution
/// it came from.
pub fn train_binary(xs: &[&SparseVec], y: &[f64], hp: &Hyperparams) -> Result<(BinaryModel, DualSolution)> {
    let sol = solve(xs, y, hp)?;
    let (mut idx, mut coef, mut svs) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            idx.push(i);
            coef.push(a * y[i]);
            svs.push(xs[i].clone());
        }
    }
    let model = BinaryModel::from_parts(idx, coef, svs, sol.bias, hp.gamma, xs[0].dim())?;
    Ok((model, sol))
}

/// Class probabilities from calibrated binary scorers. Two classes share one
/// scorer for the first class; three or more use one scorer per class with
/// the calibrated scores normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedModel {
    classes: Vec<String>,
    scorers: Vec<(BinaryModel, Sigmoid)>,
    hp: Hyperparams,
}

impl CalibratedModel {
    /// Trains on `rows` of `data` with the given labels. The class list is
    /// the sorted set of labels.
    pub fn fit(data: &Dataset, rows: &[usize], labels: &[String], hp: &Hyperparams) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut classes: Vec<String> = labels.to_vec();
        classes.sort();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::Training(format!(
                "need at least two classes, found {}",
                classes.len()
            )));
        }
        let xs: Vec<&SparseVec> = rows
            .iter()
            .map(|&r| {
                data.rows
                    .get(r)
                    .map(|row| &row.vector)
                    .ok_or_else(|| Error::InvalidArgument(format!("row {r} out of range")))
            })
            .collect::<Result<_>>()?;
        let n_scorers = if classes.len() == 2 { 1 } else { classes.len() };
        let scorers = (0..n_scorers)
            .into_par_iter()
            .map(|k| {
                let y: Vec<f64> = labels
                    .iter()
                    .map(|l| if *l == classes[k] { 1.0 } else { -1.0 })
                    .collect();
                let hp_k = Hyperparams {
                    seed: seed::derive(hp.seed, &format!("class {k}")),
                    ..*hp
                };
                let (model, _) = train_binary(&xs, &y, &hp_k)?;
                let decisions: Vec<f64> = xs.iter().map(|x| model.decision(x)).collect::<Result<_>>()?;
                let positive: Vec<bool> = y.iter().map(|&l| l > 0.0).collect();
                let sigmoid = fit_sigmoid(&decisions, &positive)?;
                Ok((model.remap(rows), sigmoid))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CalibratedModel {
            classes,
            scorers,
            hp: *hp,
        })
    }

    pub fn from_parts(classes: Vec<String>, scorers: Vec<(BinaryModel, Sigmoid)>, hp: Hyperparams) -> Result<Self> {
        let expected = if classes.len() == 2 { 1 } else { classes.len() };
        if classes.len() < 2 || scorers.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{} classes need {expected} scorers, got {}",
                classes.len(),
                scorers.len()
            )));
        }
        Ok(CalibratedModel { classes, scorers, hp })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn scorers(&self) -> &[(BinaryModel, Sigmoid)] {
        &self.scorers
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    /// One probability per class, in class order.
    pub fn predict_proba(&self, v: &SparseVec) -> Result<Vec<f64>> {
        if self.classes.len() == 2 {
            let (model, sigmoid) = &self.scorers[0];
            let p = sigmoid.probability(model.decision(v)?);
            return Ok(vec![p, 1.0 - p]);
        }
        let scores: Vec<f64> = self
            .scorers
            .iter()
            .map(|(m, s)| Ok(s.probability(m.decision(v)?)))
            .collect::<Result<_>>()?;
        let total: f64 = scores.iter().sum();
        if total > 0.0 {
            Ok(scores.iter().map(|s| s / total).collect())
        } else {
            let k = scores.len() as f64;
            Ok(vec![1.0 / k; scores.len()])
        }
    }

    /// Index of the most probable class; ties go to the lowest index.
    pub fn predict(&self, v: &SparseVec) -> Result<usize> {
        Ok(argmax(&self.predict_proba(v)?))
    }
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Named calibrated models over one feature space, stored as text with
/// support vectors referenced by dataset row.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub space_checksum: String,
    pub models: Vec<(String, CalibratedModel)>,
}

const BUNDLE_HEADER: &str = "# pairclass model v1";

impl ModelBundle {
    pub fn new(space_checksum: impl Into<String>) -> Self {
        ModelBundle {
            space_checksum: space_checksum.into(),
            models: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, model: CalibratedModel) {
        self.models.push((name.into(), model));
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{BUNDLE_HEADER}\nspace_sha256\t{}\nmodels\t{}\n",
            self.space_checksum,
            self.models.len()
        );
        for (name, m) in &self.models {
            writeln!(s, "model\t{name}\t{}", m.classes.join("\t")).unwrap();
            let hp = &m.hp;
            let passes = hp.max_passes.map_or("auto".to_string(), |p| p.to_string());
            writeln!(s, "hyperparams\t{}\t{}\t{}\t{passes}\t{}", hp.c, hp.gamma, hp.tol, hp.seed).unwrap();
            for (model, sig) in &m.scorers {
                writeln!(
                    s,
                    "scorer\t{}\t{}\t{}\t{}",
                    model.bias,
                    sig.a,
                    sig.b,
                    model.sv_indices.len()
                )
                .unwrap();
                for (i, c) in model.sv_indices.iter().zip(&model.coef) {
                    writeln!(s, "sv\t{i}\t{c}").unwrap();
                }
            }
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Loads a bundle, rebuilding support vectors from `data`. Refuses when
    /// `data` was built over a different feature space.
    pub fn read(path: &Path, data: &Dataset) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lines: Vec<&str> = text.lines().collect();
        if lines.first() != Some(&BUNDLE_HEADER) {
            return Err(Error::FormatVersion {
                path: path.to_path_buf(),
                found: lines.first().unwrap_or(&"").to_string(),
                expected: BUNDLE_HEADER.into(),
            });
        }
        let perr = |n: usize, msg: &str| Error::parse(path, n + 1, msg);
        let field = |n: usize, name: &str| -> Result<Vec<&str>> {
            let l = lines.get(n).ok_or_else(|| perr(n, &format!("missing {name}")))?;
            let mut parts = l.split('\t');
            if parts.next() != Some(name) {
                return Err(perr(n, &format!("expected {name}")));
            }
            Ok(parts.collect())
        };
        let num = |n: usize, s: &str| -> Result<f64> { s.parse().map_err(|_| perr(n, &format!("bad number {s:?}"))) };
        let int = |n: usize, s: &str| -> Result<usize> { s.parse().map_err(|_| perr(n, &format!("bad integer {s:?}"))) };

        let checksum = field(1, "space_sha256")?.join("");
        if checksum != data.space_checksum() {
            return Err(Error::ChecksumMismatch {
                expected: checksum,
                found: data.space_checksum().to_owned(),
            });
        }
        let count = int(2, field(2, "models")?.first().copied().unwrap_or(""))?;
        let mut bundle = ModelBundle::new(checksum);
        let mut n = 3;
        for _ in 0..count {
            let head = field(n, "model")?;
            let (name, classes) = head.split_first().ok_or_else(|| perr(n, "model needs a name"))?;
            let classes: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
            n += 1;
            let h = field(n, "hyperparams")?;
            if h.len() != 5 {
                return Err(perr(n, "expected c, gamma, tol, max_passes, seed"));
            }
            let hp = Hyperparams {
                c: num(n, h[0])?,
                gamma: num(n, h[1])?,
                tol: num(n, h[2])?,
                max_passes: if h[3] == "auto" { None } else { Some(int(n, h[3])?) },
                seed: h[4].parse().map_err(|_| perr(n, "bad seed"))?,
            };
            n += 1;
            let n_scorers = if classes.len() == 2 { 1 } else { classes.len() };
            let mut scorers = Vec::with_capacity(n_scorers);
            for _ in 0..n_scorers {
                let f = field(n, "scorer")?;
                if f.len() != 4 {
                    return Err(perr(n, "expected bias, A, B, support vector count"));
                }
                let (bias, a, b, m) = (num(n, f[0])?, num(n, f[1])?, num(n, f[2])?, int(n, f[3])?);
                n += 1;
                let (mut idx, mut coef, mut svs) = (Vec::new(), Vec::new(), Vec::new());
                for _ in 0..m {
                    let f = field(n, "sv")?;
                    if f.len() != 2 {
                        return Err(perr(n, "expected row and coefficient"));
                    }
                    let row = int(n, f[0])?;
                    let v = data
                        .rows
                        .get(row)
                        .ok_or_else(|| perr(n, &format!("row {row} not in dataset")))?;
                    idx.push(row);
                    coef.push(num(n, f[1])?);
                    svs.push(v.vector.clone());
                    n += 1;
                }
                let model = BinaryModel::from_parts(idx, coef, svs, bias, hp.gamma, data.dim())?;
                scorers.push((model, Sigmoid { a, b }));
            }
            bundle.push(*name, CalibratedModel::from_parts(classes, scorers, hp)?);
        }
        if n != lines.len() {
            return Err(perr(n, "trailing content"));
        }
        Ok(bundle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::pair::WordPair;

    fn dataset(points: &[[f64; 2]]) -> Dataset {
        let mut d = Dataset::new(2, "sum");
        for (i, p) in points.iter().enumerate() {
            let pair = WordPair::new(format!("x{}", letter(i)), format!("y{}", letter(i)));
            d.push(
                FeatureVector {
                    pair,
                    vector: SparseVec::from_dense(p),
                },
                None,
            )
            .unwrap();
        }
        d
    }

    fn letter(i: usize) -> String {
        let mut s = String::new();
        let mut i = i;
        loop {
            s.push((b'a' + (i % 26) as u8) as char);
            i /= 26;
            if i == 0 {
                return s;
            }
        }
    }

    #[test]
    fn empty_model_returns_bias() {
        let m = BinaryModel::from_parts(vec![], vec![], vec![], 0.25, 0.1, 3).unwrap();
        assert_eq!(m.decision(&SparseVec::zeros(3)).unwrap(), 0.25);
        assert!(m.decision(&SparseVec::zeros(2)).is_err());
    }

    #[test]
    fn hand_expanded_decision() {
        let svs = vec![
            SparseVec::from_dense(&[1.0, 0.0]),
            SparseVec::from_dense(&[0.0, 1.0]),
            SparseVec::from_dense(&[0.6, 0.8]),
        ];
        let m = BinaryModel::from_parts(vec![0, 1, 2], vec![0.5, -0.3, 0.2], svs, -0.1, 0.5, 2).unwrap();
        let v = SparseVec::from_dense(&[0.0, 0.0]);
        // every SV is unit length, so each kernel value is exp(-0.5)
        let expected = (0.5 - 0.3 + 0.2) * (-0.5f64).exp() - 0.1;
        assert!((m.decision(&v).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn separable_toy_set_fits_exactly() {
        let mut pts = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            let t = i as f64 / 10.0;
            pts.push([t, 1.0 + t]);
            y.push(1.0);
            pts.push([t, -1.0 - t]);
            y.push(-1.0);
        }
        let xs: Vec<SparseVec> = pts.iter().map(|p| SparseVec::from_dense(p)).collect();
        let refs: Vec<&SparseVec> = xs.iter().collect();
        let hp = Hyperparams {
            c: 10.0,
            gamma: 0.5,
            ..Hyperparams::default()
        };
        let (model, sol) = train_binary(&refs, &y, &hp).unwrap();
        assert!(sol.converged);
        for (x, &l) in xs.iter().zip(&y) {
            assert_eq!(model.decision(x).unwrap().signum(), l);
        }
    }

    #[test]
    fn binary_probabilities_and_class_order() {
        let d = dataset(&[[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [0.1, 0.9]]);
        let labels: Vec<String> = ["pos", "pos", "neg", "neg"].iter().map(|s| s.to_string()).collect();
        let m = CalibratedModel::fit(&d, &[0, 1, 2, 3], &labels, &Hyperparams::default()).unwrap();
        assert_eq!(m.classes(), ["neg", "pos"]);
        let p = m.predict_proba(&SparseVec::from_dense(&[1.0, 0.0])).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[1] > p[0]);
    }

    #[test]
    fn three_clusters() {
        let centers = [[1.0, 0.0], [-0.5, 0.87], [-0.5, -0.87]];
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (k, c) in centers.iter().enumerate() {
            for j in 0..6 {
                let o = 0.05 * (j as f64 - 2.5);
                pts.push([c[0] + o, c[1] - o]);
                labels.push(format!("c{k}"));
            }
        }
        let d = dataset(&pts);
        let rows: Vec<usize> = (0..pts.len()).collect();
        let hp = Hyperparams {
            gamma: 1.0,
            ..Hyperparams::default()
        };
        let m = CalibratedModel::fit(&d, &rows, &labels, &hp).unwrap();
        for (k, c) in centers.iter().enumerate() {
            let probe = SparseVec::from_dense(&[c[0] * 0.9 + 0.02, c[1] * 0.9]);
            let p = m.predict_proba(&probe).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(m.predict(&probe).unwrap(), k);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let d = dataset(&[[1.0, 0.0], [0.0, 1.0]]);
        let labels = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(
            CalibratedModel::fit(&d, &[0, 1], &labels, &Hyperparams::default()),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn bundle_round_trip_and_checksum_refusal() {
        let d = dataset(&[[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [0.1, 0.9], [0.5, 0.5], [0.7, 0.7]]);
        let labels: Vec<String> = ["a", "a", "b", "b", "c", "c"].iter().map(|s| s.to_string()).collect();
        let hp = Hyperparams {
            gamma: 2.0,
            max_passes: Some(500),
            ..Hyperparams::default()
        };
        let three = CalibratedModel::fit(&d, &[0, 1, 2, 3, 4, 5], &labels, &hp).unwrap();
        let two = CalibratedModel::fit(&d, &[1, 3, 5], &labels[..3], &Hyperparams::default()).unwrap();
        let mut bundle = ModelBundle::new("sum");
        bundle.push("three", three);
        bundle.push("two", two);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        bundle.write(&path).unwrap();
        assert_eq!(ModelBundle::read(&path, &d).unwrap(), bundle);

        let other = Dataset::new(2, "different");
        assert!(matches!(
            ModelBundle::read(&path, &other),
            Err(Error::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.25; 4]), 0);
    }
}
