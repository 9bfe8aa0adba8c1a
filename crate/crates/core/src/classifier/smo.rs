//! Sequential minimal optimization for the soft-margin dual
//!
//! ```text
//! maximize   sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! subject to 0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! Optimality is tracked with the two-threshold test: with
//! `F_i = sum_j a_j y_j K_ij - y_i`, the KKT conditions hold to within
//! `tol / 2` once `max over I_low of F <= min over I_up of F + tol`.
//! Training continues past that point until the duality gap is small
//! relative to the objective.

use log::{debug, warn};
use rand::Rng;

use super::kernel::Gram;
use super::Hyperparams;
use crate::error::{Error, Result};
use crate::seed;
use crate::vector::SparseVec;

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Dual objective at the returned `alpha`.
    pub objective: f64,
    pub converged: bool,
    pub passes: usize,
    /// Dual objective after each outer pass.
    pub trace: Vec<f64>,
    /// `b_low - b_up` at exit; at most `tol` when converged.
    pub gap: f64,
    /// Primal minus dual objective at exit.
    pub duality_gap: f64,
}

/// Solves the dual for labels in `{-1, +1}`.
pub fn solve(xs: &[&SparseVec], y: &[f64], hp: &Hyperparams) -> Result<DualSolution> {
    hp.validate()?;
    if xs.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} vectors but {} labels",
            xs.len(),
            y.len()
        )));
    }
    if y.iter().any(|&l| l != 1.0 && l != -1.0) {
        return Err(Error::InvalidArgument("labels must be +1 or -1".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::Training("training data must contain both classes".into()));
    }
    let dim = xs[0].dim();
    for x in xs {
        if x.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.dim(),
            });
        }
        if !x.is_finite() {
            return Err(Error::Training("non-finite feature value".into()));
        }
    }
    let gram = Gram::new(xs, hp.gamma);
    Ok(Smo::new(&gram, y, hp).run())
}

struct Smo<'a> {
    gram: &'a Gram<'a>,
    y: &'a [f64],
    c: f64,
    tol: f64,
    alpha: Vec<f64>,
    f: Vec<f64>,
    b_up: f64,
    i_up: usize,
    b_low: f64,
    i_low: usize,
    max_passes: usize,
    seed: u64,
}

const EPS: f64 = 1e-12;
const GAP_REL: f64 = 1e-7;
const MIN_THRESHOLD: f64 = 1e-9;

impl<'a> Smo<'a> {
    fn new(gram: &'a Gram<'a>, y: &'a [f64], hp: &Hyperparams) -> Self {
        let n = y.len();
        let mut s = Smo {
            gram,
            y,
            c: hp.c,
            tol: hp.tol,
            alpha: vec![0.0; n],
            // All alphas start at zero, so F_i = -y_i.
            f: y.iter().map(|&l| -l).collect(),
            b_up: 0.0,
            i_up: 0,
            b_low: 0.0,
            i_low: 0,
            max_passes: hp.max_passes.unwrap_or(10 * n).max(1),
            seed: hp.seed,
        };
        s.update_thresholds();
        s
    }

    fn in_up(&self, i: usize) -> bool {
        (self.y[i] > 0.0 && self.alpha[i] < self.c) || (self.y[i] < 0.0 && self.alpha[i] > 0.0)
    }

    fn in_low(&self, i: usize) -> bool {
        (self.y[i] > 0.0 && self.alpha[i] > 0.0) || (self.y[i] < 0.0 && self.alpha[i] < self.c)
    }

    fn update_thresholds(&mut self) {
        self.b_up = f64::INFINITY;
        self.b_low = f64::NEG_INFINITY;
        for i in 0..self.y.len() {
            if self.in_up(i) && self.f[i] < self.b_up {
                self.b_up = self.f[i];
                self.i_up = i;
            }
            if self.in_low(i) && self.f[i] > self.b_low {
                self.b_low = self.f[i];
                self.i_low = i;
            }
        }
    }

    fn kkt_within(&self, threshold: f64) -> bool {
        self.b_low <= self.b_up + threshold
    }

    /// Primal objective at the current bias minus the dual objective; an
    /// upper bound on the distance to the dual optimum.
    fn duality_gap(&self) -> f64 {
        let b = -(self.b_low + self.b_up) / 2.0;
        let mut gap = 0.0;
        for i in 0..self.y.len() {
            let (y, a) = (self.y[i], self.alpha[i]);
            let f = self.f[i] + y;
            gap += a * y * f - a + self.c * (1.0 - y * (f + b)).max(0.0);
        }
        gap
    }

    fn objective(&self) -> f64 {
        // sum a_i - 1/2 sum_i a_i y_i (F_i + y_i)
        self.alpha
            .iter()
            .zip(self.y)
            .zip(&self.f)
            .map(|((&a, &y), &f)| a - 0.5 * a * y * (f + y))
            .sum()
    }

    fn run(mut self) -> DualSolution {
        let n = self.y.len();
        let mut rng = seed::rng(self.seed);
        let mut examine_all = true;
        let mut passes = 0;
        let mut trace = Vec::new();
        // Working pairs are chosen against `threshold`, which starts at `tol`
        // and shrinks while the duality gap is still large, so the returned
        // objective is accurate and not merely KKT-feasible.
        let mut threshold = self.tol;
        while passes < self.max_passes {
            if self.kkt_within(threshold) {
                let target = GAP_REL * (1.0 + self.objective().abs());
                if threshold <= MIN_THRESHOLD || self.duality_gap() <= target {
                    break;
                }
                threshold /= 10.0;
                examine_all = true;
                continue;
            }
            let start = rng.gen_range(0..n);
            let mut changed = 0;
            for k in 0..n {
                let i = (start + k) % n;
                let bound = self.alpha[i] <= 0.0 || self.alpha[i] >= self.c;
                if (examine_all || !bound) && self.examine(i, threshold) {
                    changed += 1;
                }
            }
            passes += 1;
            trace.push(self.objective());
            if examine_all {
                if changed == 0 {
                    break;
                }
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
        let converged = self.kkt_within(self.tol);
        if !converged {
            warn!(
                "SMO stopped after {passes} passes without reaching tolerance (gap {:e})",
                self.b_low - self.b_up
            );
        }
        debug!("SMO finished: {passes} passes, objective {}", self.objective());
        DualSolution {
            bias: -(self.b_low + self.b_up) / 2.0,
            objective: self.objective(),
            converged,
            passes,
            trace,
            gap: self.b_low - self.b_up,
            duality_gap: self.duality_gap(),
            alpha: self.alpha,
        }
    }

    /// Pairs `i` with the threshold index it violates most against, if any.
    fn examine(&mut self, i: usize, threshold: f64) -> bool {
        let fi = self.f[i];
        let mut partner = None;
        if self.in_up(i) && fi < self.b_low - threshold {
            partner = Some(self.i_low);
        }
        if self.in_low(i) && fi > self.b_up + threshold {
            let better = match partner {
                Some(j) => (fi - self.f[self.i_up]).abs() > (fi - self.f[j]).abs(),
                None => true,
            };
            if better {
                partner = Some(self.i_up);
            }
        }
        match partner {
            Some(j) if j != i => self.take_step(i, j),
            _ => false,
        }
    }

    /// Clamps to the box, absorbing rounding error at either bound so bound
    /// membership stays exact.
    fn snap(&self, a: f64) -> f64 {
        let slack = 1e-10 * self.c;
        if a < slack {
            0.0
        } else if a > self.c - slack {
            self.c
        } else {
            a
        }
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (f1, f2) = (self.f[i1], self.f[i2]);
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        } else {
            ((a1 + a2 - self.c).max(0.0), (a1 + a2).min(self.c))
        };
        if hi - lo < EPS {
            return false;
        }
        let eta = self.gram.get(i1, i1) + self.gram.get(i2, i2) - 2.0 * self.gram.get(i1, i2);
        let new_a2 = if eta > EPS {
            (a2 + y2 * (f1 - f2) / eta).clamp(lo, hi)
        } else {
            // The objective is linear along the constraint line; its slope
            // in a2 is y2 (F1 - F2).
            let slope = y2 * (f1 - f2);
            if slope > EPS {
                hi
            } else if slope < -EPS {
                lo
            } else {
                return false;
            }
        };
        if (new_a2 - a2).abs() < EPS * (new_a2 + a2 + EPS) {
            return false;
        }
        let new_a2 = self.snap(new_a2);
        let new_a1 = self.snap(a1 + s * (a2 - new_a2));
        let (d1, d2) = ((new_a1 - a1) * y1, (new_a2 - a2) * y2);
        let (r1, r2) = (self.gram.row(i1), self.gram.row(i2));
        for (k, f) in self.f.iter_mut().enumerate() {
            *f += d1 * r1[k] + d2 * r2[k];
        }
        self.alpha[i1] = new_a1;
        self.alpha[i2] = new_a2;
        self.update_thresholds();
        true
    }
}
