//! Logistic calibration of decision values, `P(positive | f) = 1 / (1 +
//! exp(A f + B))`, fitted by Newton's method with backtracking on the
//! regularized likelihood with smoothed targets.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigmoid {
    pub a: f64,
    pub b: f64,
}

impl Sigmoid {
    pub fn probability(&self, decision: f64) -> f64 {
        let t = self.a * decision + self.b;
        if t >= 0.0 {
            let e = (-t).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + t.exp())
        }
    }
}

const MAX_ITER: usize = 100;
const MIN_STEP: f64 = 1e-10;
const RIDGE: f64 = 1e-12;
const EPS: f64 = 1e-5;

/// Fits `(A, B)` to decision values and their class indicators. Targets are
/// `(N+ + 1) / (N+ + 2)` for positives and `1 / (N- + 2)` for negatives.
pub fn fit_sigmoid(decisions: &[f64], positive: &[bool]) -> Result<Sigmoid> {
    if decisions.len() != positive.len() || decisions.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} decisions for {} labels",
            decisions.len(),
            positive.len()
        )));
    }
    if decisions.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument("non-finite decision value".into()));
    }
    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = positive.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let t: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();

    // Without spread in the decisions the slope is unidentifiable; the best
    // fit is the flat sigmoid at the mean target.
    if decisions.iter().all(|&d| d == decisions[0]) {
        let mean = (n_pos * hi + n_neg * lo) / (n_pos + n_neg);
        return Ok(Sigmoid {
            a: 0.0,
            b: ((1.0 - mean) / mean).ln(),
        });
    }

    // Negative log-likelihood, evaluated without overflow.
    let nll = |a: f64, b: f64| -> f64 {
        decisions
            .iter()
            .zip(&t)
            .map(|(&f, &ti)| {
                let z = f * a + b;
                if z >= 0.0 {
                    ti * z + (-z).exp().ln_1p()
                } else {
                    (ti - 1.0) * z + z.exp().ln_1p()
                }
            })
            .sum()
    };

    let mut a = 0.0;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let mut fval = nll(a, b);
    let mut grad_norm = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (RIDGE, RIDGE, 0.0, 0.0, 0.0);
        for (&f, &ti) in decisions.iter().zip(&t) {
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = ti - p;
            g1 += f * d1;
            g2 += d1;
        }
        grad_norm = g1.abs().max(g2.abs());
        if grad_norm < EPS {
            return Ok(Sigmoid { a, b });
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        loop {
            if step < MIN_STEP {
                // No sufficient decrease is possible at this precision.
                return Ok(Sigmoid { a, b });
            }
            let (na, nb) = (a + step * da, b + step * db);
            let nf = nll(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
    }
    Err(Error::Calibration {
        iterations: MAX_ITER,
        a,
        b,
        gradient: grad_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_at_zero() {
        let s = Sigmoid { a: -1.0, b: 0.0 };
        assert_eq!(s.probability(0.0), 0.5);
        assert!(s.probability(3.0) > s.probability(1.0));
        assert!(s.probability(1e6) <= 1.0 && s.probability(-1e6) >= 0.0);
    }

    #[test]
    fn separated_decisions_give_monotone_probabilities() {
        let d = [-2.0, -1.5, -1.0, 1.0, 1.5, 2.0];
        let p = [false, false, false, true, true, true];
        let s = fit_sigmoid(&d, &p).unwrap();
        assert!(s.a < 0.0);
        let probs: Vec<f64> = d.iter().map(|&x| s.probability(x)).collect();
        assert!(probs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn constant_decisions_give_smoothed_base_rate() {
        let d = [0.3; 8];
        let p = [true, true, false, false, false, false, false, false];
        let s = fit_sigmoid(&d, &p).unwrap();
        let t_pos = 3.0 / 4.0;
        let t_neg = 1.0 / 8.0;
        let expected = (2.0 * t_pos + 6.0 * t_neg) / 8.0;
        assert!((s.probability(0.3) - expected).abs() < 1e-6);
    }

    #[test]
    fn recovers_known_sigmoid_from_expected_counts() {
        let truth = Sigmoid { a: -2.0, b: 0.5 };
        let (mut d, mut p) = (Vec::new(), Vec::new());
        for g in 0..61 {
            let f = -3.0 + 0.1 * g as f64;
            let pos = (truth.probability(f) * 400.0).round() as usize;
            for k in 0..400 {
                d.push(f);
                p.push(k < pos);
            }
        }
        let s = fit_sigmoid(&d, &p).unwrap();
        assert!((s.a - truth.a).abs() / truth.a.abs() < 0.05);
        assert!((s.b - truth.b).abs() / truth.b.abs() < 0.05);
    }
}
