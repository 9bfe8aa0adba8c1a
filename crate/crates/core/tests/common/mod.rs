//! Independent reference implementations shared by integration tests.
#![allow(dead_code)]

use pairclass::classifier::rbf_kernel;
use pairclass::vector::SparseVec;

/// Dual objective `sum a - 1/2 a' Q a` with `Q_ij = y_i y_j K_ij`.
pub fn dual_objective(q: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        quad += alpha[i] * q[i].iter().zip(alpha).map(|(a, b)| a * b).sum::<f64>();
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

pub fn q_matrix(xs: &[SparseVec], y: &[f64], gamma: f64) -> Vec<Vec<f64>> {
    (0..xs.len())
        .map(|i| {
            (0..xs.len())
                .map(|j| y[i] * y[j] * rbf_kernel(&xs[i], &xs[j], gamma).unwrap())
                .collect()
        })
        .collect()
}

/// Euclidean projection onto `{0 <= a <= c, y'a = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(z: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> {
        z.iter()
            .zip(y)
            .map(|(&zi, &yi)| (zi - lam * yi).clamp(0.0, c))
            .collect()
    };
    let h = |lam: f64| -> f64 { at(lam).iter().zip(y).map(|(a, y)| a * y).sum() };
    let bound = z.iter().map(|v| v.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    // h is non-increasing in lam.
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Largest eigenvalue of `Q` restricted to the hyperplane `y'a = 0`, by
/// power iteration. Gradient components along `y` vanish under projection
/// onto the feasible set, so this is the step-size constant that matters.
fn restricted_lipschitz(q: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = y.len();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let proj = |v: &mut Vec<f64>| {
        let d: f64 = v.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / yy;
        for (a, b) in v.iter_mut().zip(y) {
            *a -= d * b;
        }
    };
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
    proj(&mut v);
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 1e-12;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        let mut w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i][j] * v[j]).sum()).collect();
        proj(&mut w);
        lambda = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        v = w;
    }
    (lambda * 1.05).max(1e-12)
}

/// Primal objective minimized over the bias, minus the dual objective, at a
/// feasible `a`. Weak duality makes this an upper bound on the distance from
/// `a`'s objective to the optimum.
fn certified_gap(q: &[Vec<f64>], y: &[f64], c: f64, a: &[f64]) -> f64 {
    let n = y.len();
    // f_i = sum_j a_j y_j K_ij = y_i (Q a)_i
    let f: Vec<f64> = (0..n)
        .map(|i| y[i] * (0..n).map(|j| q[i][j] * a[j]).sum::<f64>())
        .collect();
    let w2: f64 = (0..n).map(|i| a[i] * y[i] * f[i]).sum();
    let hinge = |b: f64| -> f64 { (0..n).map(|i| (1.0 - y[i] * (f[i] + b)).max(0.0)).sum() };
    // The hinge sum is piecewise linear in b with kinks at b = y_i - f_i.
    let best_hinge = (0..n)
        .map(|i| hinge(y[i] - f[i]))
        .fold(f64::INFINITY, f64::min);
    let primal = 0.5 * w2 + c * best_hinge;
    let dual = a.iter().sum::<f64>() - 0.5 * w2;
    primal - dual
}

/// Accelerated projected gradient ascent on the dual from `a = 0`, with
/// adaptive restarts, run until a certified duality gap below `1e-5`.
/// Returns the dual objective reached and the final certified gap.
pub fn reference_dual(q: &[Vec<f64>], y: &[f64], c: f64) -> (f64, f64) {
    let n = y.len();
    let mut step = 1.0 / restricted_lipschitz(q, y);
    let mut x = vec![0.0; n];
    let mut v = x.clone();
    let mut t = 1.0f64;
    let mut fx = dual_objective(q, &x);
    let mut gap = f64::INFINITY;
    for it in 0..2_000_000 {
        if it % 50 == 0 {
            gap = certified_gap(q, y, c, &x);
            if gap < 1e-5 {
                break;
            }
        }
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - q[i].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let z: Vec<f64> = v.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
        let nx = project(&z, y, c);
        let obj = dual_objective(q, &nx);
        if obj < fx {
            if t == 1.0 {
                // A plain gradient step failed to ascend: the step is too
                // long for this region.
                step /= 2.0;
            }
            v = x.clone();
            t = 1.0;
            continue;
        }
        let nt = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        v = nx
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (t - 1.0) / nt * (a - b))
            .collect();
        x = nx;
        fx = obj;
        t = nt;
    }
    (fx, gap)
}

/// Every `(i, j)` position pair inside a document, kept when one side is an
/// X variant, the other a Y variant, and the gap and widest flanks fit
/// `spec`. Sorted by document, then by the two positions.
pub fn brute_force_phrases(
    docs: &[Vec<u32>],
    vocab: &[String],
    xs: &[u32],
    ys: &[u32],
    spec: &pairclass::index::WindowSpec,
) -> Vec<pairclass::index::PhraseMatch> {
    let mut out = Vec::new();
    for (d, doc) in docs.iter().enumerate() {
        let n = doc.len();
        for i in 0..n {
            // Pairs further apart than the widest gap cannot qualify.
            for j in i + 1..n.min(i + spec.between.max + 2) {
                let x_first = xs.contains(&doc[i]) && ys.contains(&doc[j]);
                let y_first = ys.contains(&doc[i]) && xs.contains(&doc[j]);
                if !(x_first || y_first) || !spec.between.contains(j - i - 1) {
                    continue;
                }
                let before = spec.before.max.min(i);
                let after = spec.after.max.min(n - 1 - j);
                if before < spec.before.min || after < spec.after.min {
                    continue;
                }
                let start = i - before;
                let (xi, yi) = if x_first { (i, j) } else { (j, i) };
                out.push(pairclass::index::PhraseMatch {
                    doc: d as u32,
                    offset: start as u32,
                    tokens: doc[start..=j + after].iter().map(|&w| vocab[w as usize].clone()).collect(),
                    x_index: xi - start,
                    y_index: yi - start,
                    x_first,
                });
            }
        }
    }
    out
}

/// Largest KKT violation of a dual solution under bias `b`, where the
/// decision value is `sum_j a_j y_j K_ij + b`.
pub fn max_kkt_violation(q: &[Vec<f64>], y: &[f64], c: f64, alpha: &[f64], b: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..alpha.len() {
        // q[i][j] * y[i] = y_j K_ij
        let f: f64 = (0..alpha.len()).map(|j| alpha[j] * q[i][j] * y[i]).sum::<f64>() + b;
        let m = y[i] * f;
        let v = if alpha[i] <= 0.0 {
            1.0 - m
        } else if alpha[i] >= c {
            m - 1.0
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}
