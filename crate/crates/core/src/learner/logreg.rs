use std::collections::VecDeque;

use super::sparse::{SparseMatrix, SparseVec};
use crate::error::{Error, Result};

/// Optimizer settings for [`fit_logreg`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Stop once the Euclidean norm of the full gradient (weights and bias)
    /// falls below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// L-BFGS memory.
    pub history: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_iter: 1000,
            history: 10,
        }
    }
}

/// Weights and bias of a fitted L2-regularized logistic regression.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2: f64,
    /// Fraction of positive training labels.
    pub train_prevalence: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

impl LogisticModel {
    pub fn decision(&self, x: &SparseVec) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn predict_proba(&self, x: &SparseVec) -> f64 {
        sigmoid(self.decision(x))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood plus `l2/2 * |w|^2` (bias unpenalized) and its
/// gradient `(d/dw, d/db)`.
pub fn logistic_objective(
    x: &SparseMatrix,
    y: &[bool],
    l2: f64,
    weights: &[f64],
    bias: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.n_rows() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let z = x.row_dot(i, weights) + bias;
        let t = if yi { 1.0 } else { 0.0 };
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        grad_b += r;
        for (c, v) in x.row(i) {
            grad_w[c] += r * v;
        }
    }
    let mut penalty = 0.0;
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
        penalty += w * w;
    }
    (loss / n + 0.5 * l2 * penalty, grad_w, grad_b / n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fit by L-BFGS with Armijo backtracking, starting from all-zero parameters.
///
/// The result depends only on the data, its order and `opts`; no randomness is
/// involved.
pub fn fit_logreg(
    x: &SparseMatrix,
    y: &[bool],
    l2: f64,
    opts: &FitOptions,
) -> Result<LogisticModel> {
    if x.n_rows() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::Insufficient(
            "need at least two training rows".into(),
        ));
    }
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::SingleClass);
    }
    if !(l2 > 0.0 && l2.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "l2 must be positive, got {l2}"
        )));
    }
    if !x.all_finite() {
        return Err(Error::InvalidInput(
            "feature matrix has non-finite values".into(),
        ));
    }

    let d = x.n_cols();
    let eval = |p: &[f64]| {
        let (f, gw, gb) = logistic_objective(x, y, l2, &p[..d], p[d]);
        let mut g = gw;
        g.push(gb);
        (f, g)
    };

    let mut params = vec![0.0; d + 1];
    let (mut f, mut g) = eval(&params);
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.history);
    let mut iterations = 0;
    let mut gnorm = dot(&g, &g).sqrt();

    while gnorm >= opts.grad_tol && iterations < opts.max_iter {
        iterations += 1;

        // Two-loop recursion: dir = -H g.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, yv, rho) in memory.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(yv) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, yv, _)) = memory.back() {
            let gamma = dot(s, yv) / dot(yv, yv);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, yv, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(yv, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            memory.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }

        let mut step = if memory.is_empty() {
            (1.0 / gnorm).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(&dir).map(|(p, d)| p + step * d).collect();
            let (ft, gt) = eval(&trial);
            if ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((next, f_next, g_next)) = accepted else {
            log::debug!("line search stalled at iteration {iterations}, |g| = {gnorm:e}");
            break;
        };

        let s: Vec<f64> = next.iter().zip(&params).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&yv, &yv).sqrt() && sy > 0.0 {
            if memory.len() == opts.history {
                memory.pop_front();
            }
            memory.push_back((s, yv, 1.0 / sy));
        }
        params = next;
        f = f_next;
        g = g_next;
        gnorm = dot(&g, &g).sqrt();
    }

    let converged = gnorm < opts.grad_tol;
    if !converged {
        log::warn!(
            "logistic regression stopped after {iterations} iterations with |g| = {gnorm:e}"
        );
    }
    let bias = params.pop().expect("bias slot");
    Ok(LogisticModel {
        weights: params,
        bias,
        l2,
        train_prevalence: positives as f64 / y.len() as f64,
        iterations,
        grad_norm: gnorm,
        converged,
    })
}
