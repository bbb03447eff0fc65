use rand::seq::SliceRandom;

use super::eval::evaluate;
use super::logreg::{fit_logreg, FitOptions};
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::seed;

/// Default penalty grid, in inverse-strength units (larger = weaker penalty).
pub const DEFAULT_INVERSE_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

/// Per-row L2 strength for inverse strength `c` on `n` training rows.
///
/// Minimizing `c * sum(loss) + |w|^2 / 2` and
/// `mean(loss) + l2 * |w|^2 / 2` coincide when `l2 = 1 / (c * n)`.
pub fn l2_from_inverse(c: f64, n: usize) -> f64 {
    1.0 / (c * n as f64)
}

/// Result of cross-validated penalty selection.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    /// Selected grid value (inverse strength).
    pub best: f64,
    /// Grid values in ascending order with mean held-out accuracy, `None`
    /// when every fold was skipped.
    pub scores: Vec<(f64, Option<f64>)>,
}

/// Choose the inverse-strength grid value with the best mean held-out
/// accuracy over a seeded, shuffled `folds`-way split.
///
/// Ties go to the smallest grid value, i.e. the strongest penalty. Folds
/// whose training part has a single class are skipped with a warning.
pub fn select_l2(
    x: &SparseMatrix,
    y: &[bool],
    grid: &[f64],
    folds: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<CvOutcome> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty penalty grid".into()));
    }
    if let Some(bad) = grid.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "grid value {bad} is not positive"
        )));
    }
    if folds < 2 || folds > y.len() {
        return Err(Error::InvalidInput(format!(
            "folds must be in 2..={}, got {folds}",
            y.len()
        )));
    }
    if x.n_rows() != y.len() {
        return Err(Error::InvalidInput(
            "rows and labels differ in length".into(),
        ));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() == 1 {
        return Ok(CvOutcome {
            best: grid[0],
            scores: vec![(grid[0], None)],
        });
    }

    let mut order: Vec<usize> = (0..y.len()).collect();
    order.shuffle(&mut seed::rng(seed));
    let bounds: Vec<usize> = (0..=folds).map(|f| f * order.len() / folds).collect();

    let mut scores = Vec::with_capacity(grid.len());
    for &c in &grid {
        let mut acc_sum = 0.0;
        let mut used = 0usize;
        for f in 0..folds {
            let held = &order[bounds[f]..bounds[f + 1]];
            let train: Vec<usize> = order[..bounds[f]]
                .iter()
                .chain(&order[bounds[f + 1]..])
                .copied()
                .collect();
            let ytr: Vec<bool> = train.iter().map(|&i| y[i]).collect();
            if ytr.iter().all(|&v| v == ytr[0]) {
                log::warn!("CV fold {f}: training part has a single class; skipped");
                continue;
            }
            let model = fit_logreg(
                &x.select_rows(&train),
                &ytr,
                l2_from_inverse(c, train.len()),
                opts,
            )?;
            let preds: Vec<bool> = held
                .iter()
                .map(|&i| super::sigmoid(x.row_dot(i, &model.weights) + model.bias) > 0.5)
                .collect();
            let gold: Vec<bool> = held.iter().map(|&i| y[i]).collect();
            acc_sum += evaluate(&preds, &gold)?.accuracy;
            used += 1;
        }
        scores.push((c, (used > 0).then(|| acc_sum / used as f64)));
    }

    let best = scores
        .iter()
        .filter_map(|&(c, s)| s.map(|s| (c, s)))
        .fold(None::<(f64, f64)>, |best, (c, s)| match best {
            Some((_, bs)) if s <= bs => best,
            _ => Some((c, s)),
        })
        .map(|(c, _)| c)
        .ok_or_else(|| Error::Insufficient("every CV fold was skipped".into()))?;
    Ok(CvOutcome { best, scores })
}
