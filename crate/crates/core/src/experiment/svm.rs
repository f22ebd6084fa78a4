//! Linear SVM trained with Pegasos-style stochastic subgradient descent.
//!
//! Minimizes `lambda/2 * |w|^2 + mean(hinge)` over labels in `{-1, +1}`
//! with step size `1/(lambda * t)`, an unregularized bias, and the
//! averaged iterate as the returned solution. Written out longhand on
//! purpose: the training loop is part of what this crate is for, and it
//! has to be deterministic under a seed down to the bit.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda: 1e-4,
            epochs: 200,
            seed: 1,
        }
    }
}

/// Mean and standard deviation per feature column, for z-scoring.
///
/// The standard deviation is the population form (`/ m`). Constant columns
/// get a standard deviation of 1 so they standardize to exactly zero
/// instead of dividing by zero.
pub fn standardize_fit(rows: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    if rows.len() < 2 {
        return Err(Error::InvalidArgument(
            "standardization needs at least two rows".to_string(),
        ));
    }
    let dim = rows[0].len();
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    let m = rows.len() as f64;
    let mut means = vec![0.0; dim];
    for row in rows {
        for (mean, value) in means.iter_mut().zip(row) {
            *mean += value;
        }
    }
    for mean in &mut means {
        *mean /= m;
    }
    let mut stds = vec![0.0; dim];
    for row in rows {
        for ((std, value), mean) in stds.iter_mut().zip(row).zip(&means) {
            let d = value - mean;
            *std += d * d;
        }
    }
    for std in &mut stds {
        *std = (*std / m).sqrt();
        if *std == 0.0 {
            *std = 1.0;
        }
    }
    Ok((means, stds))
}

pub fn standardize_apply(row: &[f64], means: &[f64], stds: &[f64]) -> Result<Vec<f64>> {
    if row.len() != means.len() || means.len() != stds.len() {
        return Err(Error::DimensionMismatch {
            expected: means.len(),
            got: row.len(),
        });
    }
    Ok(row
        .iter()
        .zip(means)
        .zip(stds)
        .map(|((x, mean), std)| (x - mean) / std)
        .collect())
}

/// Trains on standardized rows with labels `+1.0` / `-1.0` and returns
/// `(weights, bias)` of the averaged iterate.
///
/// Identical inputs and seed give bit-identical models: the only
/// randomness is the per-epoch ChaCha8 shuffle, and every floating-point
/// operation runs in a fixed order.
pub fn train_linear_svm(
    rows: &[Vec<f64>],
    labels: &[f64],
    params: Hyperparams,
) -> Result<(Vec<f64>, f64)> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "training needs matching rows and labels, got {} and {}",
            rows.len(),
            labels.len()
        )));
    }
    if !(params.lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".to_string()));
    }
    if params.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1".to_string()));
    }
    let dim = rows[0].len();
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
    }
    for &y in labels {
        if y != 1.0 && y != -1.0 {
            return Err(Error::InvalidArgument(format!(
                "labels must be +1 or -1, got {y}"
            )));
        }
    }
    if labels.iter().all(|&y| y == 1.0) || labels.iter().all(|&y| y == -1.0) {
        return Err(Error::SingleClass);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();

    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut w_avg = vec![0.0f64; dim];
    let mut b_avg = 0.0f64;
    let mut t = 0u64;

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (params.lambda * t as f64);
            let row = &rows[i];
            let y = labels[i];
            let margin = y * (dot(&w, row) + b);

            // Shrink from the regularizer; 1 - eta*lambda is exactly
            // 1 - 1/t, which zeroes w on the very first step.
            let shrink = 1.0 - eta * params.lambda;
            for wj in &mut w {
                *wj *= shrink;
            }
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += eta * y * xj;
                }
                b += eta * y;
            }

            // Running mean of the iterates.
            let inv_t = 1.0 / t as f64;
            for (aj, wj) in w_avg.iter_mut().zip(&w) {
                *aj += (wj - *aj) * inv_t;
            }
            b_avg += (b - b_avg) * inv_t;
        }
    }
    Ok((w_avg, b_avg))
}

/// The primal objective `lambda/2 * |w|^2 + mean(hinge)`; exposed so tests
/// can compare a trained model against a longer-run reference.
pub fn svm_objective(w: &[f64], b: f64, rows: &[Vec<f64>], labels: &[f64], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * dot(w, w);
    let hinge: f64 = rows
        .iter()
        .zip(labels)
        .map(|(row, &y)| (1.0 - y * (dot(w, row) + b)).max(0.0))
        .sum();
    reg + hinge / rows.len() as f64
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
