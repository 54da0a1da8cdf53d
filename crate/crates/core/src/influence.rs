//! Exact influence of observations and sets on the reduced slope.
//!
//! For a through-origin fit with full-sample residuals `r` and reduced feature
//! `x`, removing a set `S` changes the slope by
//!
//! ```text
//! Δ(S) = θ̂ − θ̂_{−S} = Σ_{i∈S} x_i r_i / Σ_{n∉S} x_n²
//! ```
//!
//! Residuals are never recomputed inside [`influence_set`]; the identity holds
//! with the full-sample residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{fit_ols, Dataset, RegressionFit};

/// Leverage at or above `1 - LEVERAGE_TOLERANCE` makes single-point removal undefined.
pub const LEVERAGE_TOLERANCE: f64 = 1e-12;

/// A removal set must leave more than this fraction of `Σ x²`.
pub const REMOVAL_TOLERANCE: f64 = 1e-12;

/// A set of rows together with its exact influence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceSet {
    /// Positions in the fit, in selection order.
    pub indices: Vec<usize>,
    /// `θ̂ − θ̂_{−S}`.
    pub delta: f64,
    /// `x_i r_i` for each index, aligned with `indices`.
    pub contributions: Vec<f64>,
    /// `Σ_{n∉S} x_n²`.
    pub d_remaining: f64,
}

impl InfluenceSet {
    pub fn empty(d_total: f64) -> Self {
        Self {
            indices: Vec::new(),
            delta: 0.0,
            contributions: Vec::new(),
            d_remaining: d_total,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub(crate) fn validate_indices(indices: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in indices {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

/// Influence of removing observation `i`.
pub fn influence_single(fit: &RegressionFit, i: usize) -> Result<f64> {
    let n = fit.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let h = fit.leverage[i];
    if h >= 1.0 - LEVERAGE_TOLERANCE {
        return Err(Error::DegenerateLeverage { index: i, leverage: h });
    }
    let xr = fit.x[i] * fit.residuals[i];
    let d_without = fit.d_total - fit.x[i] * fit.x[i];
    let leave_one_out = xr / d_without;
    debug_assert!({
        let leverage_form = xr / (fit.d_total * (1.0 - h));
        let tol = 1e-12 / (1.0 - h) * leave_one_out.abs().max(f64::MIN_POSITIVE);
        (leverage_form - leave_one_out).abs() <= tol
    });
    Ok(leave_one_out)
}

/// Influence of removing every row in `indices` at once.
pub fn influence_set(fit: &RegressionFit, indices: &[usize]) -> Result<InfluenceSet> {
    validate_indices(indices, fit.n())?;
    if indices.len() >= fit.n() {
        return Err(Error::InvalidInput(format!(
            "cannot remove {} of {} rows",
            indices.len(),
            fit.n()
        )));
    }
    let contributions: Vec<f64> = indices
        .iter()
        .map(|&i| fit.x[i] * fit.residuals[i])
        .collect();
    let removed: f64 = indices.iter().map(|&i| fit.x[i] * fit.x[i]).sum();
    let d_remaining = fit.d_total - removed;
    if d_remaining <= REMOVAL_TOLERANCE * fit.d_total {
        return Err(Error::DegenerateRemoval {
            remaining: d_remaining,
            total: fit.d_total,
        });
    }
    let numerator: f64 = contributions.iter().sum();
    Ok(InfluenceSet {
        indices: indices.to_vec(),
        delta: numerator / d_remaining,
        contributions,
        d_remaining,
    })
}

/// Ground truth: refit without the rows in `indices` and difference the
/// coefficients. Partialling-out is redone on the reduced sample.
pub fn refit_influence_oracle(dataset: &Dataset, indices: &[usize]) -> Result<f64> {
    validate_indices(indices, dataset.len())?;
    let full = fit_ols(dataset)?;
    if indices.is_empty() {
        return Ok(0.0);
    }
    let reduced = fit_ols(&dataset.without(indices)?)?;
    Ok(full.theta_hat - reduced.theta_hat)
}

/// The fit after dropping observation `j`, via the leave-one-out update
/// identities rather than a new factorization:
///
/// ```text
/// (r_i)_{−j} = r_i + x_i Δ({j})
/// (h_i)_{−j} = x_i² / Σ_{n≠j} x_n²
/// ```
pub fn update_after_removal(fit: &RegressionFit, j: usize) -> Result<RegressionFit> {
    let delta = influence_single(fit, j)?;
    let keep = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &a)| a)
            .collect()
    };
    let x = keep(&fit.x);
    let d_total = fit.d_total - fit.x[j] * fit.x[j];
    if d_total <= REMOVAL_TOLERANCE * fit.d_total {
        return Err(Error::DegenerateRemoval {
            remaining: d_total,
            total: fit.d_total,
        });
    }
    let residuals = fit
        .residuals
        .iter()
        .zip(&fit.x)
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, (r, xi))| r + xi * delta)
        .collect();
    let leverage = x.iter().map(|v| v * v / d_total).collect();
    let rows = fit
        .rows
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, &r)| r)
        .collect();
    Ok(RegressionFit {
        theta_hat: fit.theta_hat - delta,
        x,
        residuals,
        leverage,
        control_leverage: keep(&fit.control_leverage),
        d_total,
        n_params: fit.n_params,
        rows,
        ridge: fit.ridge,
    })
}

/// General hat-matrix entry after removing row `k`:
/// `h_ij + h_ik h_kj / (1 − h_k)`.
///
/// The univariate recursion never needs it; kept for cross-checks.
pub fn hat_entry_after_removal(h_ij: f64, h_ik: f64, h_kj: f64, h_k: f64) -> f64 {
    h_ij + h_ik * h_kj / (1.0 - h_k)
}

/// First-order (influence-function) estimate: the closed form without
/// removing `S` from the denominator. Always shrinks toward zero relative to
/// the exact value when the contributions share a sign.
pub fn first_order_influence(fit: &RegressionFit, indices: &[usize]) -> Result<f64> {
    validate_indices(indices, fit.n())?;
    let numerator: f64 = indices
        .iter()
        .map(|&i| fit.x[i] * fit.residuals[i])
        .sum();
    Ok(numerator / fit.d_total)
}
