//! OLS fitting and the Frisch–Waugh–Lovell reduction to a univariate slope.
//!
//! Every influence formula downstream works on a through-origin regression
//! `y = θ x + r`. When a dataset carries controls or an intercept, both `x`
//! and `y` are first replaced by their residuals from a regression on those
//! columns; the slope of the reduced regression equals the multivariate
//! coefficient of interest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold on the pivoted `R` diagonal below which a column is
/// treated as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Regression data: one feature of interest, one outcome, optional controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Control columns, each of length `n`.
    controls: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
    intercept: bool,
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite value in {name} at row {i}"
        )));
    }
    Ok(())
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "feature has {} rows but outcome has {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 3 {
            return Err(Error::InsufficientData {
                n: x.len(),
                required: 3,
            });
        }
        check_finite("feature", &x)?;
        check_finite("outcome", &y)?;
        Ok(Self {
            x,
            y,
            controls: Vec::new(),
            labels: None,
            intercept: false,
        })
    }

    pub fn with_controls(mut self, controls: Vec<Vec<f64>>) -> Result<Self> {
        for (c, col) in controls.iter().enumerate() {
            if col.len() != self.x.len() {
                return Err(Error::InvalidInput(format!(
                    "control {c} has {} rows, expected {}",
                    col.len(),
                    self.x.len()
                )));
            }
            check_finite(&format!("control {c}"), col)?;
        }
        self.controls = controls;
        Ok(self)
    }

    pub fn with_intercept(mut self, intercept: bool) -> Self {
        self.intercept = intercept;
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.x.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} rows",
                labels.len(),
                self.x.len()
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate label {l:?}")));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn controls(&self) -> &[Vec<f64>] {
        &self.controls
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn intercept(&self) -> bool {
        self.intercept
    }

    /// Label of row `i`, falling back to the row index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    /// Number of nuisance columns (controls plus intercept).
    pub fn nuisance_columns(&self) -> usize {
        self.controls.len() + usize::from(self.intercept)
    }

    /// Dataset restricted to `rows`, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let n = self.len();
        if let Some(&bad) = rows.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        let pick = |v: &[f64]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let mut out = Dataset::new(pick(&self.x), pick(&self.y))?
            .with_intercept(self.intercept)
            .with_controls(self.controls.iter().map(|c| pick(c)).collect())?;
        if let Some(labels) = &self.labels {
            out.labels = Some(rows.iter().map(|&i| labels[i].clone()).collect());
        }
        Ok(out)
    }

    /// Dataset with the rows in `removed` dropped; row order is preserved.
    pub fn without(&self, removed: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut drop = vec![false; n];
        for &i in removed {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            drop[i] = true;
        }
        let keep: Vec<usize> = (0..n).filter(|&i| !drop[i]).collect();
        self.select(&keep)
    }
}

/// Householder QR with column pivoting on a set of columns.
///
/// Columns are picked by largest remaining norm, so the magnitudes on the
/// diagonal of `R` are non-increasing and reveal numerical rank.
#[derive(Debug, Clone)]
pub(crate) struct PivotedQr {
    n: usize,
    /// Householder vectors, `reflectors[j]` acts on rows `j..n`.
    reflectors: Vec<Vec<f64>>,
    betas: Vec<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    r_diag: Vec<f64>,
}

impl PivotedQr {
    pub(crate) fn new(columns: &[Vec<f64>]) -> Result<Self> {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if p > n {
            return Err(Error::SingularDesign(format!(
                "{p} nuisance columns for {n} rows"
            )));
        }
        let mut work: Vec<Vec<f64>> = columns.to_vec();
        let mut reflectors = Vec::with_capacity(p);
        let mut betas = Vec::with_capacity(p);
        let mut r_diag = Vec::with_capacity(p);
        let mut first_pivot = 0.0;

        for j in 0..p {
            // Remaining column norms are recomputed exactly; p is small.
            let (best, best_norm) = (j..p)
                .map(|c| (c, work[c][j..].iter().map(|v| v * v).sum::<f64>().sqrt()))
                .fold((j, -1.0), |acc, (c, nrm)| if nrm > acc.1 { (c, nrm) } else { acc });
            if j == 0 {
                first_pivot = best_norm;
            }
            if best_norm <= RANK_TOLERANCE * first_pivot || best_norm == 0.0 {
                return Err(Error::SingularDesign(format!(
                    "nuisance columns have rank {j} < {p}"
                )));
            }
            work.swap(j, best);

            let col = &work[j];
            let alpha = if col[j] >= 0.0 { -best_norm } else { best_norm };
            let mut v: Vec<f64> = col[j..].to_vec();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|a| a * a).sum();
            let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };

            for c in (j + 1)..p {
                let dot: f64 = v.iter().zip(&work[c][j..]).map(|(a, b)| a * b).sum();
                let s = beta * dot;
                for (w, a) in work[c][j..].iter_mut().zip(&v) {
                    *w -= s * a;
                }
            }
            r_diag.push(alpha);
            reflectors.push(v);
            betas.push(beta);
        }
        Ok(Self {
            n,
            reflectors,
            betas,
            r_diag,
        })
    }

    fn apply(&self, j: usize, b: &mut [f64]) {
        let v = &self.reflectors[j];
        let dot: f64 = v.iter().zip(&b[j..]).map(|(a, c)| a * c).sum();
        let s = self.betas[j] * dot;
        for (w, a) in b[j..].iter_mut().zip(v) {
            *w -= s * a;
        }
    }

    /// Residual of `b` after projecting onto the column space.
    pub(crate) fn residual(&self, b: &[f64]) -> Vec<f64> {
        let mut out = b.to_vec();
        for j in 0..self.reflectors.len() {
            self.apply(j, &mut out);
        }
        for v in out.iter_mut().take(self.reflectors.len()) {
            *v = 0.0;
        }
        for j in (0..self.reflectors.len()).rev() {
            self.apply(j, &mut out);
        }
        out
    }

    /// Diagonal of the projection matrix onto the column space.
    pub(crate) fn leverage(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.n];
        for k in 0..self.reflectors.len() {
            let mut e = vec![0.0; self.n];
            e[k] = 1.0;
            for j in (0..self.reflectors.len()).rev() {
                self.apply(j, &mut e);
            }
            for (hi, qi) in h.iter_mut().zip(&e) {
                *hi += qi * qi;
            }
        }
        h
    }

    #[cfg(test)]
    pub(crate) fn r_diag(&self) -> &[f64] {
        &self.r_diag
    }
}

fn nuisance_matrix(dataset: &Dataset) -> Vec<Vec<f64>> {
    let mut cols = Vec::with_capacity(dataset.nuisance_columns());
    if dataset.intercept {
        cols.push(vec![1.0; dataset.len()]);
    }
    cols.extend(dataset.controls.iter().cloned());
    cols
}

/// Residualize `x` and `y` on the intercept and controls.
///
/// The returned dataset has no controls and no intercept; its through-origin
/// slope equals the coefficient on `x` in the original regression.
pub fn partial_out(dataset: &Dataset) -> Result<Dataset> {
    Ok(reduce(dataset)?.0)
}

fn reduce(dataset: &Dataset) -> Result<(Dataset, Vec<f64>)> {
    if dataset.nuisance_columns() == 0 {
        return Ok((dataset.clone(), vec![0.0; dataset.len()]));
    }
    let qr = PivotedQr::new(&nuisance_matrix(dataset))?;
    let reduced = Dataset {
        x: qr.residual(&dataset.x),
        y: qr.residual(&dataset.y),
        controls: Vec::new(),
        labels: dataset.labels.clone(),
        intercept: false,
    };
    Ok((reduced, qr.leverage()))
}

/// Options for [`fit_ols_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Ridge penalty on the reduced slope. The influence formulas are exact
    /// only for `0`.
    pub ridge: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { ridge: 0.0 }
    }
}

/// A fitted through-origin regression on the reduced (partialled-out) data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub(crate) theta_hat: f64,
    pub(crate) x: Vec<f64>,
    pub(crate) residuals: Vec<f64>,
    pub(crate) leverage: Vec<f64>,
    pub(crate) control_leverage: Vec<f64>,
    pub(crate) d_total: f64,
    pub(crate) n_params: usize,
    pub(crate) rows: Vec<usize>,
    pub(crate) ridge: f64,
}

impl RegressionFit {
    /// Through-origin fit of `y` on `x` without any reduction step.
    pub fn through_origin(x: &[f64], y: &[f64]) -> Result<Self> {
        fit_ols(&Dataset::new(x.to_vec(), y.to_vec())?)
    }

    pub fn theta_hat(&self) -> f64 {
        self.theta_hat
    }

    /// Reduced feature values.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Reduced-form leverage `x_i² / Σ x_n²`, the one the influence formulas use.
    pub fn leverage(&self) -> &[f64] {
        &self.leverage
    }

    /// Full leverage: reduced-form part plus the projection onto the
    /// nuisance columns.
    pub fn total_leverage(&self) -> Vec<f64> {
        self.leverage
            .iter()
            .zip(&self.control_leverage)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// `Σ x_n²` of the reduced feature.
    pub fn d_total(&self) -> f64 {
        self.d_total
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Feature of interest plus nuisance columns.
    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Original row index of each position in this fit.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Fitted value of the reduced regression at feature value `x`.
    pub fn predict(&self, x: f64) -> f64 {
        self.theta_hat * x
    }
}

/// OLS fit of the coefficient of interest.
pub fn fit_ols(dataset: &Dataset) -> Result<RegressionFit> {
    fit_ols_with(dataset, &FitOptions::default())
}

pub fn fit_ols_with(dataset: &Dataset, options: &FitOptions) -> Result<RegressionFit> {
    let n_params = 1 + dataset.nuisance_columns();
    if dataset.len() <= n_params + 1 {
        return Err(Error::InsufficientData {
            n: dataset.len(),
            required: n_params + 2,
        });
    }
    if !(options.ridge >= 0.0 && options.ridge.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "ridge penalty must be >= 0, got {}",
            options.ridge
        )));
    }
    let (reduced, control_leverage) = reduce(dataset)?;
    let x = reduced.x;
    let y = reduced.y;

    let d_total: f64 = x.iter().map(|v| v * v).sum();
    let scale: f64 = dataset.x.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    if d_total <= RANK_TOLERANCE * scale || d_total == 0.0 {
        return Err(Error::SingularDesign(
            "feature of interest has no variance after partialling out".into(),
        ));
    }
    if options.ridge > 0.0 {
        log::warn!(
            "ridge penalty {} set: influence formulas assume an unpenalized fit",
            options.ridge
        );
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let theta_hat = sxy / (d_total + options.ridge);
    let residuals: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - theta_hat * a).collect();
    let leverage = x.iter().map(|v| v * v / d_total).collect();

    Ok(RegressionFit {
        theta_hat,
        x,
        residuals,
        leverage,
        control_leverage,
        d_total,
        n_params,
        rows: (0..dataset.len()).collect(),
        ridge: options.ridge,
    })
}
