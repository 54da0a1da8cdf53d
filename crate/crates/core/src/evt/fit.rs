//! Maximum likelihood for block maxima.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::optim::NelderMead;

/// Open interval the free GEV shape is restricted to.
pub const GEV_SHAPE_BOUNDS: (f64, f64) = (-0.5, 0.95);

const MIN_GUMBEL_MAXIMA: usize = 8;
const MIN_GEV_MAXIMA: usize = 20;
const GUMBEL_MAX_ITER: usize = 200;
const GUMBEL_TOL: f64 = 1e-10;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelFit {
    pub location: f64,
    pub scale: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevFit {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
    pub log_likelihood: f64,
}

fn check_sample(maxima: &[f64], min: usize) -> Result<(f64, f64)> {
    if maxima.len() < min {
        return Err(Error::InsufficientData {
            n: maxima.len(),
            required: min,
        });
    }
    if maxima.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite block maximum".into()));
    }
    let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-14 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateSample("all block maxima are equal".into()));
    }
    Ok((lo, hi))
}

pub fn gumbel_log_likelihood(maxima: &[f64], location: f64, scale: f64) -> f64 {
    gev_log_likelihood(maxima, location, scale, 0.0)
}

/// GEV log-likelihood; `-inf` outside the support or for non-positive scale.
pub fn gev_log_likelihood(maxima: &[f64], location: f64, scale: f64, shape: f64) -> f64 {
    if !(scale > 0.0) || !scale.is_finite() {
        return f64::NEG_INFINITY;
    }
    let n = maxima.len() as f64;
    let mut ll = -n * scale.ln();
    if shape.abs() < 1e-12 {
        for &x in maxima {
            let z = (x - location) / scale;
            ll -= z + (-z).exp();
        }
        return ll;
    }
    for &x in maxima {
        let gz = shape * (x - location) / scale;
        if gz <= -1.0 {
            return f64::NEG_INFINITY;
        }
        let log_t = gz.ln_1p();
        ll -= (1.0 + 1.0 / shape) * log_t + (-log_t / shape).exp();
    }
    ll
}

/// Gumbel MLE via the profile equation in the scale,
///
/// ```text
/// b = x̄ − Σ x e^{−x/b} / Σ e^{−x/b},    a = −b log(n⁻¹ Σ e^{−x/b})
/// ```
///
/// solved by Newton steps safeguarded with bisection on a bracket of
/// `[1e-8, 10] × range`.
pub fn fit_gumbel_mle(maxima: &[f64]) -> Result<GumbelFit> {
    let (lo, hi) = check_sample(maxima, MIN_GUMBEL_MAXIMA)?;
    let range = hi - lo;
    let z: Vec<f64> = maxima.iter().map(|x| (x - lo) / range).collect();
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;

    // g(b) = z̄ − b − E_w[z], strictly decreasing in b.
    let eval = |b: f64| -> (f64, f64) {
        let mut sw = 0.0;
        let mut swz = 0.0;
        let mut swz2 = 0.0;
        for &v in &z {
            let w = (-v / b).exp();
            sw += w;
            swz += w * v;
            swz2 += w * v * v;
        }
        let m1 = swz / sw;
        let var = (swz2 / sw - m1 * m1).max(0.0);
        (mean - b - m1, -1.0 - var / (b * b))
    };

    let (mut a_lo, mut a_hi) = (1e-8, 10.0);
    if eval(a_lo).0 <= 0.0 || eval(a_hi).0 >= 0.0 {
        return Err(Error::DegenerateSample(
            "Gumbel profile equation has no root in the scale bracket".into(),
        ));
    }
    // Moment estimate as the starting point.
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut b = (var.sqrt() * 6f64.sqrt() / std::f64::consts::PI).clamp(a_lo * 10.0, a_hi / 10.0);
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > GUMBEL_MAX_ITER {
            return Err(Error::NonConvergence {
                what: "Gumbel profile likelihood",
                iterations: GUMBEL_MAX_ITER,
            });
        }
        let (g, dg) = eval(b);
        if g > 0.0 {
            a_lo = b;
        } else {
            a_hi = b;
        }
        let mut next = b - g / dg;
        if !(next > a_lo && next < a_hi) {
            next = 0.5 * (a_lo + a_hi);
        }
        let step = (next - b).abs();
        b = next;
        if step <= GUMBEL_TOL * b || a_hi - a_lo <= GUMBEL_TOL * b {
            break;
        }
    }

    let mean_w = z.iter().map(|v| (-v / b).exp()).sum::<f64>() / n;
    let a = -b * mean_w.ln();
    let location = lo + range * a;
    let scale = range * b;
    Ok(GumbelFit {
        location,
        scale,
        log_likelihood: gumbel_log_likelihood(maxima, location, scale),
        iterations,
    })
}

/// Gumbel method-of-moments start: `σ = s√6/π`, `μ = x̄ − γ_E σ`.
pub fn moment_start(maxima: &[f64]) -> (f64, f64) {
    let n = maxima.len() as f64;
    let mean = maxima.iter().sum::<f64>() / n;
    let var = maxima.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sigma = (var.sqrt() * 6f64.sqrt() / std::f64::consts::PI).max(f64::MIN_POSITIVE);
    (mean - EULER_GAMMA * sigma, sigma)
}

struct Standardized {
    z: Vec<f64>,
    center: f64,
    spread: f64,
}

impl Standardized {
    fn new(maxima: &[f64]) -> Self {
        let n = maxima.len() as f64;
        let center = maxima.iter().sum::<f64>() / n;
        let spread = (maxima.iter().map(|v| (v - center).powi(2)).sum::<f64>() / n).sqrt();
        Self {
            z: maxima.iter().map(|v| (v - center) / spread).collect(),
            center,
            spread,
        }
    }

    fn to_z(&self, location: f64, scale: f64) -> (f64, f64) {
        ((location - self.center) / self.spread, scale / self.spread)
    }

    fn from_z(&self, location: f64, scale: f64) -> (f64, f64) {
        (self.center + self.spread * location, self.spread * scale)
    }
}

fn in_shape_box(shape: f64) -> bool {
    shape > GEV_SHAPE_BOUNDS.0 && shape < GEV_SHAPE_BOUNDS.1
}

/// GEV MLE over `(μ, σ, γ)` with `γ` restricted to [`GEV_SHAPE_BOUNDS`].
///
/// Nelder–Mead on `(μ, log σ, γ)` of standardized data, started from the
/// Gumbel MLE and from the moment start at `γ ∈ {−0.1, 0, 0.1, 0.3}`; the best
/// optimum is polished by one restart. Parameters outside the support get
/// `-inf` likelihood.
pub fn fit_gev_mle(maxima: &[f64]) -> Result<GevFit> {
    check_sample(maxima, MIN_GEV_MAXIMA)?;
    let s = Standardized::new(maxima);
    let nll = |p: &[f64]| -> f64 {
        if !in_shape_box(p[2]) {
            return f64::INFINITY;
        }
        -gev_log_likelihood(&s.z, p[0], p[1].exp(), p[2])
    };

    let mut starts: Vec<[f64; 3]> = Vec::new();
    if let Ok(g) = fit_gumbel_mle(&s.z) {
        starts.push([g.location, g.scale.ln(), 0.0]);
    }
    let (mu0, sigma0) = moment_start(&s.z);
    for shape in [-0.1, 0.0, 0.1, 0.3] {
        starts.push([mu0, sigma0.ln(), shape]);
    }

    let nm = NelderMead::default();
    let steps = [0.1, 0.1, 0.05];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut any_converged = false;
    for start in &starts {
        if !nll(start).is_finite() {
            continue;
        }
        let m = nm.minimize(nll, start, &steps);
        any_converged |= m.converged;
        if best.as_ref().is_none_or(|(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }
    let Some((x, _)) = best else {
        return Err(Error::DegenerateSample("no feasible GEV starting point".into()));
    };
    let polished = nm.minimize(nll, &x, &steps);
    log::debug!("GEV polish: {} iterations", polished.iterations);
    if !(any_converged || polished.converged) {
        return Err(Error::NonConvergence {
            what: "GEV likelihood",
            iterations: nm.max_iter,
        });
    }
    let (location, scale) = s.from_z(polished.x[0], polished.x[1].exp());
    let shape = polished.x[2];
    Ok(GevFit {
        location,
        scale,
        shape,
        log_likelihood: gev_log_likelihood(maxima, location, scale, shape),
    })
}

/// GEV MLE for location and scale with the shape held fixed.
pub fn fit_gev_fixed_shape(maxima: &[f64], shape: f64) -> Result<GevFit> {
    check_sample(maxima, MIN_GUMBEL_MAXIMA)?;
    if !shape.is_finite() {
        return Err(Error::InvalidInput(format!("shape {shape} is not finite")));
    }
    let s = Standardized::new(maxima);
    let nll = |p: &[f64]| -gev_log_likelihood(&s.z, p[0], p[1].exp(), shape);

    let mut start = match fit_gumbel_mle(maxima) {
        Ok(g) => {
            let (m, sc) = s.to_z(g.location, g.scale);
            [m, sc.ln()]
        }
        Err(_) => {
            let (m, sc) = moment_start(&s.z);
            [m, sc.ln()]
        }
    };
    // For heavy shapes the Gumbel start can sit outside the support; widen
    // the scale until every observation is inside.
    let mut tries = 0;
    while !nll(&start).is_finite() {
        start[1] += 0.5;
        tries += 1;
        if tries > 60 {
            return Err(Error::DegenerateSample(
                "no feasible start for fixed-shape GEV fit".into(),
            ));
        }
    }
    let nm = NelderMead::default();
    let first = nm.minimize(nll, &start, &[0.1, 0.1]);
    let m = nm.minimize(nll, &first.x, &[0.05, 0.05]);
    if !(first.converged || m.converged) {
        return Err(Error::NonConvergence {
            what: "fixed-shape GEV likelihood",
            iterations: nm.max_iter,
        });
    }
    let (location, scale) = s.from_z(m.x[0], m.x[1].exp());
    Ok(GevFit {
        location,
        scale,
        shape,
        log_likelihood: gev_log_likelihood(maxima, location, scale, shape),
    })
}

/// Likelihood-ratio test of `γ = 0` (Gumbel) inside the GEV family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodRatio {
    pub statistic: f64,
    pub p_value: f64,
    pub gev: GevFit,
    pub gumbel: GumbelFit,
}

impl LikelihoodRatio {
    pub fn rejects_gumbel(&self, level: f64) -> bool {
        self.p_value < level
    }
}

pub fn likelihood_ratio_gumbel(maxima: &[f64]) -> Result<LikelihoodRatio> {
    let gev = fit_gev_mle(maxima)?;
    let gumbel = fit_gumbel_mle(maxima)?;
    let statistic = (2.0 * (gev.log_likelihood - gumbel.log_likelihood)).max(0.0);
    let chi2 = ChiSquared::new(1.0).expect("one degree of freedom");
    Ok(LikelihoodRatio {
        statistic,
        p_value: chi2.sf(statistic),
        gev,
        gumbel,
    })
}
