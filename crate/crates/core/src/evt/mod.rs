//! Extreme value distributions for maximal influence.
//!
//! Two families are used as null models: Gumbel `Λ((x−a)/b)` for light-tailed
//! data or relative-size sets, and Fréchet `Φ_ξ((x−a)/b)` for constant-size
//! sets over polynomially tailed data. Shapes are carried in GEV convention
//! `γ = 1/ξ`, with `γ = 0` meaning Gumbel.

mod fit;
mod tail;

pub use fit::{
    fit_gev_fixed_shape, fit_gev_mle, fit_gumbel_mle, gev_log_likelihood, gumbel_log_likelihood,
    likelihood_ratio_gumbel, moment_start, GevFit, GumbelFit, LikelihoodRatio, GEV_SHAPE_BOUNDS,
};
pub use tail::{default_k_frac, gaussian_hill_reference, hill_tail_index, hill_with_k, HillEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gumbel,
    Frechet,
}

/// A fitted (or specified) extreme value distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvdModel {
    pub family: Family,
    /// `a`.
    pub location: f64,
    /// `b > 0`.
    pub scale: f64,
    /// GEV shape `γ = 1/ξ`; zero for Gumbel.
    pub shape: f64,
    /// Number of block maxima the parameters were fitted on (0 if not fitted).
    pub m_blocks: usize,
    /// Whether the block-size correction has been applied.
    pub corrected: bool,
}

impl EvdModel {
    pub fn gumbel(location: f64, scale: f64) -> Result<Self> {
        check_scale(scale)?;
        Ok(Self {
            family: Family::Gumbel,
            location,
            scale,
            shape: 0.0,
            m_blocks: 0,
            corrected: false,
        })
    }

    /// Fréchet with tail coefficient `ξ = 1/shape`.
    pub fn frechet(location: f64, scale: f64, shape: f64) -> Result<Self> {
        check_scale(scale)?;
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Fréchet shape must be positive, got {shape}"
            )));
        }
        Ok(Self {
            family: Family::Frechet,
            location,
            scale,
            shape,
            m_blocks: 0,
            corrected: false,
        })
    }

    /// Convert GEV parameters `(μ, σ, γ)` with `γ > 0` to the Fréchet form:
    /// `a = μ − σ/γ`, `b = σ/γ`, `ξ = 1/γ`.
    pub fn frechet_from_gev(mu: f64, sigma: f64, gamma: f64) -> Result<Self> {
        Self::frechet(mu - sigma / gamma, sigma / gamma, gamma)
    }

    /// Tail coefficient `ξ`; infinite for Gumbel.
    pub fn tail_coefficient(&self) -> f64 {
        match self.family {
            Family::Gumbel => f64::INFINITY,
            Family::Frechet => 1.0 / self.shape,
        }
    }

    pub fn with_blocks(mut self, m_blocks: usize) -> Self {
        self.m_blocks = m_blocks;
        self
    }

    /// Distribution of the maximum of `m` independent copies of this one.
    ///
    /// Gumbel shifts its location by `b log M`; Fréchet scales by `M^γ`
    /// (max-stability, location unchanged).
    pub fn corrected_for_blocks(mut self, m: usize) -> Self {
        match self.family {
            Family::Gumbel => {
                self.location = correct_block_location(self.location, self.scale, m as f64);
            }
            Family::Frechet => {
                self.scale = correct_block_scale_frechet(self.scale, self.shape, m as f64);
            }
        }
        self.corrected = true;
        self
    }

    /// `(x − a) / b` mapped to the exponent `t` with `F(x) = exp(−t)`.
    fn exponent(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        match self.family {
            Family::Gumbel => (-z).exp(),
            Family::Frechet => {
                if z <= 0.0 {
                    f64::INFINITY
                } else {
                    z.powf(-1.0 / self.shape)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        evd_cdf(self, x)
    }

    pub fn sf(&self, x: f64) -> f64 {
        evd_sf(self, x)
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        evd_quantile(self, q)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let t = self.exponent(x);
        if !t.is_finite() || t == 0.0 {
            return 0.0;
        }
        match self.family {
            Family::Gumbel => t * (-t).exp() / self.scale,
            Family::Frechet => {
                let z = (x - self.location) / self.scale;
                let xi = 1.0 / self.shape;
                xi / self.scale * t / z * (-t).exp()
            }
        }
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("scale must be positive, got {scale}")))
    }
}

pub fn evd_cdf(model: &EvdModel, x: f64) -> f64 {
    (-model.exponent(x)).exp()
}

/// Upper tail `1 − F(x)`, accurate far into the tail.
pub fn evd_sf(model: &EvdModel, x: f64) -> f64 {
    -(-model.exponent(x)).exp_m1()
}

pub fn evd_quantile(model: &EvdModel, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidProbability(q));
    }
    let t = -q.ln();
    Ok(match model.family {
        Family::Gumbel => model.location - model.scale * t.ln(),
        Family::Frechet => model.location + model.scale * t.powf(-model.shape),
    })
}

/// `ã = â + b log M`.
pub fn correct_block_location(a_hat: f64, b: f64, m: f64) -> f64 {
    a_hat + b * m.ln()
}

/// `b̃ = b̂ M^γ`, the Fréchet analogue of the Gumbel location shift.
pub fn correct_block_scale_frechet(b_hat: f64, gamma: f64, m: f64) -> f64 {
    b_hat * m.powf(gamma)
}
