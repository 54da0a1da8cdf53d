//! Seeded Monte Carlo studies.
//!
//! Every replication owns a random stream keyed by `(seed, cell, rep)`, so
//! results do not depend on thread scheduling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{
    significance_thresholds, test_influence, AuditConfig, AuditReport, ThresholdCurve,
};
use crate::error::{Error, Result};
use crate::evt::{fit_gev_mle, fit_gumbel_mle};
use crate::influence::influence_set;
use crate::model::{fit_ols, Dataset};
use crate::rng;
use crate::search::{greedy_most_influential, SearchSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "df")]
pub enum Dist {
    Normal,
    StudentT(f64),
}

impl Dist {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Normal => StandardNormal.sample(rng),
            Dist::StudentT(df) => StudentT::new(df).expect("validated df").sample(rng),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Dist::Normal => "Normal".into(),
            Dist::StudentT(df) => format!("t({df})"),
        }
    }

    fn key(&self) -> u64 {
        match self {
            Dist::Normal => 0,
            Dist::StudentT(df) => df.to_bits(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Dist::StudentT(df) if !(*df > 2.0 && df.is_finite()) => Err(Error::InvalidInput(format!(
                "Student-t degrees of freedom must exceed 2, got {df}"
            ))),
            _ => Ok(()),
        }
    }
}

impl std::str::FromStr for Dist {
    type Err = Error;

    /// `normal`, `t5`, `t(5)` or `t:5`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "normal" || lower == "n" {
            return Ok(Dist::Normal);
        }
        let df = lower
            .strip_prefix('t')
            .map(|r| r.trim_start_matches([':', '(']).trim_end_matches(')'))
            .and_then(|r| r.parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidInput(format!("unknown distribution {s:?}")))?;
        let d = Dist::StudentT(df);
        d.validate()?;
        Ok(d)
    }
}

/// One cell of a simulation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dist_x: Dist,
    pub dist_r: Dist,
    pub n: usize,
    pub reps: usize,
    pub k: usize,
    /// Independent datasets per replication; their maximal influences are the
    /// sample the GEV is fitted to.
    pub draws_per_rep: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(dist_x: Dist, dist_r: Dist, n: usize) -> Self {
        Self {
            dist_x,
            dist_r,
            n,
            reps: 200,
            k: 1,
            draws_per_rep: 1000,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dist_x.validate()?;
        self.dist_r.validate()?;
        if self.reps == 0 {
            return Err(Error::InvalidInput("reps must be at least 1".into()));
        }
        if self.n < 50 {
            return Err(Error::InvalidInput(format!("n must be at least 50, got {}", self.n)));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::InvalidInput(format!("k = {} invalid for n = {}", self.k, self.n)));
        }
        if self.draws_per_rep < 20 {
            return Err(Error::InvalidInput("draws_per_rep must be at least 20".into()));
        }
        Ok(())
    }

    fn cell_key(&self) -> u64 {
        let mut h = self.dist_x.key();
        for v in [self.dist_r.key(), self.n as u64, self.k as u64] {
            h = h.rotate_left(17) ^ v.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
        h
    }
}

fn draw(config: &SimConfig, rng: &mut ChaCha8Rng) -> Dataset {
    let x: Vec<f64> = (0..config.n).map(|_| config.dist_x.sample(rng)).collect();
    let y = x.iter().map(|v| v + config.dist_r.sample(rng)).collect();
    Dataset::new(x, y).expect("finite draws")
}

/// `y = x + r` with `x ~ dist_x`, `r ~ dist_r`, through the origin.
pub fn generate_synthetic(config: &SimConfig, rep_index: u64) -> Result<Dataset> {
    config.validate()?;
    Ok(draw(config, &mut rng::stream(config.seed, config.cell_key(), rep_index)))
}

/// Mean, sample standard deviation and quartiles (linear interpolation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let q = |p: f64| {
            let h = (n - 1.0) * p;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            mean,
            sd,
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCell {
    pub config: SimConfig,
    /// One GEV shape per successful replication, in replication order.
    pub gammas: Vec<f64>,
    pub failures: usize,
    pub summary: Option<Summary>,
}

impl ShapeCell {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.config.reps as f64
    }
}

fn shape_replication(config: &SimConfig, rep: usize) -> Result<f64> {
    let mut rng = rng::stream(config.seed, config.cell_key(), rep as u64);
    let spec = SearchSpec::constant(config.k);
    let maxima = (0..config.draws_per_rep)
        .map(|_| {
            let fit = fit_ols(&draw(config, &mut rng))?;
            Ok(greedy_most_influential(&fit, &spec)?.delta)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(fit_gev_mle(&maxima)?.shape)
}

/// GEV shape estimates of the maximal influence for each cell.
///
/// A replication draws `draws_per_rep` datasets, takes the maximal influence
/// of each, and fits a GEV to those maxima. Failed fits are counted.
pub fn shape_study(cells: &[SimConfig]) -> Result<Vec<ShapeCell>> {
    cells
        .iter()
        .map(|config| {
            config.validate()?;
            let results: Vec<Result<f64>> = (0..config.reps)
                .into_par_iter()
                .map(|rep| shape_replication(config, rep))
                .collect();
            let mut gammas = Vec::with_capacity(results.len());
            let mut failures = 0;
            for (rep, r) in results.into_iter().enumerate() {
                match r {
                    Ok(g) => gammas.push(g),
                    Err(e) => {
                        log::warn!("{} / {} n={} rep {rep}: {e}", config.dist_x.name(), config.dist_r.name(), config.n);
                        failures += 1;
                    }
                }
            }
            Ok(ShapeCell {
                config: *config,
                summary: Summary::of(&gammas),
                gammas,
                failures,
            })
        })
        .collect()
}

/// The four distribution pairs at sample size `n`.
pub fn shape_grid(n: usize, reps: usize, draws_per_rep: usize, seed: u64) -> Vec<SimConfig> {
    let t5 = Dist::StudentT(5.0);
    [
        (Dist::Normal, Dist::Normal),
        (t5, Dist::Normal),
        (Dist::Normal, t5),
        (t5, t5),
    ]
    .into_iter()
    .map(|(dx, dr)| SimConfig {
        reps,
        draws_per_rep,
        seed,
        ..SimConfig::new(dx, dr, n)
    })
    .collect()
}

/// Table layout: `x,r,n,reps,failures,Mean,Std.Dev.,Q25,Median,Q75`.
pub fn write_shape_table<W: std::io::Write>(mut out: W, cells: &[ShapeCell]) -> Result<()> {
    use crate::report::format_float;
    let io = |e: std::io::Error| Error::InvalidInput(format!("write failed: {e}"));
    writeln!(out, "x,r,n,reps,failures,Mean,Std.Dev.,Q25,Median,Q75").map_err(io)?;
    for c in cells {
        let cols = match c.summary {
            Some(s) => [s.mean, s.sd, s.q25, s.median, s.q75].map(format_float).join(","),
            None => ",,,,".into(),
        };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.config.dist_x.name(),
            c.config.dist_r.name(),
            c.config.n,
            c.config.reps,
            c.failures,
            cols
        )
        .map_err(io)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelStudyConfig {
    pub location: f64,
    pub scale: f64,
    pub block_size: usize,
    pub m_blocks: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for GumbelStudyConfig {
    fn default() -> Self {
        Self {
            location: 0.0,
            scale: 1.0,
            block_size: 50,
            m_blocks: 100,
            reps: 500,
            seed: 1,
        }
    }
}

/// Biases relative to the Gumbel law of the full-sample maximum,
/// `Gumbel(a + b log N, b)` for `N = block_size · m_blocks` parent draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelStudy {
    pub config: GumbelStudyConfig,
    pub uncorrected_location_bias: Vec<f64>,
    pub corrected_location_bias: Vec<f64>,
    pub scale_bias: Vec<f64>,
    pub failures: usize,
}

impl GumbelStudy {
    pub fn summaries(&self) -> [Option<Summary>; 3] {
        [
            Summary::of(&self.uncorrected_location_bias),
            Summary::of(&self.corrected_location_bias),
            Summary::of(&self.scale_bias),
        ]
    }
}

/// Block-maxima Gumbel MLE on a Gumbel parent, with and without the
/// location correction.
pub fn gumbel_estimation_study(config: &GumbelStudyConfig) -> Result<GumbelStudy> {
    if config.reps == 0 || config.block_size == 0 || config.m_blocks < 8 {
        return Err(Error::InvalidInput("study needs reps ≥ 1, block_size ≥ 1, m_blocks ≥ 8".into()));
    }
    let parent = Gumbel::new(config.location, config.scale)
        .map_err(|e| Error::InvalidInput(format!("invalid Gumbel parent: {e}")))?;
    let m = config.m_blocks as f64;
    let truth = config.location + config.scale * ((config.block_size * config.m_blocks) as f64).ln();
    let results: Vec<Result<(f64, f64, f64)>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::stream(config.seed, 0x6D62, rep as u64);
            let maxima: Vec<f64> = (0..config.m_blocks)
                .map(|_| {
                    (0..config.block_size)
                        .map(|_| parent.sample(&mut rng))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            let fit = fit_gumbel_mle(&maxima)?;
            let corrected = crate::evt::correct_block_location(fit.location, fit.scale, m);
            Ok((fit.location - truth, corrected - truth, fit.scale - config.scale))
        })
        .collect();
    let mut study = GumbelStudy {
        config: *config,
        uncorrected_location_bias: Vec::new(),
        corrected_location_bias: Vec::new(),
        scale_bias: Vec::new(),
        failures: 0,
    };
    for r in results {
        match r {
            Ok((u, c, s)) => {
                study.uncorrected_location_bias.push(u);
                study.corrected_location_bias.push(c);
                study.scale_bias.push(s);
            }
            Err(_) => study.failures += 1,
        }
    }
    Ok(study)
}

/// Histogram bin of block maxima with the fitted block-level density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub density: f64,
    pub fitted_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Illustration {
    pub dataset: Dataset,
    pub injected_index: usize,
    pub report: AuditReport,
    pub curves: Vec<ThresholdCurve>,
    pub histogram: Vec<HistogramBin>,
    /// Influence of the injected point from an explicit refit.
    pub injected_refit_influence: f64,
}

pub const ILLUSTRATION_SEED: u64 = 2024;
const ILLUSTRATION_N: usize = 500;
const ILLUSTRATION_X: f64 = 3.0;
/// p-value the injected point is placed at.
pub const ILLUSTRATION_TARGET_P: f64 = 0.04;

/// Univariate regression with one injected high-leverage point.
///
/// The null excludes the observed point, so it does not depend on the
/// point's outcome. The outcome is placed where the point's influence equals
/// the null quantile at `1 − ILLUSTRATION_TARGET_P`.
pub fn illustration_scenario(seed: u64) -> Result<Illustration> {
    let base_config = SimConfig::new(Dist::Normal, Dist::Normal, ILLUSTRATION_N);
    let mut rng = rng::stream(seed, 0x1F16, 0);
    let mut x: Vec<f64> = (0..ILLUSTRATION_N - 1).map(|_| base_config.dist_x.sample(&mut rng)).collect();
    let mut y: Vec<f64> = x.iter().map(|v| v + base_config.dist_r.sample(&mut rng)).collect();
    let base = fit_ols(&Dataset::new(x.clone(), y.clone())?)?;

    let x0 = ILLUSTRATION_X;
    let d_base = base.d_total();
    let leverage = x0 * x0 / (d_base + x0 * x0);
    // Deviation `e` from the base line gives influence x0 e (1 − h) / D_base.
    let outcome_for = |delta: f64| base.predict(x0) + delta * d_base / (x0 * (1.0 - leverage));
    x.push(x0);
    y.push(base.predict(x0));
    let injected_index = x.len() - 1;

    let config = AuditConfig {
        seed,
        ..AuditConfig::new(SearchSpec::constant(1))
    };
    // The tail diagnostics see the injected residual, so the null family can
    // move with it; iterate to a fixed point.
    let mut report = test_influence(&Dataset::new(x.clone(), y.clone())?, &config)?;
    for _ in 0..8 {
        let target = report.null_model.quantile(1.0 - ILLUSTRATION_TARGET_P)?;
        y[injected_index] = outcome_for(target);
        report = test_influence(&Dataset::new(x.clone(), y.clone())?, &config)?;
        if report.observed.indices == [injected_index]
            && (report.p_value - ILLUSTRATION_TARGET_P).abs() < 1e-6
        {
            break;
        }
    }
    let dataset = Dataset::new(x, y)?;
    if report.observed.indices != [injected_index] {
        return Err(Error::InvalidInput("injected point is not the most influential".into()));
    }
    let fit = fit_ols(&dataset)?;
    let lo = dataset.x().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = dataset.x().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let grid: Vec<f64> = (0..=80).map(|i| lo + (hi - lo) * i as f64 / 80.0).collect();
    let curves = significance_thresholds(&fit, &report.null_model, &config.alpha_levels, &grid)?;
    let histogram = histogram(&report.block_maxima, &report.block_model, 20);
    let injected_refit_influence = crate::influence::refit_influence_oracle(&dataset, &[injected_index])?;
    debug_assert!({
        let closed = influence_set(&fit, &[injected_index])?.delta;
        (closed - injected_refit_influence).abs() <= 1e-10 * closed.abs().max(1.0)
    });
    Ok(Illustration {
        dataset,
        injected_index,
        report,
        curves,
        histogram,
        injected_refit_influence,
    })
}

fn histogram(values: &[f64], model: &crate::evt::EvdModel, bins: usize) -> Vec<HistogramBin> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let total = values.len() as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let lower = lo + i as f64 * width;
            HistogramBin {
                lower,
                upper: lower + width,
                count,
                density: count as f64 / (total * width),
                fitted_density: model.pdf(lower + width / 2.0),
            }
        })
        .collect()
}
