//! Significance of the most influential set.
//!
//! The procedure has three steps:
//!
//! 1. Estimate the tail indices of `|x|` and `|r|` and choose the null family.
//!    Relative-size sets always get a Gumbel null. Constant-size sets get a
//!    Fréchet null unless both tails look Gaussian.
//! 2. Split the sample (without the observed set) into `M` blocks, compute the
//!    maximal influence in each, fit the family by maximum likelihood, and
//!    correct for the block size.
//! 3. Report `P(Δ^max ≥ δ_obs)` under the corrected null.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evt::{
    default_k_frac, fit_gev_fixed_shape, fit_gumbel_mle, gaussian_hill_reference, hill_tail_index,
    likelihood_ratio_gumbel, EvdModel, Family,
};
use crate::influence::{influence_set, InfluenceSet};
use crate::model::{fit_ols_with, Dataset, FitOptions, RegressionFit};
use crate::rng;
use crate::search::{greedy_among, greedy_most_influential, Budget, Direction, SearchSpec};

/// Hill excess over the Gaussian reference below which the null is Gumbel.
pub const DEFAULT_GUMBEL_EXCESS: f64 = 0.05;
/// Upper bound on the automatic block count.
pub const MAX_AUTO_BLOCKS: usize = 64;
/// Fewest block maxima the null is fitted on.
pub const MIN_BLOCK_MAXIMA: usize = 8;
const MIN_BLOCK_ROWS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum BlockCount {
    /// Largest `M` with block size at least `max(30, 10k)`, capped at 64.
    #[default]
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for BlockCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(BlockCount::Auto);
        }
        match s.parse::<usize>() {
            Ok(m) if m >= 1 => Ok(BlockCount::Fixed(m)),
            _ => Err(Error::InvalidInput(format!("block count must be 'auto' or a positive integer, got {s:?}"))),
        }
    }
}

/// How the maximal influence is computed inside a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BlockMode {
    /// `Shared` for constant-size sets, `Refit` for relative-size sets.
    #[default]
    Auto,
    /// Residuals and `Σ x²` from one fit on all remaining rows; each block
    /// only restricts the candidates. The maximum over blocks is then the
    /// maximum over the remaining sample, so the block correction is exact
    /// for single points.
    Shared,
    /// Each block is refitted as its own regression.
    Refit,
}

impl BlockMode {
    pub fn resolve(self, spec: &SearchSpec) -> Self {
        match self {
            BlockMode::Auto if spec.is_relative() => BlockMode::Refit,
            BlockMode::Auto => BlockMode::Shared,
            other => other,
        }
    }
}

impl std::str::FromStr for BlockMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(BlockMode::Auto),
            "shared" => Ok(BlockMode::Shared),
            "refit" => Ok(BlockMode::Refit),
            other => Err(Error::InvalidInput(format!("unknown block mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Constant,
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub spec: SearchSpec,
    pub blocks: BlockCount,
    pub block_mode: BlockMode,
    /// Strictly inside (0, 1), sorted descending.
    pub alpha_levels: Vec<f64>,
    pub exclude_observed: bool,
    pub seed: u64,
    /// Test this fixed set instead of searching for one.
    pub pinned: Option<Vec<usize>>,
    /// Test both directions and Bonferroni-combine.
    pub two_sided: bool,
    pub fit: FitOptions,
    /// Hill fraction; `None` means [`default_k_frac`].
    pub k_frac: Option<f64>,
    pub gumbel_excess: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            spec: SearchSpec::constant(1),
            blocks: BlockCount::Auto,
            block_mode: BlockMode::Auto,
            alpha_levels: vec![0.10, 0.05, 0.01],
            exclude_observed: true,
            seed: 0,
            pinned: None,
            two_sided: false,
            fit: FitOptions::default(),
            k_frac: None,
            gumbel_excess: DEFAULT_GUMBEL_EXCESS,
        }
    }
}

impl AuditConfig {
    pub fn new(spec: SearchSpec) -> Self {
        Self {
            spec,
            ..Self::default()
        }
    }

    /// Sets the levels, sorted descending with duplicates removed.
    pub fn with_alphas(mut self, mut alphas: Vec<f64>) -> Self {
        alphas.sort_by(|a, b| b.total_cmp(a));
        alphas.dedup();
        self.alpha_levels = alphas;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_levels.is_empty() {
            return Err(Error::InvalidInput("at least one alpha level is required".into()));
        }
        if let Some(a) = self.alpha_levels.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::InvalidProbability(*a));
        }
        if self.alpha_levels.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidInput("alpha levels must be strictly descending".into()));
        }
        if let BlockCount::Fixed(0) = self.blocks {
            return Err(Error::InvalidInput("block count must be positive".into()));
        }
        if let Some(f) = self.k_frac {
            if !(f > 0.0 && f <= 0.2) {
                return Err(Error::InvalidInput(format!("k_frac = {f} outside (0, 0.2]")));
            }
        }
        if let Some(p) = &self.pinned {
            if p.is_empty() {
                return Err(Error::InvalidInput("pinned set is empty".into()));
            }
            if self.spec.is_relative() {
                return Err(Error::InvalidInput("a pinned set needs a constant-size null".into()));
            }
        }
        if !(self.gumbel_excess >= 0.0) {
            return Err(Error::InvalidInput("gumbel_excess must be non-negative".into()));
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        if self.spec.is_relative() {
            Regime::Relative
        } else {
            Regime::Constant
        }
    }

    /// Set size used inside the null blocks: the pinned size, or `k`.
    fn null_budget(&self) -> Budget {
        match &self.pinned {
            Some(p) => Budget::Constant(p.len()),
            None => self.spec.budget,
        }
    }

    /// Smallest admissible block.
    pub fn min_block_size(&self) -> usize {
        match self.null_budget() {
            Budget::Constant(k) => MIN_BLOCK_ROWS.max(10 * k),
            Budget::Relative(_) => MIN_BLOCK_ROWS,
        }
    }
}

/// Resolve the block count and size for `n_effective` rows.
pub fn resolve_blocks(n_effective: usize, blocks: BlockCount, min_block: usize) -> Result<(usize, usize)> {
    let m = match blocks {
        BlockCount::Fixed(m) => m,
        BlockCount::Auto => {
            let m = (n_effective / min_block).min(MAX_AUTO_BLOCKS);
            if m < MIN_BLOCK_MAXIMA {
                return Err(Error::BlockTooSmall {
                    block_size: n_effective / MIN_BLOCK_MAXIMA,
                    min: min_block,
                });
            }
            m
        }
    };
    let size = n_effective / m.max(1);
    if m == 0 || size < min_block {
        return Err(Error::BlockTooSmall {
            block_size: size,
            min: min_block,
        });
    }
    Ok((m, size))
}

/// Tail-index evidence used to choose the null family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDiagnostics {
    /// Hill `γ̂` of `|x|` (reduced feature).
    pub gamma_x: Option<f64>,
    /// Hill `γ̂` of `|r|`.
    pub gamma_r: Option<f64>,
    pub hill_k: usize,
    /// Hill level a Gaussian tail gives at this `n` and `k`.
    pub gaussian_reference: f64,
    /// Free GEV shape fitted to the block maxima.
    pub gamma_gev: Option<f64>,
    /// Likelihood-ratio p-value for `γ = 0` on the block maxima.
    pub lr_p_value: Option<f64>,
}

impl TailDiagnostics {
    /// `max(γ̂_x, γ̂_r)`, i.e. the smaller tail coefficient.
    pub fn heavier(&self) -> Option<f64> {
        match (self.gamma_x, self.gamma_r) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    /// `min(γ̂_x, γ̂_r)`, i.e. the larger tail coefficient.
    pub fn lighter(&self) -> Option<f64> {
        match (self.gamma_x, self.gamma_r) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn excess(&self) -> Option<f64> {
        self.heavier().map(|g| g - self.gaussian_reference)
    }
}

pub fn tail_diagnostics(fit: &RegressionFit, k_frac: Option<f64>) -> TailDiagnostics {
    let n = fit.n();
    let frac = k_frac.unwrap_or_else(|| default_k_frac(n));
    let gx = hill_tail_index(fit.x(), frac).ok();
    let gr = hill_tail_index(fit.residuals(), frac).ok();
    let k = ((frac * n as f64).ceil() as usize).max(1);
    TailDiagnostics {
        gamma_x: gx.map(|h| h.gamma),
        gamma_r: gr.map(|h| h.gamma),
        hill_k: k,
        gaussian_reference: gaussian_hill_reference(n, k),
        gamma_gev: None,
        lr_p_value: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeChoice {
    pub regime: Regime,
    pub family: Family,
    /// Fréchet shape `γ`; zero for Gumbel.
    pub shape: f64,
}

/// Null family for a search spec given the tail evidence.
///
/// Relative-size sets are always Gumbel. For constant-size sets the Fréchet
/// shape is the heavier of the two Hill estimates (tail coefficient
/// `ξ = min(ξ_x, ξ_r)`), unless it exceeds the Gaussian reference by less than
/// `gumbel_excess`. Without usable tail estimates the null falls back to
/// Gumbel.
pub fn select_regime(spec: &SearchSpec, tail: &TailDiagnostics, gumbel_excess: f64) -> RegimeChoice {
    let gumbel = |regime| RegimeChoice {
        regime,
        family: Family::Gumbel,
        shape: 0.0,
    };
    if spec.is_relative() {
        return gumbel(Regime::Relative);
    }
    match (tail.heavier(), tail.excess()) {
        (Some(gamma), Some(excess)) if excess >= gumbel_excess && gamma > 0.0 => RegimeChoice {
            regime: Regime::Constant,
            family: Family::Frechet,
            shape: gamma.clamp(0.01, 0.9),
        },
        _ => gumbel(Regime::Constant),
    }
}

/// Block maxima of the maximal influence under the null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMaxima {
    /// Search objective of the best set in each block.
    pub values: Vec<f64>,
    pub block_size: usize,
    pub mode: BlockMode,
    /// Original row indices of each block.
    pub blocks: Vec<Vec<usize>>,
}

impl BlockMaxima {
    pub fn m_blocks(&self) -> usize {
        self.values.len()
    }
}

fn observed_set(fit: &RegressionFit, config: &AuditConfig, direction: Direction) -> Result<InfluenceSet> {
    match &config.pinned {
        Some(p) => influence_set(fit, p),
        None => greedy_most_influential(fit, &config.spec.with_direction(direction)),
    }
}

/// Block maxima in the configured search direction.
pub fn block_maxima_null(dataset: &Dataset, config: &AuditConfig) -> Result<BlockMaxima> {
    config.validate()?;
    let fit = fit_ols_with(dataset, &config.fit)?;
    let direction = config.spec.direction;
    let observed = observed_set(&fit, config, direction).map_err(|e| e.context("observed set"))?;
    block_maxima_with(dataset, &fit, &observed, config, direction)
}

fn block_maxima_with(
    dataset: &Dataset,
    fit: &RegressionFit,
    observed: &InfluenceSet,
    config: &AuditConfig,
    direction: Direction,
) -> Result<BlockMaxima> {
    let n = dataset.len();
    let excluded: &[usize] = if config.exclude_observed { &observed.indices } else { &[] };
    let mut drop = vec![false; n];
    for &i in excluded {
        drop[i] = true;
    }
    let remaining: Vec<usize> = (0..n).filter(|&i| !drop[i]).collect();

    let (m, size) = resolve_blocks(remaining.len(), config.blocks, config.min_block_size())?;
    let mode = config.block_mode.resolve(&config.spec);

    // Positions into `remaining`, shuffled once.
    let mut order: Vec<usize> = (0..remaining.len()).collect();
    if m > 1 {
        order.shuffle(&mut rng::stream(config.seed, 0, 0));
    }
    let block_positions: Vec<Vec<usize>> = (0..m)
        .map(|b| {
            let mut pos = order[b * size..(b + 1) * size].to_vec();
            pos.sort_unstable();
            pos
        })
        .collect();

    let budget = config.null_budget();
    let block_k = |rows: usize| -> Result<usize> {
        SearchSpec {
            budget,
            direction,
        }
        .resolve(rows)
    };

    let values: Vec<f64> = match mode {
        BlockMode::Shared => {
            let shared_fit;
            let base = if excluded.is_empty() {
                fit
            } else {
                shared_fit = fit_ols_with(&dataset.without(excluded)?, &config.fit)
                    .map_err(|e| e.context("refit without observed set"))?;
                &shared_fit
            };
            let k = block_k(size)?;
            block_positions
                .par_iter()
                .enumerate()
                .map(|(b, pos)| {
                    greedy_among(base, k, direction, pos)
                        .map(|s| direction.objective(s.delta))
                        .map_err(|e| e.context(format!("block {b}")))
                })
                .collect::<Result<_>>()?
        }
        BlockMode::Refit | BlockMode::Auto => {
            let k = block_k(size)?;
            block_positions
                .par_iter()
                .enumerate()
                .map(|(b, pos)| {
                    let rows: Vec<usize> = pos.iter().map(|&p| remaining[p]).collect();
                    let run = || -> Result<f64> {
                        let bf = fit_ols_with(&dataset.select(&rows)?, &config.fit)?;
                        let spec = SearchSpec::constant(k).with_direction(direction);
                        greedy_most_influential(&bf, &spec).map(|s| direction.objective(s.delta))
                    };
                    run().map_err(|e| e.context(format!("block {b}")))
                })
                .collect::<Result<_>>()?
        }
    };

    Ok(BlockMaxima {
        values,
        block_size: size,
        mode,
        blocks: block_positions
            .into_iter()
            .map(|pos| pos.into_iter().map(|p| remaining[p]).collect())
            .collect(),
    })
}

/// Fit the chosen family to block maxima; returns (block-level, corrected).
pub fn fit_null(maxima: &[f64], choice: &RegimeChoice) -> Result<(EvdModel, EvdModel)> {
    let m = maxima.len();
    let block = match choice.family {
        Family::Gumbel => {
            let g = fit_gumbel_mle(maxima)?;
            EvdModel::gumbel(g.location, g.scale)?
        }
        Family::Frechet => {
            let g = fit_gev_fixed_shape(maxima, choice.shape)?;
            EvdModel::frechet_from_gev(g.location, g.scale, g.shape)?
        }
    }
    .with_blocks(m);
    Ok((block, block.corrected_for_blocks(m)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub alpha: f64,
    pub excessive: bool,
}

/// One tested direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideReport {
    pub direction: Direction,
    pub observed: InfluenceSet,
    /// `direction.objective(observed.delta)`, the value compared to the null.
    pub observed_objective: f64,
    pub block_model: EvdModel,
    pub null_model: EvdModel,
    pub p_value: f64,
    pub block_maxima: Vec<f64>,
    pub gamma_gev: Option<f64>,
    pub lr_p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub n: usize,
    pub theta_hat: f64,
    pub regime: Regime,
    pub family: Family,
    pub direction: Direction,
    pub two_sided: bool,
    pub pinned: bool,
    /// Most influential (or pinned) set on the reported side.
    pub observed: InfluenceSet,
    pub observed_labels: Vec<String>,
    pub observed_objective: f64,
    /// Null fitted on the block maxima, before the block-size correction.
    pub block_model: EvdModel,
    /// Corrected null for the full-sample maximum.
    pub null_model: EvdModel,
    /// One-sided: `1 − F(observed_objective)`. Two-sided: Bonferroni
    /// combination of both sides.
    pub p_value: f64,
    pub tail_diagnostics: TailDiagnostics,
    pub decisions: Vec<Decision>,
    pub block_maxima: Vec<f64>,
    pub m_blocks: usize,
    pub block_size: usize,
    pub block_mode: BlockMode,
    pub exclude_observed: bool,
    pub seed: u64,
    /// Both sides when two-sided, otherwise just the reported one.
    pub sides: Vec<SideReport>,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn is_excessive(&self, alpha: f64) -> Option<bool> {
        self.decisions.iter().find(|d| d.alpha == alpha).map(|d| d.excessive)
    }
}

fn run_side(
    dataset: &Dataset,
    fit: &RegressionFit,
    config: &AuditConfig,
    choice: &RegimeChoice,
    direction: Direction,
) -> Result<(SideReport, BlockMaxima)> {
    let observed = observed_set(fit, config, direction).map_err(|e| e.context("observed set"))?;
    let maxima = block_maxima_with(dataset, fit, &observed, config, direction)
        .map_err(|e| e.context("block maxima"))?;
    let (block_model, null_model) =
        fit_null(&maxima.values, choice).map_err(|e| e.context("fitting block maxima"))?;
    let lr = likelihood_ratio_gumbel(&maxima.values).ok();
    let observed_objective = direction.objective(observed.delta);
    let p_value = null_model.sf(observed_objective).clamp(0.0, 1.0);
    Ok((
        SideReport {
            direction,
            observed,
            observed_objective,
            block_model,
            null_model,
            p_value,
            block_maxima: maxima.values.clone(),
            gamma_gev: lr.map(|l| l.gev.shape),
            lr_p_value: lr.map(|l| l.p_value),
        },
        maxima,
    ))
}

/// Run the full audit on `dataset`.
pub fn test_influence(dataset: &Dataset, config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    let fit = fit_ols_with(dataset, &config.fit).map_err(|e| e.context("fit"))?;
    let mut tail = tail_diagnostics(&fit, config.k_frac);
    let choice = select_regime(&config.spec, &tail, config.gumbel_excess);

    let directions: Vec<Direction> = if config.two_sided {
        vec![Direction::Maximize, Direction::Minimize]
    } else {
        vec![config.spec.direction]
    };
    let mut sides = Vec::with_capacity(directions.len());
    let mut layout = None;
    for d in directions {
        let (side, maxima) = run_side(dataset, &fit, config, &choice, d)?;
        if layout.is_none() {
            layout = Some((maxima.m_blocks(), maxima.block_size, maxima.mode));
        }
        sides.push(side);
    }
    let (m_blocks, block_size, block_mode) = layout.expect("at least one side");

    let best = sides
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.p_value.total_cmp(&b.1.p_value).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one side");
    let chosen = sides[best].clone();
    let p_value = if config.two_sided {
        (2.0 * chosen.p_value).min(1.0)
    } else {
        chosen.p_value
    };
    tail.gamma_gev = chosen.gamma_gev;
    tail.lr_p_value = chosen.lr_p_value;

    let mut notes = vec![format!(
        "block maxima computed in {} mode",
        match block_mode {
            BlockMode::Shared => "shared (full remaining-sample residuals)",
            _ => "refit (each block refitted)",
        }
    )];
    if choice.family == Family::Frechet {
        notes.push("Fréchet scale corrected by M^γ from max-stability".into());
        notes.push(format!(
            "Fréchet shape from Hill: max(γ_x, γ_r) = {}, alternative min(γ_x, γ_r) = {}",
            tail.heavier().unwrap_or(f64::NAN),
            tail.lighter().unwrap_or(f64::NAN)
        ));
    }
    if tail.heavier().is_none() && !config.spec.is_relative() {
        notes.push("tail indices unavailable; Gumbel null used".into());
    }
    if config.two_sided {
        notes.push("two-sided p-value is the Bonferroni combination of both directions".into());
    }
    if fit.ridge() > 0.0 {
        notes.push("ridge penalty set; influence formulas assume an unpenalized fit".into());
    }

    let decisions = config
        .alpha_levels
        .iter()
        .map(|&alpha| Decision {
            alpha,
            excessive: p_value < alpha,
        })
        .collect();

    Ok(AuditReport {
        n: dataset.len(),
        theta_hat: fit.theta_hat(),
        regime: choice.regime,
        family: choice.family,
        direction: chosen.direction,
        two_sided: config.two_sided,
        pinned: config.pinned.is_some(),
        observed_labels: chosen.observed.indices.iter().map(|&i| dataset.label(i)).collect(),
        observed: chosen.observed,
        observed_objective: chosen.observed_objective,
        block_model: chosen.block_model,
        null_model: chosen.null_model,
        p_value,
        tail_diagnostics: tail,
        decisions,
        block_maxima: chosen.block_maxima,
        m_blocks,
        block_size,
        block_mode,
        exclude_observed: config.exclude_observed,
        seed: config.seed,
        sides,
        notes,
    })
}

/// One point of a significance boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub x: f64,
    /// Outcome at which the single-point influence equals `+δ*`.
    pub upper: Option<f64>,
    /// Outcome at which it equals `−δ*`.
    pub lower: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub alpha: f64,
    pub delta_star: f64,
    pub points: Vec<ThresholdPoint>,
}

/// Outcome values at which a single added point at `x` reaches the critical
/// influence `δ* = F⁻¹(1 − α)`:
///
/// ```text
/// x r* / (D − x²) = ±δ*,    y* = θ̂ x + r*
/// ```
///
/// Grid points with `x = 0` or `x² ≥ D` have no boundary.
pub fn significance_thresholds(
    fit: &RegressionFit,
    model: &EvdModel,
    alphas: &[f64],
    x_grid: &[f64],
) -> Result<Vec<ThresholdCurve>> {
    let d = fit.d_total();
    alphas
        .iter()
        .map(|&alpha| {
            let delta_star = model.quantile(1.0 - alpha)?;
            let points = x_grid
                .iter()
                .map(|&x| {
                    let room = d - x * x;
                    if x == 0.0 || room <= 0.0 {
                        return ThresholdPoint { x, upper: None, lower: None };
                    }
                    let r = delta_star * room / x;
                    let (a, b) = (fit.predict(x) + r, fit.predict(x) - r);
                    ThresholdPoint {
                        x,
                        upper: Some(a.max(b)),
                        lower: Some(a.min(b)),
                    }
                })
                .collect();
            Ok(ThresholdCurve {
                alpha,
                delta_star,
                points,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fit_ols;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_data(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y = x
            .iter()
            .map(|v| v + Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn auto_blocks() {
        assert_eq!(resolve_blocks(4000, BlockCount::Auto, 30).unwrap(), (64, 62));
        assert_eq!(resolve_blocks(300, BlockCount::Auto, 30).unwrap(), (10, 30));
        assert!(matches!(
            resolve_blocks(200, BlockCount::Auto, 30),
            Err(Error::BlockTooSmall { .. })
        ));
        assert_eq!(resolve_blocks(100, BlockCount::Fixed(1), 30).unwrap(), (1, 100));
        assert!(resolve_blocks(100, BlockCount::Fixed(4), 30).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(AuditConfig::default().validate().is_ok());
        let mut c = AuditConfig::default();
        c.alpha_levels = vec![0.01, 0.05];
        assert!(c.validate().is_err());
        c.alpha_levels = vec![1.0];
        assert!(matches!(c.validate(), Err(Error::InvalidProbability(_))));
        let c = AuditConfig::default().with_alphas(vec![0.01, 0.1, 0.05, 0.1]);
        assert_eq!(c.alpha_levels, vec![0.1, 0.05, 0.01]);
    }

    #[test]
    fn single_block_equals_full_search() {
        let data = normal_data(200, 1);
        let mut config = AuditConfig::new(SearchSpec::constant(2));
        config.blocks = BlockCount::Fixed(1);
        config.exclude_observed = false;
        for mode in [BlockMode::Shared, BlockMode::Refit] {
            config.block_mode = mode;
            let maxima = block_maxima_null(&data, &config).unwrap();
            let full = greedy_most_influential(&fit_ols(&data).unwrap(), &config.spec).unwrap();
            assert_eq!(maxima.values, vec![full.delta]);
        }
    }

    #[test]
    fn blocks_deterministic_and_exclude_observed() {
        let data = normal_data(600, 2);
        let config = AuditConfig {
            seed: 9,
            ..AuditConfig::new(SearchSpec::constant(2))
        };
        let a = block_maxima_null(&data, &config).unwrap();
        let b = block_maxima_null(&data, &config).unwrap();
        assert_eq!(a, b);
        let observed = greedy_most_influential(&fit_ols(&data).unwrap(), &config.spec).unwrap();
        for block in &a.blocks {
            assert!(observed.indices.iter().all(|i| !block.contains(i)));
        }
        let other = block_maxima_null(&data, &AuditConfig { seed: 10, ..config }).unwrap();
        assert_ne!(a.values, other.values);
    }

    #[test]
    fn null_maxima_match_fitted_gumbel_mean() {
        let data = normal_data(2048, 3);
        let mut config = AuditConfig::new(SearchSpec::constant(1));
        config.blocks = BlockCount::Fixed(16);
        let maxima = block_maxima_null(&data, &config).unwrap();
        let v = &maxima.values;
        let m = v.len() as f64;
        let mean = v.iter().sum::<f64>() / m;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        let g = fit_gumbel_mle(v).unwrap();
        let fitted_mean = g.location + 0.577_215_664_901_532_9 * g.scale;
        assert!((mean - fitted_mean).abs() < 3.0 * sd / m.sqrt());
    }

    #[test]
    fn p_value_at_corrected_location() {
        let m = EvdModel::gumbel(0.2, 0.05).unwrap().corrected_for_blocks(20);
        let expected = 1.0 - (-1.0f64).exp();
        assert!((m.sf(m.location) - expected).abs() < 1e-12);
    }

    #[test]
    fn relative_is_always_gumbel() {
        let tail = TailDiagnostics {
            gamma_x: Some(0.5),
            gamma_r: Some(0.5),
            hill_k: 10,
            gaussian_reference: 0.2,
            gamma_gev: None,
            lr_p_value: None,
        };
        let c = select_regime(&SearchSpec::relative(0.01), &tail, DEFAULT_GUMBEL_EXCESS);
        assert_eq!((c.regime, c.family), (Regime::Relative, Family::Gumbel));
        let c = select_regime(&SearchSpec::constant(1), &tail, DEFAULT_GUMBEL_EXCESS);
        assert_eq!((c.family, c.shape), (Family::Frechet, 0.5));
        let light = TailDiagnostics {
            gamma_x: Some(0.21),
            gamma_r: Some(0.19),
            ..tail
        };
        let c = select_regime(&SearchSpec::constant(1), &light, DEFAULT_GUMBEL_EXCESS);
        assert_eq!(c.family, Family::Gumbel);
    }

    #[test]
    fn report_invariants() {
        let data = normal_data(1500, 4);
        let config = AuditConfig::new(SearchSpec::constant(1));
        let report = test_influence(&data, &config).unwrap();
        assert_eq!(report.family, Family::Gumbel);
        let p = report.null_model.sf(report.observed_objective);
        assert!((report.p_value - p).abs() < 1e-15);
        assert!((0.0..=1.0).contains(&report.p_value));
        for d in &report.decisions {
            assert_eq!(d.excessive, report.p_value < d.alpha);
        }
        assert_eq!(report, test_influence(&data, &config).unwrap());
        let two = test_influence(&data, &AuditConfig { two_sided: true, ..config }).unwrap();
        assert_eq!(two.sides.len(), 2);
        let min_p = two.sides.iter().map(|s| s.p_value).fold(1.0, f64::min);
        assert!((two.p_value - (2.0 * min_p).min(1.0)).abs() < 1e-15);
    }

    #[test]
    fn pinned_set_is_tested() {
        let data = normal_data(800, 5);
        let config = AuditConfig {
            pinned: Some(vec![3, 7]),
            ..AuditConfig::new(SearchSpec::constant(1))
        };
        let report = test_influence(&data, &config).unwrap();
        assert_eq!(report.observed.indices, vec![3, 7]);
        let fit = fit_ols(&data).unwrap();
        assert_eq!(report.observed.delta, influence_set(&fit, &[3, 7]).unwrap().delta);
    }

    #[test]
    fn thresholds_nest_and_degenerate() {
        let data = normal_data(300, 6);
        let fit = fit_ols(&data).unwrap();
        let model = EvdModel::gumbel(0.02, 0.005).unwrap();
        let grid = [-2.0, -0.5, 0.0, 0.5, 2.0];
        let curves = significance_thresholds(&fit, &model, &[0.10, 0.05, 0.01], &grid).unwrap();
        for (wide, narrow) in curves[2].points.iter().zip(&curves[0].points) {
            if let (Some(a), Some(b)) = (wide.upper, narrow.upper) {
                assert!(a > b);
                assert!(wide.lower.unwrap() < narrow.lower.unwrap());
            }
        }
        assert!(curves[0].points[2].upper.is_none());
        // Zero critical value puts the boundary on the regression line.
        let zero = EvdModel::gumbel(0.0, 1e-300).unwrap();
        let at_line = significance_thresholds(&fit, &zero, &[0.5], &[1.0]).unwrap();
        let expected = fit.predict(1.0);
        assert!((at_line[0].points[0].upper.unwrap() - expected).abs() < 1e-12);
    }
}
