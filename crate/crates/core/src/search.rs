//! Most-influential-set search.
//!
//! Greedy search evaluates the exact influence of each augmented set in O(1)
//! from running sums of `x_i r_i` and `x_i²`, so one step over `N` candidates
//! costs O(N). Exhaustive enumeration is the small-instance oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::{InfluenceSet, REMOVAL_TOLERANCE};
use crate::model::RegressionFit;

/// Which way the search pushes the coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Largest `Δ` (removal lowers the coefficient the most).
    #[default]
    Maximize,
    /// Smallest `Δ`.
    Minimize,
    /// Largest `|Δ|`.
    Absolute,
}

impl Direction {
    /// The scalar the search maximizes.
    pub fn objective(self, delta: f64) -> f64 {
        match self {
            Direction::Maximize => delta,
            Direction::Minimize => -delta,
            Direction::Absolute => delta.abs(),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Maximize => Direction::Minimize,
            Direction::Minimize => Direction::Maximize,
            Direction::Absolute => Direction::Absolute,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" | "maximize" => Ok(Direction::Maximize),
            "min" | "minimize" => Ok(Direction::Minimize),
            "abs" | "absolute" => Ok(Direction::Absolute),
            other => Err(Error::InvalidInput(format!("unknown direction {other:?}"))),
        }
    }
}

/// Size budget for the influential set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum Budget {
    /// At most `k` rows regardless of sample size.
    Constant(usize),
    /// At most `⌈p·N⌉` rows.
    Relative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub budget: Budget,
    pub direction: Direction,
}

impl SearchSpec {
    pub fn constant(k: usize) -> Self {
        Self {
            budget: Budget::Constant(k),
            direction: Direction::Maximize,
        }
    }

    pub fn relative(p: f64) -> Self {
        Self {
            budget: Budget::Relative(p),
            direction: Direction::Maximize,
        }
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn is_relative(&self) -> bool {
        matches!(self.budget, Budget::Relative(_))
    }

    /// Resolve the budget to a set size for a sample of `n` rows.
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let k = match self.budget {
            Budget::Constant(k) => {
                if k == 0 {
                    return Err(Error::InvalidInput("k must be positive".into()));
                }
                k
            }
            Budget::Relative(p) => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidInput(format!("p = {p} outside (0, 1)")));
                }
                (p * n as f64).ceil() as usize
            }
        };
        if k >= n {
            return Err(Error::InvalidInput(format!(
                "set size {k} must be below sample size {n}"
            )));
        }
        Ok(k.max(1))
    }
}

/// Greedy search over all rows of the fit.
pub fn greedy_most_influential(fit: &RegressionFit, spec: &SearchSpec) -> Result<InfluenceSet> {
    let k = spec.resolve(fit.n())?;
    let candidates: Vec<usize> = (0..fit.n()).collect();
    greedy_among(fit, k, spec.direction, &candidates)
}

/// Greedy search restricted to `candidates` (positions in `fit`).
///
/// Starts from the empty set and adds, at each step, the candidate whose
/// augmented set has the best exact objective; ties go to the smallest
/// position. Stops after `k` additions or once the best augmentation is
/// strictly worse than the current set, and returns the best prefix seen.
pub fn greedy_among(
    fit: &RegressionFit,
    k: usize,
    direction: Direction,
    candidates: &[usize],
) -> Result<InfluenceSet> {
    let n = fit.n();
    if let Some(&bad) = candidates.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    let x = fit.x();
    let r = fit.residuals();
    let d_total = fit.d_total();
    let floor = REMOVAL_TOLERANCE * d_total;

    let mut order: Vec<usize> = candidates.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut taken = vec![false; order.len()];

    let mut numerator = 0.0;
    let mut denominator = d_total;
    let mut current = 0.0;
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut best_len = 0;
    let mut best_value = 0.0;

    for _ in 0..k {
        let mut pick: Option<(usize, f64)> = None;
        let mut any_valid = false;
        for (slot, &i) in order.iter().enumerate() {
            if taken[slot] {
                continue;
            }
            let den = denominator - x[i] * x[i];
            if den <= floor {
                continue;
            }
            any_valid = true;
            let value = direction.objective((numerator + x[i] * r[i]) / den);
            if pick.is_none_or(|(_, v)| value > v) {
                pick = Some((slot, value));
            }
        }
        let Some((slot, value)) = pick else {
            if !any_valid && chosen.is_empty() && !order.is_empty() {
                return Err(Error::DegenerateRemoval {
                    remaining: denominator,
                    total: d_total,
                });
            }
            break;
        };
        if !chosen.is_empty() && value < current {
            break;
        }
        let i = order[slot];
        taken[slot] = true;
        numerator += x[i] * r[i];
        denominator -= x[i] * x[i];
        current = value;
        chosen.push(i);
        if value > best_value {
            best_value = value;
            best_len = chosen.len();
        }
    }

    chosen.truncate(best_len);
    Ok(build_set(fit, chosen))
}

fn build_set(fit: &RegressionFit, indices: Vec<usize>) -> InfluenceSet {
    let x = fit.x();
    let r = fit.residuals();
    let contributions: Vec<f64> = indices.iter().map(|&i| x[i] * r[i]).collect();
    let d_remaining = fit.d_total() - indices.iter().map(|&i| x[i] * x[i]).sum::<f64>();
    let numerator: f64 = contributions.iter().sum();
    InfluenceSet {
        delta: if indices.is_empty() { 0.0 } else { numerator / d_remaining },
        indices,
        contributions,
        d_remaining,
    }
}

/// Default cap on the number of subsets enumerated by exhaustive search.
pub const DEFAULT_SUBSET_CAP: u128 = 2_000_000;

fn count_subsets(n: usize, k: usize) -> u128 {
    let mut total: u128 = 1;
    let mut binom: u128 = 1;
    for j in 1..=k.min(n) {
        binom = binom * (n - j + 1) as u128 / j as u128;
        total = total.saturating_add(binom);
    }
    total
}

/// Exact maximizer over all subsets of size at most `k`, including the empty
/// set. Ties go to the lexicographically smallest index set.
pub fn exhaustive_most_influential(
    fit: &RegressionFit,
    k: usize,
    direction: Direction,
) -> Result<InfluenceSet> {
    exhaustive_with_cap(fit, k, direction, DEFAULT_SUBSET_CAP)
}

pub fn exhaustive_with_cap(
    fit: &RegressionFit,
    k: usize,
    direction: Direction,
    cap: u128,
) -> Result<InfluenceSet> {
    let n = fit.n();
    if k >= n {
        return Err(Error::InvalidInput(format!(
            "set size {k} must be below sample size {n}"
        )));
    }
    let subsets = count_subsets(n, k);
    if subsets > cap {
        return Err(Error::CombinatorialBudgetExceeded { subsets, cap });
    }
    let x = fit.x();
    let r = fit.residuals();
    let xr: Vec<f64> = x.iter().zip(r).map(|(a, b)| a * b).collect();
    let xx: Vec<f64> = x.iter().map(|a| a * a).collect();
    let floor = REMOVAL_TOLERANCE * fit.d_total();

    let mut best: Vec<usize> = Vec::new();
    let mut best_value = 0.0;
    let mut stack: Vec<usize> = Vec::with_capacity(k);

    // Depth-first in lexicographic order, so the first maximizer found is the
    // lexicographically smallest one.
    fn visit(
        start: usize,
        k: usize,
        stack: &mut Vec<usize>,
        sums: (f64, f64),
        ctx: &Ctx<'_>,
        best: &mut Vec<usize>,
        best_value: &mut f64,
    ) {
        for i in start..ctx.xr.len() {
            let num = sums.0 + ctx.xr[i];
            let den = sums.1 - ctx.xx[i];
            stack.push(i);
            if den > ctx.floor {
                let value = ctx.direction.objective(num / den);
                if value > *best_value {
                    *best_value = value;
                    best.clone_from(stack);
                }
            }
            if stack.len() < k {
                visit(i + 1, k, stack, (num, den), ctx, best, best_value);
            }
            stack.pop();
        }
    }
    struct Ctx<'a> {
        xr: &'a [f64],
        xx: &'a [f64],
        floor: f64,
        direction: Direction,
    }
    let ctx = Ctx {
        xr: &xr,
        xx: &xx,
        floor,
        direction,
    };
    if k > 0 {
        visit(0, k, &mut stack, (0.0, fit.d_total()), &ctx, &mut best, &mut best_value);
    }
    Ok(build_set(fit, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::influence::influence_single;
    use crate::model::{fit_ols, Dataset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y = x
            .iter()
            .map(|v| v + rng.random_range(-1.0..1.0) * rng.random_range(0.2..2.0))
            .collect();
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn k1_greedy_is_single_argmax() {
        let fit = fit_ols(&random_data(30, 1)).unwrap();
        for direction in [Direction::Maximize, Direction::Minimize, Direction::Absolute] {
            let spec = SearchSpec::constant(1).with_direction(direction);
            let got = greedy_most_influential(&fit, &spec).unwrap();
            let (arg, _) = (0..30)
                .map(|i| (i, direction.objective(influence_single(&fit, i).unwrap())))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            assert_eq!(got.indices, vec![arg]);
            let exhaustive = exhaustive_most_influential(&fit, 1, direction).unwrap();
            assert_eq!(exhaustive.indices, vec![arg]);
        }
    }

    #[test]
    fn greedy_matches_exhaustive_k2() {
        let fit = fit_ols(&random_data(15, 2)).unwrap();
        let spec = SearchSpec::constant(2);
        let g = greedy_most_influential(&fit, &spec).unwrap();
        let e = exhaustive_most_influential(&fit, 2, Direction::Maximize).unwrap();
        assert!(g.delta >= 0.99 * e.delta);
    }

    #[test]
    fn greedy_nondecreasing_in_k() {
        let fit = fit_ols(&random_data(40, 3)).unwrap();
        let mut last = 0.0;
        for k in 1..10 {
            let d = greedy_most_influential(&fit, &SearchSpec::constant(k)).unwrap().delta;
            assert!(d >= last);
            last = d;
        }
    }

    #[test]
    fn exhaustive_proper_subsets_match_refit() {
        let d = random_data(5, 4);
        let fit = fit_ols(&d).unwrap();
        let best = exhaustive_most_influential(&fit, 4, Direction::Maximize).unwrap();
        // A single remaining row is below the dataset minimum, so refit the
        // through-origin slope directly.
        let slope = |keep: &[usize]| {
            let sxy: f64 = keep.iter().map(|&i| d.x()[i] * d.y()[i]).sum();
            let sxx: f64 = keep.iter().map(|&i| d.x()[i] * d.x()[i]).sum();
            sxy / sxx
        };
        let refit = |removed: &[usize]| {
            let keep: Vec<usize> = (0..5).filter(|i| !removed.contains(i)).collect();
            fit.theta_hat() - slope(&keep)
        };
        assert!((best.delta - refit(&best.indices)).abs() < 1e-11);
        // Brute force over every proper subset by bitmask.
        let mut brute = 0.0f64;
        for mask in 1u32..31 {
            let s: Vec<usize> = (0..5).filter(|i| mask & (1 << i) != 0).collect();
            brute = brute.max(refit(&s));
        }
        assert!((brute - best.delta).abs() < 1e-11);
    }

    #[test]
    fn all_zero_residuals_give_empty_set() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], vec![3.0, 6.0, 9.0, 12.0]).unwrap();
        let fit = fit_ols(&d).unwrap();
        let e = exhaustive_most_influential(&fit, 2, Direction::Maximize).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.delta, 0.0);
        let g = greedy_most_influential(&fit, &SearchSpec::constant(2)).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn budget_exceeded() {
        let fit = fit_ols(&random_data(200, 5)).unwrap();
        assert!(matches!(
            exhaustive_most_influential(&fit, 4, Direction::Maximize),
            Err(Error::CombinatorialBudgetExceeded { .. })
        ));
    }

    #[test]
    fn spec_resolution() {
        assert_eq!(SearchSpec::relative(0.01).resolve(250).unwrap(), 3);
        assert_eq!(SearchSpec::constant(2).resolve(10).unwrap(), 2);
        assert!(SearchSpec::constant(10).resolve(10).is_err());
        assert!(SearchSpec::constant(0).resolve(10).is_err());
        assert!(SearchSpec::relative(1.5).resolve(10).is_err());
    }

    #[test]
    fn minimize_equals_maximize_on_reflection() {
        let d = random_data(14, 6);
        let fit = fit_ols(&d).unwrap();
        // y' = 2ŷ − y flips every residual and keeps θ̂.
        let y2: Vec<f64> = d
            .x()
            .iter()
            .zip(d.y())
            .map(|(x, y)| 2.0 * fit.theta_hat() * x - y)
            .collect();
        let fit2 = fit_ols(&Dataset::new(d.x().to_vec(), y2).unwrap()).unwrap();
        for k in 1..=3 {
            let a = exhaustive_most_influential(&fit, k, Direction::Minimize).unwrap();
            let b = exhaustive_most_influential(&fit2, k, Direction::Maximize).unwrap();
            assert!((a.delta + b.delta).abs() < 1e-12);
            let ga = greedy_most_influential(&fit, &SearchSpec::constant(k).with_direction(Direction::Minimize)).unwrap();
            let gb = greedy_most_influential(&fit2, &SearchSpec::constant(k)).unwrap();
            assert!((ga.delta + gb.delta).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_permutation_invariant() {
        let d = random_data(12, 7);
        let fit = fit_ols(&d).unwrap();
        let best = exhaustive_most_influential(&fit, 3, Direction::Maximize).unwrap();
        let perm: Vec<usize> = (0..12).rev().collect();
        let fit_p = fit_ols(&d.select(&perm).unwrap()).unwrap();
        let best_p = exhaustive_most_influential(&fit_p, 3, Direction::Maximize).unwrap();
        assert!((best.delta - best_p.delta).abs() < 1e-12);
        let mut mapped: Vec<usize> = best_p.indices.iter().map(|&i| perm[i]).collect();
        mapped.sort_unstable();
        assert_eq!(mapped, best.indices);
    }

    #[test]
    fn restricted_candidates() {
        let fit = fit_ols(&random_data(30, 8)).unwrap();
        let cands: Vec<usize> = (10..20).collect();
        let g = greedy_among(&fit, 2, Direction::Maximize, &cands).unwrap();
        assert!(g.indices.iter().all(|i| cands.contains(i)));
    }
}
