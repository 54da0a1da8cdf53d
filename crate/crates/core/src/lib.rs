//! Exact influence of data subsets on a linear-regression coefficient, and
//! extreme-value tests for whether the most influential set is excessive.
//!
//! The pipeline is:
//!
//! 1. [`model`]: fit OLS and partial out controls so the coefficient of
//!    interest becomes a through-origin univariate slope.
//! 2. [`influence`]: closed-form influence `Δ(S) = Σ_{i∈S} x_i r_i / Σ_{n∉S} x_n²`.
//! 3. [`search`]: greedy and exhaustive most-influential-set search.
//! 4. [`evt`]: Gumbel / Fréchet / GEV distributions, maximum likelihood, and
//!    tail-index estimation.
//! 5. [`audit`]: block-maxima null distribution and the p-value for the
//!    observed maximal influence.
//! 6. [`sim`]: seeded Monte Carlo studies.

pub mod audit;
pub mod error;
pub mod evt;
pub mod influence;
pub mod model;
pub mod report;
pub mod search;
pub mod sim;

mod optim;
mod rng;

pub use audit::{AuditConfig, AuditReport, BlockCount, BlockMode, Regime};
pub use error::{Error, Result};
pub use evt::{EvdModel, Family};
pub use influence::InfluenceSet;
pub use model::{Dataset, FitOptions, RegressionFit};
pub use search::{Budget, Direction, SearchSpec};
