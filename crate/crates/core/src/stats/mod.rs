//! Statistics kernel: average ranks, Kruskal-Wallis, rank-sum and
//! two-proportion z-tests, correlations, and mean/SE/CI summaries.
//!
//! Everything here is a pure function of its inputs. Significance is always
//! two-tailed at α = 0.05.

mod correlation;
mod kruskal;
mod pairwise;
mod rank;
pub mod special;
mod summary;

use thiserror::Error;

pub use correlation::{pearson_r, spearman_rho, CorrelationKind, CorrelationResult};
pub use kruskal::{kruskal_wallis, KwResult};
pub use pairwise::{mann_whitney_z, two_proportion_z, PairwiseMethod, PairwiseResult};
pub use rank::rank_with_ties;
pub use special::chi2_sf;
pub use summary::{mean_sd, summary_ci, SummaryCi};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("empty input")]
    Empty,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("need at least 2 groups, found {found}")]
    InsufficientGroups { found: usize },
    #[error("group `{0}` has no observations")]
    EmptyGroup(String),
    #[error("need at least {needed} values, found {found}")]
    Insufficient { needed: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("domain error: {0}")]
    Domain(String),
}
