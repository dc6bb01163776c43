use serde::{Deserialize, Serialize};

use super::rank::{rank_with_ties, tie_term};
use super::special::normal_two_tailed_p;
use super::summary::mean_sd;
use super::{StatsError, Z_95};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairwiseMethod {
    MannWhitney,
    TwoProportion,
}

impl PairwiseMethod {
    pub fn label(self) -> &'static str {
        match self {
            PairwiseMethod::MannWhitney => "mann_whitney",
            PairwiseMethod::TwoProportion => "two_proportion",
        }
    }
}

/// Two-sample comparison of `a` against `b`. `Z > 0` means `a` tends to be larger.
/// The interval bounds the difference `a - b` at 95%.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResult {
    pub a: String,
    pub b: String,
    #[serde(rename = "Z")]
    pub z: f64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Point estimate of `a - b` (difference of means or of proportions).
    pub estimate: f64,
    pub method: PairwiseMethod,
    pub degenerate: bool,
}

impl PairwiseResult {
    pub fn with_labels(mut self, a: impl Into<String>, b: impl Into<String>) -> Self {
        self.a = a.into();
        self.b = b.into();
        self
    }
}

/// Rank-sum test with the normal approximation and tie-corrected variance
/// (no continuity correction). The interval is on the difference of sample
/// means, each with standard error `sd / √n`.
pub fn mann_whitney_z(a: &[f64], b: &[f64]) -> Result<PairwiseResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::Empty);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = rank_with_ties(&pooled)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;

    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u_a = rank_sum_a - na * (na + 1.0) / 2.0;
    let mean_u = na * nb / 2.0;
    let var_u = if n > 1.0 { na * nb / 12.0 * ((n + 1.0) - tie_term(&pooled) / (n * (n - 1.0))) } else { 0.0 };

    let (mean_a, sd_a) = mean_sd(a);
    let (mean_b, sd_b) = mean_sd(b);
    let estimate = mean_a - mean_b;
    let se = (sd_a.unwrap_or(0.0).powi(2) / na + sd_b.unwrap_or(0.0).powi(2) / nb).sqrt();

    let (z, p, degenerate) = if var_u > 0.0 {
        let z = (u_a - mean_u) / var_u.sqrt();
        (z, normal_two_tailed_p(z), false)
    } else {
        (0.0, 1.0, true)
    };
    Ok(PairwiseResult {
        a: "a".into(),
        b: "b".into(),
        z,
        p,
        ci_low: estimate - Z_95 * se,
        ci_high: estimate + Z_95 * se,
        estimate,
        method: PairwiseMethod::MannWhitney,
        degenerate,
    })
}

/// Two-proportion z-test: pooled standard error for `Z`, unpooled for the interval.
pub fn two_proportion_z(hits_a: u64, n_a: u64, hits_b: u64, n_b: u64) -> Result<PairwiseResult, StatsError> {
    if n_a == 0 || n_b == 0 {
        return Err(StatsError::Domain("two_proportion_z: sample sizes must be positive".into()));
    }
    if hits_a > n_a || hits_b > n_b {
        return Err(StatsError::Domain("two_proportion_z: hits exceed sample size".into()));
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let pa = hits_a as f64 / na;
    let pb = hits_b as f64 / nb;
    let pooled = (hits_a + hits_b) as f64 / (na + nb);
    let se_pooled = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    let se_unpooled = (pa * (1.0 - pa) / na + pb * (1.0 - pb) / nb).sqrt();
    let estimate = pa - pb;

    let (z, p, degenerate) = if se_pooled > 0.0 {
        let z = estimate / se_pooled;
        (z, normal_two_tailed_p(z), false)
    } else {
        (0.0, 1.0, true)
    };
    Ok(PairwiseResult {
        a: "a".into(),
        b: "b".into(),
        z,
        p,
        ci_low: estimate - Z_95 * se_unpooled,
        ci_high: estimate + Z_95 * se_unpooled,
        estimate,
        method: PairwiseMethod::TwoProportion,
        degenerate,
    })
}
