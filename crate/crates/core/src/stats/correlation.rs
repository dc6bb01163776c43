use serde::{Deserialize, Serialize};

use super::rank::rank_with_ties;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub kind: CorrelationKind,
    pub n: usize,
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    let r = product_moment(x, y)?;
    Ok(CorrelationResult { r, kind: CorrelationKind::Pearson, n: x.len() })
}

/// Pearson correlation of the average ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_shape(x, y)?;
    let r = product_moment(&rank_with_ties(x)?, &rank_with_ties(y)?)?;
    Ok(CorrelationResult { r, kind: CorrelationKind::Spearman, n: x.len() })
}

fn check_shape(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(StatsError::Insufficient { needed: 2, found: x.len() });
    }
    Ok(())
}

fn product_moment(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_shape(x, y)?;
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
