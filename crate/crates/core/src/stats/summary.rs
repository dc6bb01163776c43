use serde::{Deserialize, Serialize};

use super::{StatsError, Z_95};

/// Mean with its standard error and a normal-approximation 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCi {
    pub mean: f64,
    pub sd: f64,
    pub se_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

pub fn summary_ci(values: &[f64]) -> Result<SummaryCi, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::Insufficient { needed: 2, found: values.len() });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (mean, sd) = mean_sd(values);
    let sd = sd.unwrap_or(0.0);
    let se_mean = sd / (values.len() as f64).sqrt();
    Ok(SummaryCi { mean, sd, se_mean, ci_low: mean - Z_95 * se_mean, ci_high: mean + Z_95 * se_mean, n: values.len() })
}

/// Sample mean and (n - 1) standard deviation. The SD is `None` below two values;
/// the mean of an empty slice is 0.
pub fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    if values.is_empty() {
        return (0.0, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, Some((ss / (n - 1.0)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros() {
        let s = summary_ci(&[0.0; 4]).unwrap();
        assert_eq!((s.mean, s.sd, s.ci_low, s.ci_high), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn one_to_four() {
        let s = summary_ci(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((s.sd - 1.2910).abs() < 1e-4);
        assert!((s.se_mean - 0.6455).abs() < 1e-4);
        assert!((s.ci_high - s.ci_low - 2.0 * 1.96 * s.se_mean).abs() < 1e-12);
    }

    #[test]
    fn two_proportions() {
        let (mean, sd) = mean_sd(&[0.04, 0.08]);
        assert!((mean - 0.06).abs() < 1e-15);
        assert!((sd.unwrap() - 0.0283).abs() < 1e-4);
    }

    #[test]
    fn too_few_values() {
        assert!(matches!(summary_ci(&[1.0]), Err(StatsError::Insufficient { needed: 2, found: 1 })));
        assert_eq!(mean_sd(&[3.0]), (3.0, None));
    }
}
