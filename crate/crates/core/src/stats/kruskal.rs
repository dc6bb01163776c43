use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rank::{rank_with_ties, tie_term};
use super::special::chi2_sf;
use super::StatsError;

/// Kruskal-Wallis H test outcome. `H` is tie-corrected and referred to a
/// chi-square distribution with `df = groups - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwResult {
    #[serde(rename = "H")]
    pub h: f64,
    pub df: u32,
    pub p: f64,
    pub mean_ranks: BTreeMap<String, f64>,
    #[serde(rename = "N")]
    pub n: usize,
    /// Every observation identical: H is reported as 0 and p as 1.
    pub degenerate: bool,
}

pub fn kruskal_wallis(groups: &BTreeMap<String, Vec<f64>>) -> Result<KwResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::InsufficientGroups { found: groups.len() });
    }
    if let Some((label, _)) = groups.iter().find(|(_, v)| v.is_empty()) {
        return Err(StatsError::EmptyGroup(label.clone()));
    }

    let pooled: Vec<f64> = groups.values().flatten().copied().collect();
    let ranks = rank_with_ties(&pooled)?;
    let n = pooled.len();
    let nf = n as f64;
    let df = (groups.len() - 1) as u32;

    let mut mean_ranks = BTreeMap::new();
    let mut weighted = 0.0;
    let mut offset = 0;
    for (label, values) in groups {
        let rank_sum: f64 = ranks[offset..offset + values.len()].iter().sum();
        let ni = values.len() as f64;
        weighted += rank_sum * rank_sum / ni;
        mean_ranks.insert(label.clone(), rank_sum / ni);
        offset += values.len();
    }

    let correction = 1.0 - tie_term(&pooled) / (nf * nf * nf - nf);
    if correction <= 0.0 {
        return Ok(KwResult { h: 0.0, df, p: 1.0, mean_ranks, n, degenerate: true });
    }
    let raw = 12.0 / (nf * (nf + 1.0)) * weighted - 3.0 * (nf + 1.0);
    let h = (raw / correction).max(0.0);
    let p = chi2_sf(h, df)?;
    Ok(KwResult { h, df, p, mean_ranks, n, degenerate: false })
}
