use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use super::{CrawlDataset, VisitId};
use crate::filter::CanonicalUrl;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    DuplicateRequest { visit_id: VisitId, url: String, ts: String },
    EmptyVisit { visit_id: VisitId },
    RankGap { country: String, missing: Vec<u32> },
    DuplicateRank { country: String, site_rank: u32 },
    MalformedUrl { visit_id: VisitId, url: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DuplicateRequest { visit_id, url, ts } => {
                write!(f, "visit {visit_id}: duplicate request {url} at `{ts}`")
            }
            Warning::EmptyVisit { visit_id } => write!(f, "visit {visit_id}: no HTTP requests"),
            Warning::RankGap { country, missing } => {
                let list: Vec<String> = missing.iter().map(u32::to_string).collect();
                write!(f, "{country}: site ranks missing: {}", list.join(", "))
            }
            Warning::DuplicateRank { country, site_rank } => {
                write!(f, "{country}: site rank {site_rank} visited twice")
            }
            Warning::MalformedUrl { visit_id, url } => write!(f, "visit {visit_id}: malformed request URL `{url}`"),
        }
    }
}

/// Non-fatal data-quality findings, in a deterministic order.
pub fn validate(dataset: &CrawlDataset) -> Vec<Warning> {
    let mut warnings = Vec::new();

    let mut seen = HashSet::new();
    for r in dataset.requests() {
        if !seen.insert((r.visit_id, r.url.as_str(), r.ts.as_str())) {
            warnings.push(Warning::DuplicateRequest { visit_id: r.visit_id, url: r.url.clone(), ts: r.ts.clone() });
        }
        if CanonicalUrl::parse(&r.url).is_err() {
            warnings.push(Warning::MalformedUrl { visit_id: r.visit_id, url: r.url.clone() });
        }
    }

    let with_requests: HashSet<VisitId> = dataset.requests().iter().map(|r| r.visit_id).collect();
    for v in dataset.visits() {
        if !with_requests.contains(&v.visit_id) {
            warnings.push(Warning::EmptyVisit { visit_id: v.visit_id });
        }
    }

    let mut ranks: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for v in dataset.visits() {
        ranks.entry(v.country.as_str()).or_default().push(v.site_rank);
    }
    for (country, mut list) in ranks {
        list.sort_unstable();
        let mut distinct = BTreeSet::new();
        for &rank in &list {
            if !distinct.insert(rank) {
                warnings.push(Warning::DuplicateRank { country: country.to_string(), site_rank: rank });
            }
        }
        let max = list.last().copied().unwrap_or(0);
        let missing: Vec<u32> = (1..=max).filter(|r| !distinct.contains(r)).collect();
        if !missing.is_empty() {
            warnings.push(Warning::RankGap { country: country.to_string(), missing });
        }
    }
    warnings
}
