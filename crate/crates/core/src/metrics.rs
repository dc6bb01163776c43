//! Per-visit tracking metrics and per-country summaries.
//!
//! For every visit, requests and cookies are labeled first- or third-party
//! against the visited site; request URLs are matched against the ad and
//! tracker lists with the same third-party flag. Records whose host cannot be
//! parsed are counted as unclassified and kept out of both party buckets and
//! out of the hit counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crawl::{CookieRecord, CrawlDataset, HttpRequestRecord, VisitId, VisitRecord};
use crate::domain::{registrable_domain, ClassificationMode, PublicSuffixTable, SiteContext};
use crate::filter::{CanonicalUrl, FilterSet, MatchQuery};
use crate::stats::mean_sd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainGranularity {
    Host,
    Registrable,
}

impl FromStr for DomainGranularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "host" => Ok(DomainGranularity::Host),
            "registrable" => Ok(DomainGranularity::Registrable),
            other => Err(format!("unknown domain granularity `{other}` (expected host|registrable)")),
        }
    }
}

impl fmt::Display for DomainGranularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainGranularity::Host => "host",
            DomainGranularity::Registrable => "registrable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub mode: ClassificationMode,
    pub granularity: DomainGranularity,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions { mode: ClassificationMode::RegistrableDomain, granularity: DomainGranularity::Registrable }
    }
}

/// Counts for one visit. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteMetrics {
    pub visit_id: VisitId,
    pub country: String,
    pub site_rank: u32,
    pub site_domain: String,
    /// Every request of the visit, classified or not.
    pub n_requests: u64,
    pub n_fp_requests: u64,
    pub n_tp_requests: u64,
    pub n_unclassified_requests: u64,
    /// Distinct third-party request domains at the configured granularity.
    pub n_tp_request_domains: u64,
    /// Classified cookies (`n_fp_cookies + n_tp_cookies`).
    pub n_cookies: u64,
    pub n_fp_cookies: u64,
    pub n_tp_cookies: u64,
    pub n_unclassified_cookies: u64,
    pub n_ad_hits: u64,
    pub n_tracker_hits: u64,
    /// `n_tracker_hits / n_requests`, 0 for a visit without requests.
    pub proportion_hits: f64,
    /// `n_ad_hits / n_requests`, 0 for a visit without requests.
    pub proportion_ad_hits: f64,
    pub empty_visit: bool,
}

/// Numeric fields usable as keys for summaries, rank tests and outliers.
pub const NUMERIC_FIELDS: [&str; 14] = [
    "n_requests",
    "n_fp_requests",
    "n_tp_requests",
    "n_unclassified_requests",
    "n_tp_request_domains",
    "n_cookies",
    "n_fp_cookies",
    "n_tp_cookies",
    "n_unclassified_cookies",
    "n_ad_hits",
    "n_tracker_hits",
    "proportion_hits",
    "proportion_ad_hits",
    "site_rank",
];

impl SiteMetrics {
    pub fn field(&self, name: &str) -> Option<f64> {
        Some(match name {
            "n_requests" => self.n_requests as f64,
            "n_fp_requests" => self.n_fp_requests as f64,
            "n_tp_requests" => self.n_tp_requests as f64,
            "n_unclassified_requests" => self.n_unclassified_requests as f64,
            "n_tp_request_domains" => self.n_tp_request_domains as f64,
            "n_cookies" => self.n_cookies as f64,
            "n_fp_cookies" => self.n_fp_cookies as f64,
            "n_tp_cookies" => self.n_tp_cookies as f64,
            "n_unclassified_cookies" => self.n_unclassified_cookies as f64,
            "n_ad_hits" => self.n_ad_hits as f64,
            "n_tracker_hits" => self.n_tracker_hits as f64,
            "proportion_hits" => self.proportion_hits,
            "proportion_ad_hits" => self.proportion_ad_hits,
            "site_rank" => self.site_rank as f64,
            _ => return None,
        })
    }
}

/// Side-channel counters from a metrics run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsDiagnostics {
    pub unclassified_requests: u64,
    pub unclassified_cookies: u64,
    pub empty_visits: u64,
    /// Visits whose own site domain could not be parsed.
    pub malformed_sites: Vec<VisitId>,
}

pub fn compute_site_metrics(
    dataset: &CrawlDataset,
    ads: &FilterSet,
    trackers: &FilterSet,
    options: MetricsOptions,
    table: &PublicSuffixTable,
) -> (Vec<SiteMetrics>, MetricsDiagnostics) {
    let mut requests: HashMap<VisitId, Vec<&HttpRequestRecord>> = HashMap::new();
    for r in dataset.requests() {
        requests.entry(r.visit_id).or_default().push(r);
    }
    let mut cookies: HashMap<VisitId, Vec<&CookieRecord>> = HashMap::new();
    for c in dataset.cookies() {
        cookies.entry(c.visit_id).or_default().push(c);
    }

    let mut visits: Vec<&VisitRecord> = dataset.visits().iter().collect();
    visits.sort_by(|a, b| (&a.country, a.site_rank, a.visit_id).cmp(&(&b.country, b.site_rank, b.visit_id)));

    let results: Vec<(SiteMetrics, bool)> = visits
        .par_iter()
        .map(|v| {
            let reqs = requests.get(&v.visit_id).map(Vec::as_slice).unwrap_or(&[]);
            let cks = cookies.get(&v.visit_id).map(Vec::as_slice).unwrap_or(&[]);
            visit_metrics(v, reqs, cks, ads, trackers, options, table)
        })
        .collect();

    let mut diagnostics = MetricsDiagnostics::default();
    let mut out = Vec::with_capacity(results.len());
    for (m, site_ok) in results {
        diagnostics.unclassified_requests += m.n_unclassified_requests;
        diagnostics.unclassified_cookies += m.n_unclassified_cookies;
        diagnostics.empty_visits += u64::from(m.empty_visit);
        if !site_ok {
            diagnostics.malformed_sites.push(m.visit_id);
        }
        out.push(m);
    }
    (out, diagnostics)
}

fn visit_metrics(
    visit: &VisitRecord,
    requests: &[&HttpRequestRecord],
    cookies: &[&CookieRecord],
    ads: &FilterSet,
    trackers: &FilterSet,
    options: MetricsOptions,
    table: &PublicSuffixTable,
) -> (SiteMetrics, bool) {
    let mut m = SiteMetrics {
        visit_id: visit.visit_id,
        country: visit.country.clone(),
        site_rank: visit.site_rank,
        site_domain: visit.site_domain.clone(),
        n_requests: requests.len() as u64,
        n_fp_requests: 0,
        n_tp_requests: 0,
        n_unclassified_requests: 0,
        n_tp_request_domains: 0,
        n_cookies: 0,
        n_fp_cookies: 0,
        n_tp_cookies: 0,
        n_unclassified_cookies: 0,
        n_ad_hits: 0,
        n_tracker_hits: 0,
        proportion_hits: 0.0,
        proportion_ad_hits: 0.0,
        empty_visit: requests.is_empty() && cookies.is_empty(),
    };

    let Ok(site) = SiteContext::new(&visit.site_domain, options.mode, table) else {
        m.n_unclassified_requests = requests.len() as u64;
        m.n_unclassified_cookies = cookies.len() as u64;
        return (m, false);
    };

    let mut tp_domains = BTreeSet::new();
    for r in requests {
        let Ok(label) = site.classify(&r.url) else {
            m.n_unclassified_requests += 1;
            continue;
        };
        let third = label.is_third_party();
        let source =
            CanonicalUrl::parse(&r.top_url).map(|u| u.host().to_string()).unwrap_or_else(|_| site.host().to_string());
        let Ok(query) = MatchQuery::new(&r.url, &source, third) else {
            m.n_unclassified_requests += 1;
            continue;
        };
        if third {
            m.n_tp_requests += 1;
            let key = match options.granularity {
                DomainGranularity::Host => query.hostname().to_string(),
                DomainGranularity::Registrable => registrable_domain(query.hostname(), table)
                    .map(|d| d.name)
                    .unwrap_or_else(|_| query.hostname().to_string()),
            };
            tp_domains.insert(key);
        } else {
            m.n_fp_requests += 1;
        }
        if trackers.match_url(&query).is_hit() {
            m.n_tracker_hits += 1;
        }
        if ads.match_url(&query).is_hit() {
            m.n_ad_hits += 1;
        }
    }
    m.n_tp_request_domains = tp_domains.len() as u64;

    for c in cookies {
        match site.classify(&c.domain) {
            Ok(label) if label.is_third_party() => m.n_tp_cookies += 1,
            Ok(_) => m.n_fp_cookies += 1,
            Err(_) => m.n_unclassified_cookies += 1,
        }
    }
    m.n_cookies = m.n_fp_cookies + m.n_tp_cookies;

    if m.n_requests > 0 {
        m.proportion_hits = m.n_tracker_hits as f64 / m.n_requests as f64;
        m.proportion_ad_hits = m.n_ad_hits as f64 / m.n_requests as f64;
    }
    (m, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    /// (n - 1) denominator; 0 when only one visit is present.
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountrySummary {
    pub country: String,
    pub n_visits: usize,
    /// Only one visit: every SD is reported as 0.
    pub single_visit: bool,
    pub fields: BTreeMap<String, MeanSd>,
}

impl CountrySummary {
    pub fn get(&self, field: &str) -> Option<MeanSd> {
        self.fields.get(field).copied()
    }
}

/// One summary per country, sorted by country code.
pub fn summarize_by_country(metrics: &[SiteMetrics]) -> Vec<CountrySummary> {
    let mut groups: BTreeMap<&str, Vec<&SiteMetrics>> = BTreeMap::new();
    for m in metrics {
        groups.entry(m.country.as_str()).or_default().push(m);
    }
    groups.into_iter().map(|(country, rows)| summarize(country, &rows)).collect()
}

/// Summary over every visit regardless of country, labeled `ALL`.
pub fn summarize_all(metrics: &[SiteMetrics]) -> CountrySummary {
    let rows: Vec<&SiteMetrics> = metrics.iter().collect();
    summarize("ALL", &rows)
}

fn summarize(country: &str, rows: &[&SiteMetrics]) -> CountrySummary {
    let mut fields = BTreeMap::new();
    for name in NUMERIC_FIELDS.iter().filter(|n| **n != "site_rank") {
        let values: Vec<f64> = rows.iter().filter_map(|m| m.field(name)).collect();
        let (mean, sd) = mean_sd(&values);
        fields.insert(name.to_string(), MeanSd { mean, sd: sd.unwrap_or(0.0) });
    }
    CountrySummary { country: country.to_string(), n_visits: rows.len(), single_visit: rows.len() == 1, fields }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("unknown metric field `{0}`")]
    BadKey(String),
    #[error("k must be at least 1")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub rank: usize,
    pub visit_id: VisitId,
    pub country: String,
    pub site_domain: String,
    pub value: f64,
}

/// The `k` visits with the largest `key`; ties go to the lexicographically
/// smaller site domain, then the smaller visit id.
pub fn top_outliers(metrics: &[SiteMetrics], key: &str, k: usize) -> Result<Vec<Outlier>, MetricsError> {
    if k == 0 {
        return Err(MetricsError::ZeroK);
    }
    if !NUMERIC_FIELDS.contains(&key) {
        return Err(MetricsError::BadKey(key.to_string()));
    }
    let mut rows: Vec<(&SiteMetrics, f64)> = metrics.iter().map(|m| (m, m.field(key).unwrap_or(0.0))).collect();
    rows.sort_by(|(a, va), (b, vb)| {
        vb.total_cmp(va).then_with(|| a.site_domain.cmp(&b.site_domain)).then(a.visit_id.cmp(&b.visit_id))
    });
    Ok(rows
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (m, value))| Outlier {
            rank: i + 1,
            visit_id: m.visit_id,
            country: m.country.clone(),
            site_domain: m.site_domain.clone(),
            value,
        })
        .collect())
}

/// One CSV row per visit, columns in [`SiteMetrics`] field order.
pub fn write_metrics_csv<W: std::io::Write>(metrics: &[SiteMetrics], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for m in metrics {
        writer.serialize(m)?;
    }
    writer.flush()?;
    Ok(())
}
