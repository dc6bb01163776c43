use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AnalyzeOptions, CorrelationChoice, PairwiseChoice};
use crate::crawl::CrawlDataset;
use crate::domain::PublicSuffixTable;
use crate::filter::{FilterSet, ParseReport};
use crate::metrics::{
    compute_site_metrics, summarize_all, summarize_by_country, top_outliers, CountrySummary, MetricsDiagnostics,
    MetricsOptions, Outlier, SiteMetrics,
};
use crate::stats::{
    kruskal_wallis, mann_whitney_z, pearson_r, spearman_rho, summary_ci, two_proportion_z, KwResult, PairwiseResult,
    SummaryCi,
};

/// Metrics that get a Kruskal-Wallis rank table across countries.
pub const RANK_METRICS: [&str; 5] =
    ["n_tp_request_domains", "n_tp_requests", "n_tp_cookies", "n_tracker_hits", "proportion_hits"];

const OUTLIER_KEY: &str = "n_tp_cookies";
const CORRELATION_X: &str = "n_tp_request_domains";
const CORRELATION_Y: &str = "n_tp_cookies";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub provenance: String,
    pub visits: usize,
    pub requests: usize,
    pub cookies: usize,
    pub visits_by_country: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListSummary {
    pub rules: usize,
    pub skipped: usize,
    pub parse_errors: usize,
}

impl From<&ParseReport> for ListSummary {
    fn from(r: &ParseReport) -> Self {
        ListSummary { rules: r.rules, skipped: r.skipped_total(), parse_errors: r.errors.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTest {
    pub metric: String,
    pub result: Option<KwResult>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryCi {
    pub country: String,
    pub ci: Option<SummaryCi>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub country: String,
    pub n: usize,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerVsAd {
    pub requests: u64,
    pub tracker_hits: u64,
    pub ad_hits: u64,
    pub tracker_share: f64,
    pub ad_share: f64,
    /// Pooled tracker share against pooled ad share.
    pub z_test: Option<PairwiseResult>,
    /// Per-visit tracker proportions against per-visit ad proportions.
    pub kw: Option<KwResult>,
    /// Mean of the per-visit tracker and ad proportions taken together.
    pub combined: Option<SummaryCi>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierTable {
    pub key: String,
    pub rows: Vec<Outlier>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub options: AnalyzeOptions,
    pub dataset: DatasetSummary,
    pub ads_list: ListSummary,
    pub trackers_list: ListSummary,
    pub diagnostics: MetricsDiagnostics,
    pub rank_tests: Vec<RankTest>,
    pub country_summaries: Vec<CountrySummary>,
    pub overall_summary: CountrySummary,
    /// 95% interval of mean `proportion_hits`, per country then `ALL`.
    pub proportion_ci: Vec<CountryCi>,
    pub pairwise: Vec<PairwiseResult>,
    pub correlation_x: String,
    pub correlation_y: String,
    pub correlations: Vec<CorrelationRow>,
    pub tracker_vs_ad: TrackerVsAd,
    pub outliers: OutlierTable,
    #[serde(skip)]
    pub metrics: Vec<SiteMetrics>,
    /// Degenerate or undefined results, in report order.
    pub notes: Vec<String>,
}

impl Analysis {
    pub fn degenerate(&self) -> bool {
        !self.notes.is_empty()
    }
}

fn column(rows: &[&SiteMetrics], key: &str) -> Vec<f64> {
    rows.iter().map(|m| m.field(key).expect("known metric")).collect()
}

pub fn analyze(
    dataset: &CrawlDataset,
    ads: (&FilterSet, &ParseReport),
    trackers: (&FilterSet, &ParseReport),
    table: &PublicSuffixTable,
    options: AnalyzeOptions,
) -> Analysis {
    let metric_options = MetricsOptions { mode: options.mode, granularity: options.granularity };
    let (metrics, diagnostics) = compute_site_metrics(dataset, ads.0, trackers.0, metric_options, table);
    let mut notes = Vec::new();

    let mut by_country: BTreeMap<String, Vec<&SiteMetrics>> = BTreeMap::new();
    for m in &metrics {
        by_country.entry(m.country.clone()).or_default().push(m);
    }

    let rank_tests = RANK_METRICS
        .iter()
        .map(|metric| {
            let groups: BTreeMap<String, Vec<f64>> =
                by_country.iter().map(|(c, rows)| (c.clone(), column(rows, metric))).collect();
            match kruskal_wallis(&groups) {
                Ok(r) => {
                    let note = r.degenerate.then(|| format!("{metric}: all observations tied; H = 0, p = 1"));
                    notes.extend(note.clone());
                    RankTest { metric: metric.to_string(), result: Some(r), note }
                }
                Err(e) => {
                    let note = format!("{metric}: rank test not computed: {e}");
                    notes.push(note.clone());
                    RankTest { metric: metric.to_string(), result: None, note: Some(note) }
                }
            }
        })
        .collect();

    let mut proportion_ci: Vec<CountryCi> = by_country
        .iter()
        .map(|(c, rows)| CountryCi { country: c.clone(), ci: summary_ci(&column(rows, "proportion_hits")).ok() })
        .collect();
    let all: Vec<&SiteMetrics> = metrics.iter().collect();
    proportion_ci.push(CountryCi { country: "ALL".into(), ci: summary_ci(&column(&all, "proportion_hits")).ok() });

    let countries: Vec<&String> = by_country.keys().collect();
    let mut pairwise = Vec::new();
    for (i, a) in countries.iter().enumerate() {
        for b in &countries[i + 1..] {
            let (ra, rb) = (&by_country[*a], &by_country[*b]);
            if matches!(options.pairwise, PairwiseChoice::Rank | PairwiseChoice::Both) {
                let r = mann_whitney_z(&column(ra, "proportion_hits"), &column(rb, "proportion_hits"))
                    .expect("groups are non-empty")
                    .with_labels(a.as_str(), b.as_str());
                if r.degenerate {
                    notes.push(format!("pairwise {a}-{b} (rank): all proportions tied"));
                }
                pairwise.push(r);
            }
            if matches!(options.pairwise, PairwiseChoice::Proportion | PairwiseChoice::Both) {
                let hits = |rows: &[&SiteMetrics]| rows.iter().map(|m| m.n_tracker_hits).sum::<u64>();
                let reqs = |rows: &[&SiteMetrics]| rows.iter().map(|m| m.n_requests).sum::<u64>();
                match two_proportion_z(hits(ra), reqs(ra), hits(rb), reqs(rb)) {
                    Ok(r) => {
                        if r.degenerate {
                            notes.push(format!("pairwise {a}-{b} (proportion): pooled proportion is 0 or 1"));
                        }
                        pairwise.push(r.with_labels(a.as_str(), b.as_str()));
                    }
                    Err(e) => notes.push(format!("pairwise {a}-{b} (proportion) not computed: {e}")),
                }
            }
        }
    }

    let correlations = by_country
        .iter()
        .map(|(c, rows)| {
            let (x, y) = (column(rows, CORRELATION_X), column(rows, CORRELATION_Y));
            let want_p = matches!(options.correlation, CorrelationChoice::Pearson | CorrelationChoice::Both);
            let want_s = matches!(options.correlation, CorrelationChoice::Spearman | CorrelationChoice::Both);
            let mut note = None;
            let mut run = |f: fn(&[f64], &[f64]) -> Result<crate::stats::CorrelationResult, _>, wanted: bool| {
                if !wanted {
                    return None;
                }
                match f(&x, &y) {
                    Ok(r) => Some(r.r),
                    Err(e) => {
                        note = Some(format!("correlation for {c} not computed: {e}"));
                        None
                    }
                }
            };
            let pearson = run(pearson_r, want_p);
            let spearman = run(spearman_rho, want_s);
            notes.extend(note.clone());
            CorrelationRow { country: c.clone(), n: rows.len(), pearson, spearman, note }
        })
        .collect();

    let tracker_vs_ad = tracker_vs_ad(&metrics, &mut notes);
    let outliers = OutlierTable {
        key: OUTLIER_KEY.into(),
        rows: top_outliers(&metrics, OUTLIER_KEY, options.top_k.max(1)).expect("known key and k >= 1"),
    };

    Analysis {
        options,
        dataset: DatasetSummary {
            provenance: dataset.provenance().to_string(),
            visits: dataset.visits().len(),
            requests: dataset.requests().len(),
            cookies: dataset.cookies().len(),
            visits_by_country: dataset.visits_by_country().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        },
        ads_list: ListSummary::from(ads.1),
        trackers_list: ListSummary::from(trackers.1),
        diagnostics,
        rank_tests,
        country_summaries: summarize_by_country(&metrics),
        overall_summary: summarize_all(&metrics),
        proportion_ci,
        pairwise,
        correlation_x: CORRELATION_X.into(),
        correlation_y: CORRELATION_Y.into(),
        correlations,
        tracker_vs_ad,
        outliers,
        metrics,
        notes,
    }
}

fn tracker_vs_ad(metrics: &[SiteMetrics], notes: &mut Vec<String>) -> TrackerVsAd {
    let requests: u64 = metrics.iter().map(|m| m.n_requests).sum();
    let tracker_hits: u64 = metrics.iter().map(|m| m.n_tracker_hits).sum();
    let ad_hits: u64 = metrics.iter().map(|m| m.n_ad_hits).sum();
    let share = |h: u64| if requests == 0 { 0.0 } else { h as f64 / requests as f64 };
    let mut note = None;

    let z_test = match two_proportion_z(tracker_hits, requests, ad_hits, requests) {
        Ok(r) => {
            if r.degenerate {
                note = Some("trackers vs ads: pooled proportion is 0 or 1".to_string());
            }
            Some(r.with_labels("trackers", "ads"))
        }
        Err(e) => {
            note = Some(format!("trackers vs ads not computed: {e}"));
            None
        }
    };

    let t: Vec<f64> = metrics.iter().map(|m| m.proportion_hits).collect();
    let a: Vec<f64> = metrics.iter().map(|m| m.proportion_ad_hits).collect();
    let groups = BTreeMap::from([("ads".to_string(), a.clone()), ("trackers".to_string(), t.clone())]);
    let kw = kruskal_wallis(&groups).ok();
    if kw.as_ref().is_some_and(|k| k.degenerate) && note.is_none() {
        note = Some("trackers vs ads: all per-visit proportions tied".to_string());
    }
    let combined: Vec<f64> = t.into_iter().chain(a).collect();

    notes.extend(note.clone());
    TrackerVsAd {
        requests,
        tracker_hits,
        ad_hits,
        tracker_share: share(tracker_hits),
        ad_share: share(ad_hits),
        z_test,
        kw,
        combined: summary_ci(&combined).ok(),
        note,
    }
}
