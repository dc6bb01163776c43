use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::analysis::Analysis;
use super::ReportError;
use crate::metrics::{write_metrics_csv, CountrySummary};
use crate::stats::{PairwiseMethod, ALPHA};

/// `<.0001` below 1e-4, four decimals otherwise.
pub fn fmt_p(p: f64) -> String {
    if p < 1e-4 {
        "<.0001".to_string()
    } else {
        format!("{p:.4}")
    }
}

fn p_clause(p: f64) -> String {
    if p < 1e-4 {
        "p < .0001".to_string()
    } else {
        format!("p = {p:.4}")
    }
}

fn fmt_opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.decimals$}"))
}

/// Proportion-like fields print with three decimals, counts with two.
fn decimals_for(field: &str) -> usize {
    if field.starts_with("proportion") {
        3
    } else {
        2
    }
}

const SUMMARY_FIELDS: [&str; 6] =
    ["n_requests", "n_tp_request_domains", "n_tp_cookies", "n_tracker_hits", "n_ad_hits", "proportion_hits"];

pub fn render_text(a: &Analysis) -> String {
    let mut s = String::new();
    let d = &a.dataset;
    let _ = writeln!(s, "TRACKING MEASUREMENT REPORT");
    let _ = writeln!(s);
    let _ = writeln!(s, "dataset: {}", d.provenance);
    let _ = writeln!(s, "visits: {}  requests: {}  cookies: {}", d.visits, d.requests, d.cookies);
    let per: Vec<String> = d.visits_by_country.iter().map(|(c, n)| format!("{c} {n}")).collect();
    let _ = writeln!(s, "visits by country: {}", per.join(", "));
    let _ = writeln!(s, "classification: {}  domain granularity: {}", a.options.mode, a.options.granularity);
    let _ = writeln!(
        s,
        "tracker list: {} rules ({} skipped, {} errors)  ad list: {} rules ({} skipped, {} errors)",
        a.trackers_list.rules,
        a.trackers_list.skipped,
        a.trackers_list.parse_errors,
        a.ads_list.rules,
        a.ads_list.skipped,
        a.ads_list.parse_errors
    );
    let g = &a.diagnostics;
    let _ = writeln!(
        s,
        "unclassified requests: {}  unclassified cookies: {}  empty visits: {}",
        g.unclassified_requests, g.unclassified_cookies, g.empty_visits
    );

    section(&mut s, "RANK TESTS BY COUNTRY (Kruskal-Wallis H, chi-square approximation)");
    for t in &a.rank_tests {
        let _ = writeln!(s, "{}", t.metric);
        match &t.result {
            Some(r) => {
                let _ = writeln!(s, "  {:<8}{:>6}{:>12}", "Country", "N", "Mean rank");
                for (c, rank) in &r.mean_ranks {
                    let n = d.visits_by_country.get(c).copied().unwrap_or(0);
                    let _ = writeln!(s, "  {c:<8}{n:>6}{rank:>12.2}");
                }
                let _ = writeln!(s, "  H = {:.3}; df = {}; {}; N = {}", r.h, r.df, p_clause(r.p), r.n);
            }
            None => {
                let _ = writeln!(s, "  insufficient groups: {}", t.note.as_deref().unwrap_or(""));
            }
        }
    }

    section(&mut s, "SUMMARY STATISTICS BY COUNTRY (mean / SD)");
    summary_table(&mut s, &a.country_summaries, &a.overall_summary);
    let _ = writeln!(s);
    let _ = writeln!(s, "proportion_hits mean with 95% CI");
    let _ = writeln!(s, "  {:<8}{:>6}{:>10}{:>10}{:>20}", "Country", "N", "Mean", "SE", "95% CI");
    for row in &a.proportion_ci {
        match &row.ci {
            Some(ci) => {
                let _ = writeln!(
                    s,
                    "  {:<8}{:>6}{:>10.3}{:>10.4}{:>20}",
                    row.country,
                    ci.n,
                    ci.mean,
                    ci.se_mean,
                    format!("[{:.3}, {:.3}]", ci.ci_low, ci.ci_high)
                );
            }
            None => {
                let _ = writeln!(s, "  {:<8}  fewer than two visits", row.country);
            }
        }
    }

    section(&mut s, "PAIRWISE COMPARISONS OF TRACKER PROPORTION (difference = first - second)");
    for method in [PairwiseMethod::MannWhitney, PairwiseMethod::TwoProportion] {
        let rows: Vec<_> = a.pairwise.iter().filter(|r| r.method == method).collect();
        if rows.is_empty() {
            continue;
        }
        let title = match method {
            PairwiseMethod::MannWhitney => "rank test (Mann-Whitney), difference of mean per-visit proportions",
            PairwiseMethod::TwoProportion => "two-proportion z-test, difference of pooled proportions",
        };
        let _ = writeln!(s, "{title}");
        let _ = writeln!(s, "  {:<10}{:>10}{:>20}{:>10}{:>10}", "Pair", "Diff", "95% CI", "Z", "p");
        for r in rows {
            let _ = writeln!(
                s,
                "  {:<10}{:>10.3}{:>20}{:>10.3}{:>10}",
                format!("{}-{}", r.a, r.b),
                r.estimate,
                format!("[{:.3}, {:.3}]", r.ci_low, r.ci_high),
                r.z,
                fmt_p(r.p)
            );
        }
    }

    section(&mut s, "CORRELATION BY COUNTRY");
    let _ = writeln!(s, "{} vs {}", a.correlation_x, a.correlation_y);
    let _ = writeln!(s, "  {:<8}{:>6}{:>12}{:>12}", "Country", "N", "Pearson r", "Spearman");
    for r in &a.correlations {
        let _ = writeln!(s, "  {:<8}{:>6}{:>12}{:>12}", r.country, r.n, fmt_opt(r.pearson, 3), fmt_opt(r.spearman, 3));
    }

    section(&mut s, "TRACKERS VS ADS");
    let t = &a.tracker_vs_ad;
    let _ = writeln!(s, "requests: {}  tracker hits: {}  ad hits: {}", t.requests, t.tracker_hits, t.ad_hits);
    let _ = writeln!(s, "tracker share: {:.3}  ad share: {:.3}", t.tracker_share, t.ad_share);
    if let Some(z) = &t.z_test {
        let _ = writeln!(
            s,
            "difference: {:.3}; 95% CI [{:.3}, {:.3}]; Z = {:.3}; {}",
            z.estimate,
            z.ci_low,
            z.ci_high,
            z.z,
            p_clause(z.p)
        );
    }
    if let Some(k) = &t.kw {
        let _ = writeln!(s, "per-visit proportions: H = {:.3}; df = {}; {}", k.h, k.df, p_clause(k.p));
    }
    if let Some(c) = &t.combined {
        let _ = writeln!(
            s,
            "combined proportion: mean = {:.3}; SE = {:.4}; 95% CI [{:.3}, {:.3}]",
            c.mean, c.se_mean, c.ci_low, c.ci_high
        );
    }

    section(&mut s, &format!("TOP {} SITES BY {}", a.outliers.rows.len(), a.outliers.key));
    let _ = writeln!(s, "  {:<6}{:<8}{:<32}{:>10}", "Rank", "Country", "Site", "Value");
    for o in &a.outliers.rows {
        let _ = writeln!(s, "  {:<6}{:<8}{:<32}{:>10}", o.rank, o.country, o.site_domain, o.value);
    }

    section(&mut s, "NOTES");
    let _ = writeln!(s, "significance level {ALPHA}, two-tailed");
    for n in &a.notes {
        let _ = writeln!(s, "warning: {n}");
    }
    s
}

fn section(s: &mut String, title: &str) {
    let _ = writeln!(s);
    let _ = writeln!(s, "== {title} ==");
}

fn summary_table(s: &mut String, rows: &[CountrySummary], overall: &CountrySummary) {
    let _ = write!(s, "  {:<8}{:>6}", "Country", "N");
    for f in SUMMARY_FIELDS {
        let _ = write!(s, "  {f:>22}");
    }
    let _ = writeln!(s);
    for row in rows.iter().chain(std::iter::once(overall)) {
        let _ = write!(s, "  {:<8}{:>6}", row.country, row.n_visits);
        for f in SUMMARY_FIELDS {
            let v = row.get(f).expect("summary covers every field");
            let k = decimals_for(f);
            let _ = write!(s, "  {:>22}", format!("{:.k$} / {:.k$}", v.mean, v.sd));
        }
        let _ = writeln!(s);
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| ReportError::io(path, e))
}

#[derive(Serialize)]
struct RankRow<'a> {
    metric: &'a str,
    country: &'a str,
    mean_rank: f64,
}

#[derive(Serialize)]
struct KwRow<'a> {
    metric: &'a str,
    h: Option<f64>,
    df: Option<u32>,
    p: Option<f64>,
    n: Option<usize>,
    degenerate: bool,
    note: &'a str,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    country: &'a str,
    n_visits: usize,
    metric: &'a str,
    mean: f64,
    sd: f64,
}

#[derive(Serialize)]
struct CiRow<'a> {
    country: &'a str,
    n: Option<usize>,
    mean: Option<f64>,
    sd: Option<f64>,
    se_mean: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
}

/// Writes one CSV per report table into `dir`, with full-precision values.
pub fn write_tables(a: &Analysis, dir: &Path) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir).map_err(|e| ReportError::io(dir, e))?;

    let file = std::fs::File::create(dir.join("site_metrics.csv")).map_err(|e| ReportError::io(dir, e))?;
    write_metrics_csv(&a.metrics, file)?;

    let mut ranks = Vec::new();
    for t in &a.rank_tests {
        if let Some(r) = &t.result {
            for (c, v) in &r.mean_ranks {
                ranks.push(RankRow { metric: &t.metric, country: c, mean_rank: *v });
            }
        }
    }
    write_csv(&dir.join("rank_tables.csv"), ranks)?;
    write_csv(
        &dir.join("kruskal_wallis.csv"),
        a.rank_tests.iter().map(|t| KwRow {
            metric: &t.metric,
            h: t.result.as_ref().map(|r| r.h),
            df: t.result.as_ref().map(|r| r.df),
            p: t.result.as_ref().map(|r| r.p),
            n: t.result.as_ref().map(|r| r.n),
            degenerate: t.result.as_ref().is_none_or(|r| r.degenerate),
            note: t.note.as_deref().unwrap_or(""),
        }),
    )?;

    let mut summary = Vec::new();
    for row in a.country_summaries.iter().chain(std::iter::once(&a.overall_summary)) {
        for (metric, v) in &row.fields {
            summary.push(SummaryRow { country: &row.country, n_visits: row.n_visits, metric, mean: v.mean, sd: v.sd });
        }
    }
    write_csv(&dir.join("country_summary.csv"), summary)?;
    write_csv(
        &dir.join("proportion_ci.csv"),
        a.proportion_ci.iter().map(|r| CiRow {
            country: &r.country,
            n: r.ci.as_ref().map(|c| c.n),
            mean: r.ci.as_ref().map(|c| c.mean),
            sd: r.ci.as_ref().map(|c| c.sd),
            se_mean: r.ci.as_ref().map(|c| c.se_mean),
            ci_low: r.ci.as_ref().map(|c| c.ci_low),
            ci_high: r.ci.as_ref().map(|c| c.ci_high),
        }),
    )?;
    write_csv(&dir.join("pairwise.csv"), &a.pairwise)?;
    write_csv(&dir.join("correlation.csv"), &a.correlations)?;

    let t = &a.tracker_vs_ad;
    let mut tva = Vec::new();
    if let Some(z) = &t.z_test {
        tva.push(z.clone());
    }
    write_csv(&dir.join("tracker_vs_ad.csv"), tva)?;
    write_csv(&dir.join("outliers.csv"), &a.outliers.rows)
}
