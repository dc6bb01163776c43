use std::collections::BTreeMap;

use trackscope::domain::{ClassificationMode, PublicSuffixTable};
use trackscope::filter::{compile_filter_set, ListKind};
use trackscope::metrics::{compute_site_metrics, summarize_by_country, DomainGranularity, MetricsOptions, SiteMetrics};
use trackscope::stats::pearson_r;
use trackscope::synth::{generate, SynthConfig, SynthOutput};

fn measure(out: &SynthOutput, mode: ClassificationMode) -> Vec<SiteMetrics> {
    let trackers = compile_filter_set(&out.tracker_list, ListKind::Trackers).0;
    let ads = compile_filter_set(&out.ad_list, ListKind::Ads).0;
    let options = MetricsOptions { mode, granularity: DomainGranularity::Registrable };
    compute_site_metrics(&out.dataset, &ads, &trackers, options, &PublicSuffixTable::pinned()).0
}

#[test]
fn pipeline_recovers_ledger_exactly() {
    let mut config = SynthConfig::four_country_preset(11);
    config.ad_share_gap = Some(0.018);
    for c in &mut config.countries {
        c.n_sites = 40;
    }
    let out = generate(&config).unwrap();
    for mode in [ClassificationMode::PaperContainment, ClassificationMode::RegistrableDomain] {
        let measured: BTreeMap<i64, SiteMetrics> = measure(&out, mode).into_iter().map(|m| (m.visit_id, m)).collect();
        for v in &out.ledger.visits {
            let m = &measured[&v.visit_id];
            assert_eq!(m.n_requests, v.n_requests);
            assert_eq!(m.n_tracker_hits, v.n_tracker_hits, "visit {}", v.visit_id);
            assert_eq!(m.n_ad_hits, v.n_ad_hits);
            assert_eq!(m.n_fp_requests, v.n_fp_requests);
            assert_eq!(m.n_tp_requests, v.n_tp_requests);
            assert_eq!(m.n_tp_request_domains, v.n_tp_request_domains);
            assert_eq!(m.n_fp_cookies, v.n_fp_cookies);
            assert_eq!(m.n_tp_cookies, v.n_tp_cookies);
            assert_eq!(m.n_unclassified_requests + m.n_unclassified_cookies, 0);
        }
    }
}

#[test]
fn planted_means_recovered() {
    let out = generate(&SynthConfig::four_country_preset(3)).unwrap();
    let metrics = measure(&out, ClassificationMode::RegistrableDomain);
    let targets = [("AU", 0.06), ("DE", 0.05), ("JP", 0.05), ("US", 0.08)];
    for (summary, (code, target)) in summarize_by_country(&metrics).iter().zip(targets) {
        assert_eq!(summary.country, code);
        let mean = summary.get("proportion_hits").unwrap().mean;
        assert!((mean - target).abs() < 0.01, "{code}: {mean}");
    }
}

#[test]
fn zero_proportion_measures_no_hits() {
    let mut config = SynthConfig::four_country_preset(8);
    for c in &mut config.countries {
        c.n_sites = 20;
        c.mean_proportion_hits = 0.0;
    }
    let out = generate(&config).unwrap();
    assert!(measure(&out, ClassificationMode::PaperContainment).iter().all(|m| m.n_tracker_hits == 0));
}

#[test]
fn cookie_correlation_plant() {
    let target = 0.7;
    let mut passes = 0;
    for seed in 0..20 {
        let mut config = SynthConfig::four_country_preset(seed);
        config.countries.truncate(1);
        config.cookie_correlation = target;
        let out = generate(&config).unwrap();
        let x: Vec<f64> = out.ledger.visits.iter().map(|v| v.n_tp_request_domains as f64).collect();
        let y: Vec<f64> = out.ledger.visits.iter().map(|v| v.n_tp_cookies as f64).collect();
        let r = pearson_r(&x, &y).unwrap().r;
        if (r - target).abs() <= 0.1 {
            passes += 1;
        }
    }
    assert!(passes >= 18, "{passes}/20 seeds within 0.1");
}
