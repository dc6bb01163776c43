//! Synthetic crawl generation with planted per-country tracking levels.
//!
//! Every visit draws a request count from a log-normal matched to the
//! country's mean/SD, a tracker proportion from a Beta matched the same way,
//! and a binomial number of tracker requests at that proportion. Tracker
//! requests go to a pool of `tracker{j}.net` hosts that the generated filter
//! list matches exactly, so the pipeline must recover the ledger counts.
//!
//! Each visit owns a ChaCha stream keyed by (seed, country, site rank, purpose),
//! which makes the output independent of how visits are scheduled.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Binomial, Distribution, Exp, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crawl::{CookieRecord, CrawlDataset, HttpRequestRecord, VisitId, VisitRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryPlan {
    pub code: String,
    pub n_sites: u32,
    pub mean_requests: f64,
    pub sd_requests: f64,
    pub mean_proportion_hits: f64,
    pub sd_proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub countries: Vec<CountryPlan>,
    /// Number of distinct tracker hosts.
    pub tracker_domain_pool: u32,
    /// Number of distinct non-tracking third-party hosts.
    #[serde(default = "default_benign_pool")]
    pub benign_domain_pool: u32,
    /// Mean third-party cookies per third-party request domain.
    pub cookie_intensity: f64,
    /// Target Pearson r between third-party request domains and third-party
    /// cookies within a country.
    #[serde(default = "default_cookie_correlation")]
    pub cookie_correlation: f64,
    /// Pooled tracker share minus pooled ad share, per country. `None` plants
    /// no ad hits at all.
    #[serde(default)]
    pub ad_share_gap: Option<f64>,
    pub seed: u64,
}

fn default_benign_pool() -> u32 {
    200
}

fn default_cookie_correlation() -> f64 {
    0.7
}

impl SynthConfig {
    /// Four countries of 250 sites with the published per-country mean
    /// tracker proportions, SD 0.05, and request counts with mean 111 and SD 116.
    pub fn four_country_preset(seed: u64) -> Self {
        let plan = |code: &str, mean: f64| CountryPlan {
            code: code.into(),
            n_sites: 250,
            mean_requests: 111.0,
            sd_requests: 116.0,
            mean_proportion_hits: mean,
            sd_proportion: 0.05,
        };
        SynthConfig {
            countries: vec![plan("AU", 0.06), plan("DE", 0.05), plan("JP", 0.05), plan("US", 0.08)],
            tracker_domain_pool: 60,
            benign_domain_pool: default_benign_pool(),
            cookie_intensity: 1.0,
            cookie_correlation: default_cookie_correlation(),
            ad_share_gap: None,
            seed,
        }
    }

    // Negated comparisons reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.countries.is_empty() {
            return bad("no countries".into());
        }
        let mut codes = BTreeSet::new();
        for c in &self.countries {
            if c.code.trim().is_empty() || !codes.insert(c.code.as_str()) {
                return bad(format!("country code `{}` empty or repeated", c.code));
            }
            if c.n_sites < 1 {
                return bad(format!("{}: n_sites must be >= 1", c.code));
            }
            if !(c.mean_requests >= 1.0 && c.mean_requests.is_finite()) {
                return bad(format!("{}: mean_requests must be >= 1", c.code));
            }
            if !(c.sd_requests >= 0.0 && c.sd_requests.is_finite()) || !(c.sd_proportion >= 0.0) {
                return bad(format!("{}: standard deviations must be >= 0", c.code));
            }
            if !(0.0..=1.0).contains(&c.mean_proportion_hits) {
                return bad(format!("{}: mean_proportion_hits outside [0, 1]", c.code));
            }
            let m = c.mean_proportion_hits;
            if c.sd_proportion > 0.0 && m > 0.0 && m < 1.0 && c.sd_proportion.powi(2) >= m * (1.0 - m) {
                return bad(format!("{}: sd_proportion too large for mean {m}", c.code));
            }
        }
        if self.tracker_domain_pool < 1 || self.benign_domain_pool < 1 {
            return bad("domain pools must hold at least one host".into());
        }
        if !(self.cookie_intensity >= 0.0 && self.cookie_intensity.is_finite()) {
            return bad("cookie_intensity must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.cookie_correlation) {
            return bad("cookie_correlation outside [0, 1]".into());
        }
        if let Some(gap) = self.ad_share_gap {
            if !(0.0..=1.0).contains(&gap) {
                return bad("ad_share_gap outside [0, 1]".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Planted counts for one visit; the pipeline must measure the same numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedVisit {
    pub visit_id: VisitId,
    pub country: String,
    pub site_rank: u32,
    pub site_domain: String,
    /// Beta draw the tracker count was sampled at.
    pub planted_proportion: f64,
    pub n_requests: u64,
    pub n_tracker_hits: u64,
    pub n_ad_hits: u64,
    pub n_fp_requests: u64,
    pub n_tp_requests: u64,
    pub n_tp_request_domains: u64,
    pub n_fp_cookies: u64,
    pub n_tp_cookies: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthLedger {
    pub config: SynthConfig,
    pub visits: Vec<PlantedVisit>,
}

impl SynthLedger {
    /// Pooled tracker share minus pooled ad share over all visits.
    pub fn realized_ad_gap(&self) -> f64 {
        let (mut t, mut a, mut n) = (0u64, 0u64, 0u64);
        for v in &self.visits {
            t += v.n_tracker_hits;
            a += v.n_ad_hits;
            n += v.n_requests;
        }
        if n == 0 {
            0.0
        } else {
            (t as f64 - a as f64) / n as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub dataset: CrawlDataset,
    pub ledger: SynthLedger,
    pub tracker_list: Vec<String>,
    pub ad_list: Vec<String>,
}

pub const DATASET_FILE: &str = "crawl.jsonl";
pub const LEDGER_FILE: &str = "ledger.json";
pub const TRACKER_LIST_FILE: &str = "trackers.txt";
pub const AD_LIST_FILE: &str = "ads.txt";

impl SynthOutput {
    /// Writes `crawl.jsonl`, `ledger.json`, `trackers.txt` and `ads.txt` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(), SynthError> {
        let dir = dir.as_ref();
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| SynthError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let write = |name: &str, bytes: &[u8]| {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(io(&path))
        };
        write(DATASET_FILE, self.dataset.to_jsonl_string().as_bytes())?;
        let mut ledger = serde_json::to_string_pretty(&self.ledger)?;
        ledger.push('\n');
        write(LEDGER_FILE, ledger.as_bytes())?;
        write(TRACKER_LIST_FILE, list_text(&self.tracker_list).as_bytes())?;
        write(AD_LIST_FILE, list_text(&self.ad_list).as_bytes())
    }
}

fn list_text(rules: &[String]) -> String {
    let mut s = String::from("[Adblock Plus 2.0]\n! generated alongside a synthetic crawl\n");
    for r in rules {
        s.push_str(r);
        s.push('\n');
    }
    s
}

pub fn tracker_host(j: u32) -> String {
    format!("tracker{j}.net")
}

fn benign_host(j: u32) -> String {
    format!("cdnhost{j}.org")
}

pub fn site_domain(country: &str, rank: u32) -> String {
    format!("{}site{rank}.com", country.to_ascii_lowercase())
}

const STREAM_REQUESTS: u64 = 1;
const STREAM_COOKIES: u64 = 2;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn visit_rng(seed: u64, country: &str, rank: u32, stream: u64) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for b in country.bytes() {
        h = splitmix(h ^ u64::from(b));
    }
    h = splitmix(h ^ u64::from(rank));
    h = splitmix(h ^ stream);
    ChaCha8Rng::seed_from_u64(h)
}

struct VisitPlan<'a> {
    country: &'a CountryPlan,
    rank: u32,
    visit_id: VisitId,
}

struct Drawn {
    proportion: f64,
    n: u64,
    trackers: u64,
    fp: u64,
    /// Host of every request in emission order, with a flag for tracker hosts.
    hosts: Vec<(String, bool)>,
    tp_domains: Vec<String>,
}

fn draw_requests(plan: &VisitPlan<'_>, config: &SynthConfig) -> Drawn {
    let c = plan.country;
    let mut rng = visit_rng(config.seed, &c.code, plan.rank, STREAM_REQUESTS);

    let n = if c.sd_requests > 0.0 {
        let sigma2 = (1.0 + (c.sd_requests / c.mean_requests).powi(2)).ln();
        let mu = c.mean_requests.ln() - sigma2 / 2.0;
        let d = LogNormal::new(mu, sigma2.sqrt()).expect("validated parameters");
        d.sample(&mut rng).round().max(1.0) as u64
    } else {
        c.mean_requests.round() as u64
    };

    let m = c.mean_proportion_hits;
    let proportion = if c.sd_proportion > 0.0 && m > 0.0 && m < 1.0 {
        let nu = m * (1.0 - m) / c.sd_proportion.powi(2) - 1.0;
        Beta::new(m * nu, (1.0 - m) * nu).expect("validated parameters").sample(&mut rng)
    } else {
        m
    };
    let trackers = Binomial::new(n, proportion).expect("proportion in [0, 1]").sample(&mut rng);

    let rest = n - trackers;
    let fp_share: f64 = rng.random_range(0.3..0.7);
    let fp = (fp_share * rest as f64).round() as u64;
    let benign = rest - fp;

    let site = site_domain(&c.code, plan.rank);
    let mut hosts = Vec::with_capacity(n as usize);
    hosts.extend((0..fp).map(|_| (format!("www.{site}"), false)));
    for _ in 0..trackers {
        hosts.push((tracker_host(rng.random_range(0..config.tracker_domain_pool)), true));
    }
    for _ in 0..benign {
        hosts.push((benign_host(rng.random_range(0..config.benign_domain_pool)), false));
    }
    hosts.shuffle(&mut rng);

    let tp_domains: Vec<String> = hosts
        .iter()
        .filter(|(h, _)| !h.ends_with(&site))
        .map(|(h, _)| h.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    Drawn { proportion, n, trackers, fp, hosts, tp_domains }
}

/// Splits `total` across slots in proportion to `weights` (largest remainder,
/// ties to the earlier slot). Requires `total <= sum(weights)`.
fn allocate(total: u64, weights: &[u64]) -> Vec<u64> {
    let sum: u64 = weights.iter().sum();
    if sum == 0 || total == 0 {
        return vec![0; weights.len()];
    }
    let mut out: Vec<u64> =
        weights.iter().map(|&w| (u128::from(total) * u128::from(w) / u128::from(sum)) as u64).collect();
    let mut left = total - out.iter().sum::<u64>();
    let mut order: Vec<(u128, usize)> =
        weights.iter().enumerate().map(|(i, &w)| ((u128::from(total) * u128::from(w)) % u128::from(sum), i)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i) in order {
        if left == 0 {
            break;
        }
        if out[i] < weights[i] {
            out[i] += 1;
            left -= 1;
        }
    }
    out
}

pub fn generate(config: &SynthConfig) -> Result<SynthOutput, SynthError> {
    config.validate()?;

    let mut plans = Vec::new();
    let mut next_id: VisitId = 1;
    for c in &config.countries {
        for rank in 1..=c.n_sites {
            plans.push(VisitPlan { country: c, rank, visit_id: next_id });
            next_id += 1;
        }
    }

    let drawn: Vec<Drawn> = plans.par_iter().map(|p| draw_requests(p, config)).collect();

    // Ad hits are a subset of tracker hits; per country, exactly
    // round(gap * requests) tracker hits are left without an ad path.
    let mut ad_hits = vec![0u64; drawn.len()];
    let mut cookie_scale: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let mut start = 0;
    for c in &config.countries {
        let end = start + c.n_sites as usize;
        let slice = &drawn[start..end];
        if let Some(gap) = config.ad_share_gap {
            let requests: u64 = slice.iter().map(|d| d.n).sum();
            let weights: Vec<u64> = slice.iter().map(|d| d.trackers).collect();
            let tracker_total: u64 = weights.iter().sum();
            let removed = ((gap * requests as f64).round() as u64).min(tracker_total);
            for (i, r) in allocate(removed, &weights).into_iter().enumerate() {
                ad_hits[start + i] = weights[i] - r;
            }
        }
        let xs: Vec<f64> = slice.iter().map(|d| d.tp_domains.len() as f64).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        cookie_scale.insert(c.code.as_str(), (mean, var.sqrt()));
        start = end;
    }

    let rows: Vec<(Vec<HttpRequestRecord>, Vec<CookieRecord>, PlantedVisit)> = plans
        .par_iter()
        .zip(drawn.par_iter())
        .zip(ad_hits.par_iter())
        .map(|((plan, d), &ads)| build_visit(plan, d, ads, cookie_scale[plan.country.code.as_str()], config))
        .collect();

    let mut visits = Vec::with_capacity(plans.len());
    let mut requests = Vec::new();
    let mut cookies = Vec::new();
    let mut ledger = Vec::with_capacity(plans.len());
    for (plan, (reqs, cks, planted)) in plans.iter().zip(rows) {
        visits.push(VisitRecord {
            visit_id: plan.visit_id,
            country: plan.country.code.clone(),
            site_rank: plan.rank,
            site_domain: site_domain(&plan.country.code, plan.rank),
            started_at: String::new(),
        });
        requests.extend(reqs);
        cookies.extend(cks);
        ledger.push(planted);
    }

    let dataset = CrawlDataset::new(visits, requests, cookies, format!("synth seed {}", config.seed))
        .expect("generated records are consistent");
    let tracker_list = (0..config.tracker_domain_pool).map(|j| format!("||{}^", tracker_host(j))).collect();
    let ad_list = (0..config.tracker_domain_pool).map(|j| format!("||{}/ad/", tracker_host(j))).collect();
    Ok(SynthOutput { dataset, ledger: SynthLedger { config: config.clone(), visits: ledger }, tracker_list, ad_list })
}

fn build_visit(
    plan: &VisitPlan<'_>,
    d: &Drawn,
    ads: u64,
    (x_mean, x_sd): (f64, f64),
    config: &SynthConfig,
) -> (Vec<HttpRequestRecord>, Vec<CookieRecord>, PlantedVisit) {
    let site = site_domain(&plan.country.code, plan.rank);
    let top_url = format!("http://www.{site}/");
    let mut remaining_ads = ads;
    let requests: Vec<HttpRequestRecord> = d
        .hosts
        .iter()
        .enumerate()
        .map(|(k, (host, is_tracker))| {
            let path = if *is_tracker && remaining_ads > 0 {
                remaining_ads -= 1;
                format!("ad/{k}.js")
            } else if *is_tracker {
                format!("p/{k}.gif")
            } else {
                format!("r/{k}.js")
            };
            HttpRequestRecord {
                visit_id: plan.visit_id,
                url: format!("http://{host}/{path}"),
                top_url: top_url.clone(),
                referrer: None,
                ts: String::new(),
            }
        })
        .collect();

    let mut rng = visit_rng(config.seed, &plan.country.code, plan.rank, STREAM_COOKIES);
    let x = d.tp_domains.len() as f64;
    let rho = config.cookie_correlation;
    let tp_cookies = if config.cookie_intensity == 0.0 || x_mean == 0.0 {
        0
    } else if rho == 0.0 || x_sd == 0.0 {
        let e: f64 = Exp::new(1.0).expect("rate 1").sample(&mut rng);
        (config.cookie_intensity * x_mean * e).round() as u64
    } else {
        // y = c (x + e) with var(e) = var(x)(1 - rho^2)/rho^2 gives corr(x, y) = rho.
        let theta = x_sd * (1.0 - rho * rho).sqrt() / rho;
        let e = if theta > 0.0 { Exp::new(1.0 / theta).expect("positive rate").sample(&mut rng) } else { 0.0 };
        let c = config.cookie_intensity * x_mean / (x_mean + theta);
        (c * (x + e)).round() as u64
    };
    let fp_cookies: u64 = rng.random_range(0..=3);

    let mut cookies = Vec::with_capacity((tp_cookies + fp_cookies) as usize);
    for k in 0..fp_cookies {
        cookies.push(CookieRecord {
            visit_id: plan.visit_id,
            domain: format!(".{site}"),
            name: format!("fp{k}"),
            ts: String::new(),
        });
    }
    for k in 0..tp_cookies {
        let domain = if d.tp_domains.is_empty() {
            tracker_host((k % u64::from(config.tracker_domain_pool)) as u32)
        } else {
            d.tp_domains[(k as usize) % d.tp_domains.len()].clone()
        };
        cookies.push(CookieRecord {
            visit_id: plan.visit_id,
            domain: format!(".{domain}"),
            name: format!("tp{k}"),
            ts: String::new(),
        });
    }

    let planted = PlantedVisit {
        visit_id: plan.visit_id,
        country: plan.country.code.clone(),
        site_rank: plan.rank,
        site_domain: site,
        planted_proportion: d.proportion,
        n_requests: d.n,
        n_tracker_hits: d.trackers,
        n_ad_hits: ads,
        n_fp_requests: d.fp,
        n_tp_requests: d.n - d.fp,
        n_tp_request_domains: d.tp_domains.len() as u64,
        n_fp_cookies: fp_cookies,
        n_tp_cookies: tp_cookies,
    };
    (requests, cookies, planted)
}
