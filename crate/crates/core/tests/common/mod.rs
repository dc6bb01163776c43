//! Oracles and fixtures shared between integration test targets.
#![allow(dead_code)]

pub mod filter_oracle;
pub mod stats_oracle;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Deterministic request URLs with source site and third-party flag.
pub fn synthetic_urls(n: usize) -> Vec<(String, String, bool)> {
    let hosts = [
        "ad.doubleclick.net",
        "www.google-analytics.com",
        "zanox.com",
        "cdn.example.com",
        "static.news.co.uk",
        "pagead2.googlesyndication.com",
        "b.scorecardresearch.com",
        "img.site.jp",
        "api.shop.de",
        "media.news.com.au",
    ];
    let words =
        ["ads", "banner", "track", "pixel", "js", "img", "static", "adframe", "analytics", "beacon", "v1", "page"];
    let exts = ["js", "gif", "png", "html", "css", "php"];
    let sources = ["news.com", "shop.de", "site.jp", "paper.com.au"];
    let mut rng = ChaCha8Rng::seed_from_u64(2019);
    (0..n)
        .map(|_| {
            let host = hosts[rng.random_range(0..hosts.len())];
            let depth = rng.random_range(1..4);
            let path: Vec<&str> = (0..depth).map(|_| words[rng.random_range(0..words.len())]).collect();
            let ext = exts[rng.random_range(0..exts.len())];
            let url = format!("http://{host}/{}.{ext}?id={}", path.join("/"), rng.random_range(0..1000));
            let source = sources[rng.random_range(0..sources.len())].to_string();
            (url, source, rng.random_bool(0.7))
        })
        .collect()
}
