//! Regex translation of filter rules and the curated conformance cases.

use regex::{Regex, RegexBuilder};
use trackscope::filter::{FilterSet, MatchOutcome, MatchQuery, ResourceType};

/// One rule as understood by the oracle.
pub struct OracleRule {
    line: usize,
    exception: bool,
    re: Regex,
    third_party: Option<bool>,
    domains: Vec<(String, bool)>,
    types: Vec<String>,
}

pub fn oracle_rule(raw: &str, line: usize) -> Option<OracleRule> {
    let raw = raw.trim();
    if raw.is_empty() || raw.starts_with('!') || raw.starts_with('[') || raw.contains("##") {
        return None;
    }
    let (exception, body) = match raw.strip_prefix("@@") {
        Some(rest) => (true, rest),
        None => (false, raw),
    };
    let (pattern, opts) = match body.find('$') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if pattern.len() > 1 && pattern.starts_with('/') && pattern.ends_with('/') {
        return None;
    }
    let (mut third_party, mut domains, mut types, mut match_case) = (None, Vec::new(), Vec::new(), false);
    for opt in opts.split(',').filter(|o| !o.is_empty()) {
        match opt {
            "third-party" => third_party = Some(true),
            "~third-party" => third_party = Some(false),
            "match-case" => match_case = true,
            o if o.starts_with("domain=") => {
                for d in o["domain=".len()..].split('|') {
                    match d.strip_prefix('~') {
                        Some(n) => domains.push((n.to_ascii_lowercase(), true)),
                        None => domains.push((d.to_ascii_lowercase(), false)),
                    }
                }
            }
            "script" | "image" | "stylesheet" | "xmlhttprequest" | "subdocument" | "other" => {
                types.push(opt.to_string())
            }
            _ => return None,
        }
    }

    let mut re = String::new();
    let mut rest = pattern;
    if let Some(r) = rest.strip_prefix("||") {
        re.push_str(r"^[a-z][a-z0-9+.\-]*://(?:[^/?#]*\.)?");
        rest = r;
    } else if let Some(r) = rest.strip_prefix('|') {
        re.push('^');
        rest = r;
    }
    let end = rest.ends_with('|');
    if end {
        rest = &rest[..rest.len() - 1];
    }
    for ch in rest.chars() {
        match ch {
            '*' => re.push_str(".*"),
            '^' => re.push_str(r"(?:[^a-zA-Z0-9_\-.%]|$)"),
            c => re.push_str(&regex::escape(&c.to_string())),
        }
    }
    if end {
        re.push('$');
    }
    let re = RegexBuilder::new(&re).case_insensitive(!match_case).build().unwrap();
    Some(OracleRule { line, exception, re, third_party, domains, types })
}

pub fn covers(host: &str, domain: &str) -> bool {
    host == domain || host.ends_with(&format!(".{domain}"))
}

pub fn applies(rule: &OracleRule, url: &str, source: &str, third: bool, kind: Option<&str>) -> bool {
    if !rule.re.is_match(url) {
        return false;
    }
    if rule.third_party.is_some_and(|want| want != third) {
        return false;
    }
    if let Some(k) = kind {
        if !rule.types.is_empty() && !rule.types.iter().any(|t| t == k) {
            return false;
        }
    }
    if !rule.domains.is_empty() {
        let best = rule.domains.iter().filter(|(d, _)| covers(source, d)).max_by_key(|(d, _)| d.len());
        return match best {
            Some((_, negated)) => !negated,
            None => rule.domains.iter().all(|(_, negated)| *negated),
        };
    }
    true
}

/// Outcome and, for hits, the lowest matching line.
pub fn oracle(
    lines: &[&str],
    url: &str,
    source: &str,
    third: bool,
    kind: Option<&str>,
) -> (MatchOutcome, Option<usize>) {
    let rules: Vec<OracleRule> = lines.iter().enumerate().filter_map(|(i, l)| oracle_rule(l, i + 1)).collect();
    let hit = rules.iter().filter(|r| !r.exception && applies(r, url, source, third, kind)).map(|r| r.line).min();
    match hit {
        None => (MatchOutcome::NoMatch, None),
        Some(line) if rules.iter().any(|r| r.exception && applies(r, url, source, third, kind)) => {
            (MatchOutcome::ExceptionSuppressed, Some(line))
        }
        Some(line) => (MatchOutcome::Hit, Some(line)),
    }
}

pub fn engine(
    set: &FilterSet,
    url: &str,
    source: &str,
    third: bool,
    kind: Option<&str>,
) -> (MatchOutcome, Option<usize>) {
    let kind = kind.map(|k| k.parse::<ResourceType>().unwrap());
    let q = MatchQuery::new(url, source, third).unwrap().with_resource_type(kind);
    let r = set.match_url(&q);
    (r.outcome, r.matched_rule.map(|id| id.line_number))
}

pub struct Case {
    pub rules: &'static [&'static str],
    pub url: &'static str,
    pub source: &'static str,
    pub third: bool,
    pub kind: Option<&'static str>,
    pub expect: MatchOutcome,
}

pub const fn case(rules: &'static [&'static str], url: &'static str, expect: MatchOutcome) -> Case {
    Case { rules, url, source: "site.example", third: true, kind: None, expect }
}

pub const fn ctx(
    rules: &'static [&'static str],
    url: &'static str,
    source: &'static str,
    third: bool,
    kind: Option<&'static str>,
    expect: MatchOutcome,
) -> Case {
    Case { rules, url, source, third, kind, expect }
}

use MatchOutcome::{ExceptionSuppressed as Exc, Hit, NoMatch as No};

pub const CASES: &[Case] = &[
    // plain substrings
    case(&["/banner/*"], "http://a.com/banner/1.gif", Hit),
    case(&["/banner/*"], "http://a.com/banners/1.gif", No),
    case(&["/banner/"], "http://a.com/banner/1.gif", No),
    case(&["ads"], "http://a.com/x?ads=1", Hit),
    case(&["ADS"], "http://a.com/ads.js", Hit),
    case(&["-ad-"], "http://a.com/top-ad-unit.png", Hit),
    case(&["-ad-"], "http://a.com/top_ad_unit.png", No),
    // start and end anchors
    case(&["|http://ads."], "http://ads.a.com/", Hit),
    case(&["|http://ads."], "https://ads.a.com/", No),
    case(&["|https://"], "https://x.com/", Hit),
    case(&[".swf|"], "http://a.com/movie.swf", Hit),
    case(&[".swf|"], "http://a.com/movie.swf?x=1", No),
    case(&["|http://a.com/|"], "http://a.com/", Hit),
    case(&["|http://a.com/|"], "http://a.com/x", No),
    // domain anchor
    case(&["||ads.example.com^"], "http://ads.example.com/x", Hit),
    case(&["||ads.example.com^"], "https://ads.example.com", Hit),
    case(&["||ads.example.com^"], "http://sub.ads.example.com/", Hit),
    case(&["||ads.example.com^"], "http://badads.example.com/", No),
    case(&["||ads.example.com^"], "http://ads.example.com.evil.net/", No),
    case(&["||example.com/ads"], "http://www.example.com/ads/x", Hit),
    case(&["||example.com/ads"], "http://example.org/example.com/ads", No),
    case(&["||zanox.com^"], "http://zanox.com/ppv/?28135", Hit),
    case(&["||zanox.com^"], "http://notzanox.com/", No),
    case(&["||co.uk^"], "http://bbc.co.uk/", Hit),
    // separators
    case(&["example.com^"], "http://example.com:8000/", Hit),
    case(&["example.com^"], "http://example.com.ar/", No),
    case(&["^foo.bar^"], "http://a.com/foo.bar?x", Hit),
    case(&["^foo.bar^"], "http://a.com/foo.bar", Hit),
    case(&["^foo.bar^"], "http://a.com/xfoo.bar/", No),
    case(&["/ad^"], "http://a.com/ad?x=1", Hit),
    case(&["/ad^"], "http://a.com/ad-x", No),
    case(&["/ad^"], "http://a.com/ad%20x", No),
    case(&["a.com^x"], "http://a.com/x", Hit),
    // wildcards
    case(&["/ads/*.gif"], "http://a.com/ads/sub/1.gif", Hit),
    case(&["/ads/*.gif"], "http://a.com/ads/1.png", No),
    case(&["||a.com/*/pixel"], "http://a.com/v1/pixel", Hit),
    case(&["||a.com/*/pixel"], "http://a.com/pixel", No),
    case(&["*ads*track*"], "http://a.com/ads/x/track", Hit),
    case(&["*ads*track*"], "http://a.com/track/ads", No),
    case(&["a*b*c*d"], "http://x.com/aXbYcZd", Hit),
    case(&["a*b*c*d"], "http://x.com/aXcYbZ", No),
    // exceptions
    case(&["||ads.com^", "@@||ads.com/ok.js"], "http://ads.com/ok.js", Exc),
    case(&["||ads.com^", "@@||ads.com/ok.js"], "http://ads.com/bad.js", Hit),
    case(&["@@||ads.com^"], "http://ads.com/x", No),
    case(&["/track", "@@/track?safe"], "http://a.com/track?safe=1", Exc),
    case(&["||a.com^", "@@||a.com^$third-party"], "http://a.com/x", Exc),
    // match-case
    case(&["/BannerAd$match-case"], "http://a.com/BannerAd.gif", Hit),
    case(&["/BannerAd$match-case"], "http://a.com/bannerad.gif", No),
    case(&["/BannerAd"], "http://a.com/bannerad.gif", Hit),
    // party options
    ctx(&["||cdn.net^$third-party"], "http://cdn.net/x", "site.com", true, None, Hit),
    ctx(&["||cdn.net^$third-party"], "http://cdn.net/x", "site.com", false, None, No),
    ctx(&["||cdn.net^$~third-party"], "http://cdn.net/x", "cdn.net", false, None, Hit),
    ctx(&["||cdn.net^$~third-party"], "http://cdn.net/x", "site.com", true, None, No),
    // domain= option
    ctx(&["/ads/*$domain=a.com"], "http://x.net/ads/1", "a.com", true, None, Hit),
    ctx(&["/ads/*$domain=a.com"], "http://x.net/ads/1", "www.a.com", true, None, Hit),
    ctx(&["/ads/*$domain=a.com"], "http://x.net/ads/1", "b.com", true, None, No),
    ctx(&["/ads/*$domain=a.com"], "http://x.net/ads/1", "aa.com", true, None, No),
    ctx(&["/ads/*$domain=~a.com"], "http://x.net/ads/1", "a.com", true, None, No),
    ctx(&["/ads/*$domain=~a.com"], "http://x.net/ads/1", "b.com", true, None, Hit),
    ctx(&["/ads/*$domain=a.com|~sub.a.com"], "http://x.net/ads/1", "sub.a.com", true, None, No),
    ctx(&["/ads/*$domain=a.com|~sub.a.com"], "http://x.net/ads/1", "www.a.com", true, None, Hit),
    ctx(&["/ads/*$domain=~a.com|b.a.com"], "http://x.net/ads/1", "c.b.a.com", true, None, Hit),
    ctx(&["/ads/*$domain=a.com|b.com"], "http://x.net/ads/1", "b.com", true, None, Hit),
    ctx(&["/ads/*$domain=A.COM"], "http://x.net/ads/1", "a.com", true, None, Hit),
    ctx(&["/banner/*$domain=~example.org"], "http://ad.doubleclick.net/banner/1.jpg", "spiegel.de", true, None, Hit),
    // resource types
    ctx(&["/x.js$script"], "http://a.com/x.js", "s.com", true, Some("script"), Hit),
    ctx(&["/x.js$script"], "http://a.com/x.js", "s.com", true, Some("image"), No),
    ctx(&["/x.js$script"], "http://a.com/x.js", "s.com", true, None, Hit),
    ctx(&["/p$image,script"], "http://a.com/p.gif", "s.com", true, Some("image"), Hit),
    ctx(&["/p$xmlhttprequest"], "http://a.com/p", "s.com", true, Some("subdocument"), No),
    ctx(&["/p$stylesheet,third-party"], "http://a.com/p.css", "s.com", false, Some("stylesheet"), No),
    ctx(&["/p$other"], "http://a.com/p", "s.com", true, Some("other"), Hit),
    // several rules: lowest line wins
    case(&["/ads/*", "||a.com^"], "http://a.com/ads/", Hit),
    case(&["||a.com^", "/ads/*"], "http://a.com/ads/", Hit),
    case(&["! comment", "##.ad", "/never/", "||a.com^"], "http://a.com/", Hit),
    // unsupported options and regex literals never match
    case(&["||a.com^$popup"], "http://a.com/", No),
    case(&["/ads[0-9]/"], "http://a.com/ads1/", No),
    // query strings and ports
    case(&["?ad_id="], "http://a.com/p?ad_id=3", Hit),
    case(&["||a.com:8080^"], "http://a.com:8080/", Hit),
];
