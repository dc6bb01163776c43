use std::collections::HashSet;
use std::net::{Ipv4Addr, Ipv6Addr};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DomainError;

const PINNED_LIST: &str = include_str!("../../data/public_suffix_list.dat");

/// Snapshot date of the list compiled into the crate.
pub const PINNED_LIST_DATE: &str = "2019-12-21";

/// Rules of a public-suffix list file (normal, `*.` wildcard, `!` exception).
#[derive(Debug, Clone, Default)]
pub struct PublicSuffixTable {
    normal: HashSet<String>,
    wildcard: HashSet<String>,
    exception: HashSet<String>,
}

impl PublicSuffixTable {
    /// Parses the standard format: one rule per line, `//` comments, only the
    /// first whitespace-separated token of a line counts.
    pub fn parse(text: &str) -> Self {
        let mut table = PublicSuffixTable::default();
        for line in text.lines() {
            let Some(rule) = line.split_whitespace().next() else { continue };
            if rule.starts_with("//") {
                continue;
            }
            let rule = rule.to_lowercase();
            if let Some(rest) = rule.strip_prefix('!') {
                table.exception.insert(rest.to_string());
            } else if let Some(rest) = rule.strip_prefix("*.") {
                table.wildcard.insert(rest.to_string());
            } else {
                table.normal.insert(rule);
            }
        }
        table
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    /// The list snapshot bundled with the crate (see [`PINNED_LIST_DATE`]).
    pub fn pinned() -> Self {
        Self::parse(PINNED_LIST)
    }

    pub fn pinned_text() -> &'static str {
        PINNED_LIST
    }

    pub fn len(&self) -> usize {
        self.normal.len() + self.wildcard.len() + self.exception.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of trailing labels of `host` forming its public suffix.
    /// `offsets[i]` is the byte offset where label `i` starts.
    fn suffix_labels(&self, host: &str, offsets: &[usize]) -> usize {
        let n = offsets.len();
        for (i, &off) in offsets.iter().enumerate() {
            if self.exception.contains(&host[off..]) {
                return n - i - 1;
            }
        }
        for (i, &off) in offsets.iter().enumerate() {
            if self.normal.contains(&host[off..]) {
                return n - i;
            }
            if i + 1 < n && self.wildcard.contains(&host[offsets[i + 1]..]) {
                return n - i;
            }
        }
        1
    }
}

/// eTLD+1 of a hostname. `registrable` is false for IP literals and for
/// hosts that are themselves public suffixes; `name` is then the host itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegistrableDomain {
    pub name: String,
    pub registrable: bool,
}

pub fn registrable_domain(hostname: &str, table: &PublicSuffixTable) -> Result<RegistrableDomain, DomainError> {
    let host = normalize_hostname(hostname)?;
    if is_ip_literal(&host) {
        return Ok(RegistrableDomain { name: host, registrable: false });
    }
    let mut offsets = vec![0];
    offsets.extend(host.match_indices('.').map(|(i, _)| i + 1));
    let suffix = table.suffix_labels(&host, &offsets);
    if offsets.len() <= suffix {
        return Ok(RegistrableDomain { name: host, registrable: false });
    }
    let start = offsets[offsets.len() - suffix - 1];
    Ok(RegistrableDomain { name: host[start..].to_string(), registrable: true })
}

/// Lowercases, drops one trailing `.` and validates label syntax.
pub(crate) fn normalize_hostname(hostname: &str) -> Result<String, DomainError> {
    let malformed = || DomainError::MalformedHostname(hostname.to_string());
    let host = hostname.trim().to_lowercase();
    let host = host.strip_suffix('.').unwrap_or(&host).to_string();
    if host.is_empty() || host.len() > 253 {
        return Err(malformed());
    }
    if is_ip_literal(&host) {
        return Ok(host);
    }
    for label in host.split('.') {
        let ok = !label.is_empty()
            && label.len() <= 63
            && label.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_');
        if !ok {
            return Err(malformed());
        }
    }
    Ok(host)
}

pub(crate) fn is_ip_literal(host: &str) -> bool {
    if let Some(inner) = host.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
        return inner.parse::<Ipv6Addr>().is_ok();
    }
    host.parse::<Ipv4Addr>().is_ok() || host.parse::<Ipv6Addr>().is_ok()
}
