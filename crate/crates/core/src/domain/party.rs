use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::psl::{is_ip_literal, normalize_hostname, registrable_domain, PublicSuffixTable};
use super::DomainError;
use crate::filter::CanonicalUrl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    FirstParty,
    ThirdParty,
}

/// How a record host is compared with the visited site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassificationMode {
    /// Record host equals the site's base domain or ends with `.` + base domain.
    PaperContainment,
    /// Record and site share the same eTLD+1.
    RegistrableDomain,
}

impl FromStr for ClassificationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" | "paper_containment" => Ok(ClassificationMode::PaperContainment),
            "psl" | "registrable" | "registrable_domain" => Ok(ClassificationMode::RegistrableDomain),
            other => Err(format!("unknown classification mode `{other}` (expected paper|psl)")),
        }
    }
}

impl fmt::Display for ClassificationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassificationMode::PaperContainment => "paper_containment",
            ClassificationMode::RegistrableDomain => "registrable_domain",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartyLabel {
    pub value: Party,
    pub mode: ClassificationMode,
}

impl PartyLabel {
    pub fn is_third_party(&self) -> bool {
        self.value == Party::ThirdParty
    }
}

/// Host part of a cookie domain, bare hostname, site-list entry or full URL.
pub fn record_host(input: &str) -> Result<String, DomainError> {
    let trimmed = input.trim();
    if trimmed.contains("://") {
        let url = CanonicalUrl::parse(trimmed).map_err(|_| DomainError::MalformedHostname(input.to_string()))?;
        return normalize_hostname(url.host());
    }
    let host = trimmed.strip_prefix('.').unwrap_or(trimmed);
    let host = host.split('/').next().unwrap_or(host);
    normalize_hostname(host)
}

/// A visited site prepared for classifying many records against it.
#[derive(Debug, Clone)]
pub struct SiteContext<'t> {
    host: String,
    containment_base: String,
    registrable: String,
    mode: ClassificationMode,
    table: &'t PublicSuffixTable,
}

impl<'t> SiteContext<'t> {
    pub fn new(site_domain: &str, mode: ClassificationMode, table: &'t PublicSuffixTable) -> Result<Self, DomainError> {
        let host = record_host(site_domain)?;
        let containment_base = host.strip_prefix("www.").filter(|b| b.contains('.')).unwrap_or(&host).to_string();
        let registrable = registrable_domain(&host, table)?.name;
        Ok(SiteContext { host, containment_base, registrable, mode, table })
    }

    pub fn host(&self) -> &str {
        &self.host
    }

    pub fn registrable(&self) -> &str {
        &self.registrable
    }

    pub fn mode(&self) -> ClassificationMode {
        self.mode
    }

    pub fn classify(&self, record: &str) -> Result<PartyLabel, DomainError> {
        self.classify_host(&record_host(record)?)
    }

    /// `host` must already be normalized (see [`record_host`]).
    pub fn classify_host(&self, host: &str) -> Result<PartyLabel, DomainError> {
        let first = if is_ip_literal(host) || is_ip_literal(&self.host) {
            host == self.host
        } else {
            match self.mode {
                ClassificationMode::PaperContainment => label_suffix(host, &self.containment_base),
                ClassificationMode::RegistrableDomain => registrable_domain(host, self.table)?.name == self.registrable,
            }
        };
        let value = if first { Party::FirstParty } else { Party::ThirdParty };
        Ok(PartyLabel { value, mode: self.mode })
    }
}

pub fn classify_party(
    site_domain: &str,
    record_host_or_url: &str,
    mode: ClassificationMode,
    table: &PublicSuffixTable,
) -> Result<PartyLabel, DomainError> {
    SiteContext::new(site_domain, mode, table)?.classify(record_host_or_url)
}

fn label_suffix(host: &str, base: &str) -> bool {
    host == base
        || (host.len() > base.len() && host.ends_with(base) && host.as_bytes()[host.len() - base.len() - 1] == b'.')
}
