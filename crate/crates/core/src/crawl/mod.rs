//! Crawl-log data model: visits, HTTP request records and cookie records,
//! each request/cookie tied to the visit it was observed on.
//!
//! Datasets are read from JSONL (the canonical interchange form) or from an
//! OpenWPM-style SQLite database plus a sidecar that maps visits to
//! country and site metadata.

mod jsonl;
mod sqlite;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use jsonl::{ingest_jsonl, parse_jsonl, JsonlRecord};
pub use sqlite::{export_openwpm_db, ingest_openwpm_db, Sidecar, SidecarVisit};
pub use validate::{validate, Warning};

pub type VisitId = i64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VisitRecord {
    pub visit_id: VisitId,
    pub country: String,
    /// Position of the site in the country's top-sites list, starting at 1.
    pub site_rank: u32,
    pub site_domain: String,
    #[serde(default)]
    pub started_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HttpRequestRecord {
    pub visit_id: VisitId,
    pub url: String,
    pub top_url: String,
    #[serde(default)]
    pub referrer: Option<String>,
    #[serde(default)]
    pub ts: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CookieRecord {
    pub visit_id: VisitId,
    /// As set by the server; may start with `.`.
    pub domain: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub ts: String,
}

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("integrity: {0}")]
    Integrity(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error("sidecar: {0}")]
    Sidecar(String),
    #[error("sqlite: {0}")]
    Sqlite(#[from] rusqlite::Error),
}

/// A validated crawl: every request and cookie refers to a known visit,
/// visit ids are unique, and at least one visit exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrawlDataset {
    visits: Vec<VisitRecord>,
    requests: Vec<HttpRequestRecord>,
    cookies: Vec<CookieRecord>,
    provenance: String,
}

impl CrawlDataset {
    pub fn new(
        visits: Vec<VisitRecord>,
        requests: Vec<HttpRequestRecord>,
        cookies: Vec<CookieRecord>,
        provenance: impl Into<String>,
    ) -> Result<Self, CrawlError> {
        if visits.is_empty() {
            return Err(CrawlError::Integrity("no visits".into()));
        }
        let mut ids = HashSet::with_capacity(visits.len());
        for v in &visits {
            if !ids.insert(v.visit_id) {
                return Err(CrawlError::Integrity(format!("duplicate visit_id {}", v.visit_id)));
            }
            if v.site_rank == 0 {
                return Err(CrawlError::Integrity(format!("visit {}: site_rank must be >= 1", v.visit_id)));
            }
            if v.site_domain.trim().is_empty() {
                return Err(CrawlError::Integrity(format!("visit {}: empty site_domain", v.visit_id)));
            }
            if v.country.trim().is_empty() {
                return Err(CrawlError::Integrity(format!("visit {}: empty country", v.visit_id)));
            }
        }
        if let Some(c) = cookies.iter().find(|c| c.domain.trim().is_empty()) {
            return Err(CrawlError::Integrity(format!("visit {}: cookie with empty domain", c.visit_id)));
        }
        let dangling: BTreeSet<VisitId> = requests
            .iter()
            .map(|r| r.visit_id)
            .chain(cookies.iter().map(|c| c.visit_id))
            .filter(|id| !ids.contains(id))
            .collect();
        if !dangling.is_empty() {
            let list: Vec<String> = dangling.iter().map(|id| id.to_string()).collect();
            return Err(CrawlError::Integrity(format!("dangling visit_id references: {}", list.join(", "))));
        }
        Ok(CrawlDataset { visits, requests, cookies, provenance: provenance.into() })
    }

    pub fn visits(&self) -> &[VisitRecord] {
        &self.visits
    }

    pub fn requests(&self) -> &[HttpRequestRecord] {
        &self.requests
    }

    pub fn cookies(&self) -> &[CookieRecord] {
        &self.cookies
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// (visits, requests, cookies)
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.visits.len(), self.requests.len(), self.cookies.len())
    }

    pub fn countries(&self) -> BTreeSet<&str> {
        self.visits.iter().map(|v| v.country.as_str()).collect()
    }

    /// Visits per country.
    pub fn visits_by_country(&self) -> BTreeMap<&str, usize> {
        let mut out = BTreeMap::new();
        for v in &self.visits {
            *out.entry(v.country.as_str()).or_default() += 1;
        }
        out
    }

    /// Equality of record multisets, ignoring record order and provenance.
    pub fn same_records(&self, other: &CrawlDataset) -> bool {
        fn sorted<T: Ord + Clone>(v: &[T]) -> Vec<T> {
            let mut v = v.to_vec();
            v.sort();
            v
        }
        sorted(&self.visits) == sorted(&other.visits)
            && sorted(&self.requests) == sorted(&other.requests)
            && sorted(&self.cookies) == sorted(&other.cookies)
    }

    /// JSONL export: visits, then requests, then cookies, in stored order.
    pub fn write_jsonl<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let records = self
            .visits
            .iter()
            .cloned()
            .map(JsonlRecord::Visit)
            .chain(self.requests.iter().cloned().map(JsonlRecord::Request))
            .chain(self.cookies.iter().cloned().map(JsonlRecord::Cookie));
        for record in records {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}
