use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CookieRecord, CrawlDataset, CrawlError, HttpRequestRecord, VisitRecord};

/// One line of the JSONL interchange format, discriminated by `kind`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JsonlRecord {
    Visit(VisitRecord),
    Request(HttpRequestRecord),
    Cookie(CookieRecord),
}

pub fn ingest_jsonl(path: impl AsRef<Path>) -> Result<CrawlDataset, CrawlError> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|source| CrawlError::Io { path: path.display().to_string(), source })?;
    parse_jsonl(std::io::BufReader::new(file), path.display().to_string())
}

/// Blank lines are ignored; line numbers in errors are 1-based.
pub fn parse_jsonl<R: BufRead>(reader: R, provenance: impl Into<String>) -> Result<CrawlDataset, CrawlError> {
    let provenance = provenance.into();
    let (mut visits, mut requests, mut cookies) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| CrawlError::Io { path: provenance.clone(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord =
            serde_json::from_str(&line).map_err(|e| CrawlError::Parse { line: line_no, detail: e.to_string() })?;
        match record {
            JsonlRecord::Visit(v) => visits.push(v),
            JsonlRecord::Request(r) => requests.push(r),
            JsonlRecord::Cookie(c) => cookies.push(c),
        }
    }
    CrawlDataset::new(visits, requests, cookies, provenance)
}
