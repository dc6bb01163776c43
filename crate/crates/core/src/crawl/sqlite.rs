use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use rusqlite::{Connection, OpenFlags};
use serde::{Deserialize, Serialize};

use super::{CookieRecord, CrawlDataset, CrawlError, HttpRequestRecord, VisitId, VisitRecord};

const REQUESTS_TABLE: &str = "http_requests";
const COOKIES_TABLE: &str = "cookies";

/// Country/site metadata for the visits in a crawl database.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub visits: Vec<SidecarVisit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarVisit {
    pub visit_id: VisitId,
    pub country: String,
    pub site_domain: String,
    pub site_rank: u32,
    #[serde(default)]
    pub started_at: String,
}

impl Sidecar {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CrawlError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| CrawlError::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text).map_err(|e| CrawlError::Sidecar(format!("{}: {e}", path.display())))
    }
}

/// Reads the `http_requests` and `cookies` tables of a crawl database.
pub fn ingest_openwpm_db(db: impl AsRef<Path>, sidecar: impl AsRef<Path>) -> Result<CrawlDataset, CrawlError> {
    let db = db.as_ref();
    let sidecar = Sidecar::load(sidecar)?;
    if !db.exists() {
        return Err(CrawlError::Io {
            path: db.display().to_string(),
            source: std::io::Error::from(std::io::ErrorKind::NotFound),
        });
    }
    let conn = Connection::open_with_flags(db, OpenFlags::SQLITE_OPEN_READ_ONLY)?;

    let req_cols = columns(&conn, REQUESTS_TABLE)?;
    require(&req_cols, REQUESTS_TABLE, &["visit_id", "url", "top_url"])?;
    let cookie_cols = columns(&conn, COOKIES_TABLE)?;
    require(&cookie_cols, COOKIES_TABLE, &["visit_id", "domain"])?;

    let req_select = format!(
        "SELECT visit_id, url, top_url, {}, {} FROM {REQUESTS_TABLE} ORDER BY rowid",
        optional(&req_cols, &["referrer"]),
        optional(&req_cols, &["time_stamp", "ts"]),
    );
    let mut stmt = conn.prepare(&req_select)?;
    let requests = stmt
        .query_map([], |row| {
            Ok(HttpRequestRecord {
                visit_id: row.get(0)?,
                url: row.get(1)?,
                top_url: row.get(2)?,
                referrer: row.get(3)?,
                ts: row.get::<_, Option<String>>(4)?.unwrap_or_default(),
            })
        })?
        .collect::<Result<Vec<_>, _>>()?;

    let cookie_select = format!(
        "SELECT visit_id, domain, {}, {} FROM {COOKIES_TABLE} ORDER BY rowid",
        optional(&cookie_cols, &["name"]),
        optional(&cookie_cols, &["time_stamp", "ts"]),
    );
    let mut stmt = conn.prepare(&cookie_select)?;
    let cookies = stmt
        .query_map([], |row| {
            Ok(CookieRecord {
                visit_id: row.get(0)?,
                domain: row.get(1)?,
                name: row.get::<_, Option<String>>(2)?.unwrap_or_default(),
                ts: row.get::<_, Option<String>>(3)?.unwrap_or_default(),
            })
        })?
        .collect::<Result<Vec<_>, _>>()?;

    let known: HashMap<VisitId, &SidecarVisit> = sidecar.visits.iter().map(|v| (v.visit_id, v)).collect();
    let missing: BTreeSet<VisitId> = requests
        .iter()
        .map(|r| r.visit_id)
        .chain(cookies.iter().map(|c| c.visit_id))
        .filter(|id| !known.contains_key(id))
        .collect();
    if !missing.is_empty() {
        let list: Vec<String> = missing.iter().map(|id| id.to_string()).collect();
        return Err(CrawlError::Sidecar(format!("no metadata for visit_id {}", list.join(", "))));
    }

    let visits = sidecar
        .visits
        .into_iter()
        .map(|v| VisitRecord {
            visit_id: v.visit_id,
            country: v.country,
            site_rank: v.site_rank,
            site_domain: v.site_domain,
            started_at: v.started_at,
        })
        .collect();
    CrawlDataset::new(visits, requests, cookies, db.display().to_string())
}

/// Writes `dataset` as a crawl database with the two tables plus its sidecar.
pub fn export_openwpm_db(
    dataset: &CrawlDataset,
    db: impl AsRef<Path>,
    sidecar: impl AsRef<Path>,
) -> Result<(), CrawlError> {
    let mut conn = Connection::open(db.as_ref())?;
    let tx = conn.transaction()?;
    tx.execute_batch(
        "CREATE TABLE http_requests (
             id INTEGER PRIMARY KEY,
             visit_id INTEGER NOT NULL,
             url TEXT NOT NULL,
             top_url TEXT NOT NULL,
             referrer TEXT,
             time_stamp TEXT
         );
         CREATE TABLE cookies (
             id INTEGER PRIMARY KEY,
             visit_id INTEGER NOT NULL,
             domain TEXT NOT NULL,
             name TEXT,
             time_stamp TEXT
         );",
    )?;
    {
        let mut insert = tx.prepare(
            "INSERT INTO http_requests (visit_id, url, top_url, referrer, time_stamp) VALUES (?1, ?2, ?3, ?4, ?5)",
        )?;
        for r in dataset.requests() {
            insert.execute(rusqlite::params![r.visit_id, r.url, r.top_url, r.referrer, r.ts])?;
        }
        let mut insert =
            tx.prepare("INSERT INTO cookies (visit_id, domain, name, time_stamp) VALUES (?1, ?2, ?3, ?4)")?;
        for c in dataset.cookies() {
            insert.execute(rusqlite::params![c.visit_id, c.domain, c.name, c.ts])?;
        }
    }
    tx.commit()?;

    let meta = Sidecar {
        visits: dataset
            .visits()
            .iter()
            .map(|v| SidecarVisit {
                visit_id: v.visit_id,
                country: v.country.clone(),
                site_domain: v.site_domain.clone(),
                site_rank: v.site_rank,
                started_at: v.started_at.clone(),
            })
            .collect(),
    };
    let path = sidecar.as_ref();
    let text = serde_json::to_string_pretty(&meta).map_err(|e| CrawlError::Sidecar(e.to_string()))?;
    std::fs::write(path, text).map_err(|source| CrawlError::Io { path: path.display().to_string(), source })
}

fn columns(conn: &Connection, table: &str) -> Result<Vec<String>, CrawlError> {
    let exists: bool = conn.query_row(
        "SELECT EXISTS(SELECT 1 FROM sqlite_master WHERE type = 'table' AND name = ?1)",
        [table],
        |row| row.get(0),
    )?;
    if !exists {
        return Err(CrawlError::Schema(format!("missing table `{table}`")));
    }
    let mut stmt = conn.prepare(&format!("PRAGMA table_info({table})"))?;
    let cols = stmt.query_map([], |row| row.get::<_, String>(1))?.collect::<Result<Vec<_>, _>>()?;
    Ok(cols)
}

fn require(cols: &[String], table: &str, needed: &[&str]) -> Result<(), CrawlError> {
    let absent: Vec<&str> = needed.iter().copied().filter(|n| !cols.iter().any(|c| c == n)).collect();
    if absent.is_empty() {
        Ok(())
    } else {
        Err(CrawlError::Schema(format!("table `{table}` lacks column(s) {}", absent.join(", "))))
    }
}

/// First present column among `candidates`, or SQL `NULL`.
fn optional(cols: &[String], candidates: &[&str]) -> String {
    candidates
        .iter()
        .find(|c| cols.iter().any(|col| col == *c))
        .map_or_else(|| "NULL".to_string(), |c| (*c).to_string())
}
