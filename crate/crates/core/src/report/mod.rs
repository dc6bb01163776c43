//! Analysis orchestration and report rendering.
//!
//! [`cmd_analyze`] writes a run manifest, computes per-visit metrics, runs the
//! rank, pairwise, correlation and tracker-vs-ad comparisons, and emits the
//! same numbers as `report.txt`, `report.json` and `tables/*.csv`. Nothing
//! time-dependent goes into the report files, so reruns are byte-identical.

mod analysis;
mod commands;
mod manifest;
mod render;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::ClassificationMode;
use crate::metrics::DomainGranularity;

pub use analysis::{
    analyze, Analysis, CorrelationRow, CountryCi, DatasetSummary, ListSummary, OutlierTable, RankTest, TrackerVsAd,
    RANK_METRICS,
};
pub use commands::{
    cmd_analyze, cmd_ingest, cmd_match, cmd_synth, load_psl, AnalyzeArgs, AnalyzeOutcome, DatasetSource, IngestArgs,
    IngestSummary, MatchLine,
};
pub use manifest::{sha256_bytes, sha256_file, InputDigest, RunManifest, EMBEDDED_PSL};
pub use render::{fmt_p, render_text, write_tables};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairwiseChoice {
    Rank,
    Proportion,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationChoice {
    Pearson,
    Spearman,
    Both,
}

macro_rules! choice_str {
    ($ty:ident, $($variant:ident => $name:literal),+) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(format!("unknown value `{other}` (expected {})", [$($name),+].join("|"))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $name,)+ })
            }
        }
    };
}

choice_str!(PairwiseChoice, Rank => "rank", Proportion => "proportion", Both => "both");
choice_str!(CorrelationChoice, Pearson => "pearson", Spearman => "spearman", Both => "both");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    pub mode: ClassificationMode,
    pub granularity: DomainGranularity,
    pub pairwise: PairwiseChoice,
    pub correlation: CorrelationChoice,
    pub top_k: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            mode: ClassificationMode::RegistrableDomain,
            granularity: DomainGranularity::Registrable,
            pairwise: PairwiseChoice::Both,
            correlation: CorrelationChoice::Pearson,
            top_k: 10,
        }
    }
}

/// Exit status of a successful run whose report carries degenerate results.
pub const EXIT_DEGENERATE: i32 = 2;
/// Exit status for unusable input.
pub const EXIT_INPUT: i32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0}")]
    Input(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest: {0}")]
    Manifest(String),
}

impl ReportError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ReportError::Io { path: path.display().to_string(), source }
    }
}
