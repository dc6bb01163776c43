use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::analysis::{analyze, Analysis};
use super::manifest::{InputDigest, RunManifest};
use super::render::{render_text, write_tables};
use super::{AnalyzeOptions, ReportError, EXIT_DEGENERATE};
use crate::crawl::{export_openwpm_db, ingest_jsonl, ingest_openwpm_db, validate, CrawlDataset, Warning};
use crate::domain::{classify_party, ClassificationMode, PublicSuffixTable};
use crate::filter::{FilterSet, ListKind, MatchOutcome, MatchQuery, RuleId};
use crate::synth::{generate, SynthConfig, SynthOutput};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    Jsonl(PathBuf),
    OpenWpm { db: PathBuf, sidecar: PathBuf },
}

impl DatasetSource {
    pub fn load(&self) -> Result<CrawlDataset, ReportError> {
        let loaded = match self {
            DatasetSource::Jsonl(path) => ingest_jsonl(path),
            DatasetSource::OpenWpm { db, sidecar } => ingest_openwpm_db(db, sidecar),
        };
        loaded.map_err(|e| ReportError::Input(format!("dataset: {e}")))
    }

    fn digests(&self) -> Result<Vec<InputDigest>, ReportError> {
        match self {
            DatasetSource::Jsonl(path) => Ok(vec![InputDigest::of_file("dataset", path)?]),
            DatasetSource::OpenWpm { db, sidecar } => {
                Ok(vec![InputDigest::of_file("dataset", db)?, InputDigest::of_file("sidecar", sidecar)?])
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    pub dataset: DatasetSource,
    pub ads: PathBuf,
    pub trackers: PathBuf,
    /// `None` uses the embedded list.
    pub psl: Option<PathBuf>,
    pub options: AnalyzeOptions,
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub analysis: Analysis,
    pub manifest: RunManifest,
    /// 0, or [`EXIT_DEGENERATE`] when the report carries degenerate results.
    pub exit_code: i32,
}

pub fn load_psl(psl: Option<&Path>) -> Result<PublicSuffixTable, ReportError> {
    match psl {
        None => Ok(PublicSuffixTable::pinned()),
        Some(p) => PublicSuffixTable::load(p).map_err(|e| ReportError::Input(format!("psl {}: {e}", p.display()))),
    }
}

fn load_list(path: &Path, kind: ListKind) -> Result<(FilterSet, crate::filter::ParseReport), ReportError> {
    FilterSet::from_file(path, kind).map_err(|e| ReportError::Input(format!("filter list {}: {e}", path.display())))
}

/// Writes `manifest.json` first, then `report.txt`, `report.json` and `tables/*.csv` under `args.out`.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<AnalyzeOutcome, ReportError> {
    let mut inputs = args.dataset.digests()?;
    inputs.push(InputDigest::of_file("ads", &args.ads)?);
    inputs.push(InputDigest::of_file("trackers", &args.trackers)?);
    inputs.push(match &args.psl {
        Some(p) => InputDigest::of_file("psl", p)?,
        None => InputDigest::embedded_psl(),
    });

    std::fs::create_dir_all(&args.out).map_err(|e| ReportError::io(&args.out, e))?;
    let manifest = RunManifest::new(inputs, args.options, &args.out);
    manifest.write(&args.out.join("manifest.json"))?;

    let table = load_psl(args.psl.as_deref())?;
    let dataset = args.dataset.load()?;
    let ads = load_list(&args.ads, ListKind::Ads)?;
    let trackers = load_list(&args.trackers, ListKind::Trackers)?;

    let analysis = analyze(&dataset, (&ads.0, &ads.1), (&trackers.0, &trackers.1), &table, args.options);

    let text_path = args.out.join("report.txt");
    std::fs::write(&text_path, render_text(&analysis)).map_err(|e| ReportError::io(&text_path, e))?;
    let json_path = args.out.join("report.json");
    let mut json = serde_json::to_string_pretty(&analysis)?;
    json.push('\n');
    std::fs::write(&json_path, json).map_err(|e| ReportError::io(&json_path, e))?;
    write_tables(&analysis, &args.out.join("tables"))?;

    let exit_code = if analysis.degenerate() { EXIT_DEGENERATE } else { 0 };
    Ok(AnalyzeOutcome { analysis, manifest, exit_code })
}

#[derive(Debug, Clone)]
pub struct IngestArgs {
    pub dataset: DatasetSource,
    pub export_jsonl: Option<PathBuf>,
    /// Database path and sidecar path.
    pub export_db: Option<(PathBuf, PathBuf)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub provenance: String,
    pub visits: usize,
    pub requests: usize,
    pub cookies: usize,
    pub visits_by_country: BTreeMap<String, usize>,
    pub warnings: Vec<Warning>,
}

impl IngestSummary {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dataset: {}", self.provenance);
        let _ = writeln!(s, "visits: {}  requests: {}  cookies: {}", self.visits, self.requests, self.cookies);
        for (c, n) in &self.visits_by_country {
            let _ = writeln!(s, "  {c}: {n} visits");
        }
        let _ = writeln!(s, "warnings: {}", self.warnings.len());
        for w in &self.warnings {
            let _ = writeln!(s, "  {w}");
        }
        s
    }
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<IngestSummary, ReportError> {
    let dataset = args.dataset.load()?;
    if let Some(path) = &args.export_jsonl {
        let file = std::fs::File::create(path).map_err(|e| ReportError::io(path, e))?;
        dataset.write_jsonl(std::io::BufWriter::new(file)).map_err(|e| ReportError::io(path, e))?;
    }
    if let Some((db, sidecar)) = &args.export_db {
        if db.exists() {
            return Err(ReportError::Input(format!("{} already exists", db.display())));
        }
        export_openwpm_db(&dataset, db, sidecar).map_err(|e| ReportError::Input(format!("export: {e}")))?;
    }
    Ok(IngestSummary {
        provenance: dataset.provenance().to_string(),
        visits: dataset.visits().len(),
        requests: dataset.requests().len(),
        cookies: dataset.cookies().len(),
        visits_by_country: dataset.visits_by_country().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        warnings: validate(&dataset),
    })
}

/// Generates a synthetic crawl and writes it with its ledger and filter lists to `out`.
pub fn cmd_synth(config: &SynthConfig, out: &Path) -> Result<SynthOutput, ReportError> {
    let output = generate(config).map_err(|e| ReportError::Input(e.to_string()))?;
    output.write_to(out).map_err(|e| ReportError::Input(e.to_string()))?;
    Ok(output)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchLine {
    pub url: String,
    pub third_party: Option<bool>,
    pub outcome: Option<MatchOutcome>,
    pub matched_rule: Option<RuleId>,
    pub exception_rule: Option<RuleId>,
    pub error: Option<String>,
}

/// Matches each URL as if requested from `site`, with the party flag taken
/// from the classifier in `mode`.
pub fn cmd_match(
    rules: &FilterSet,
    urls: &[String],
    site: &str,
    mode: ClassificationMode,
    table: &PublicSuffixTable,
) -> Vec<MatchLine> {
    urls.iter()
        .map(|url| {
            let mut line = MatchLine {
                url: url.clone(),
                third_party: None,
                outcome: None,
                matched_rule: None,
                exception_rule: None,
                error: None,
            };
            let third = match classify_party(site, url, mode, table) {
                Ok(label) => label.is_third_party(),
                Err(e) => {
                    line.error = Some(e.to_string());
                    return line;
                }
            };
            line.third_party = Some(third);
            match MatchQuery::new(url, site, third) {
                Ok(q) => {
                    let r = rules.match_url(&q);
                    line.outcome = Some(r.outcome);
                    line.matched_rule = r.matched_rule;
                    line.exception_rule = r.exception_rule;
                }
                Err(e) => line.error = Some(e.to_string()),
            }
            line
        })
        .collect()
}
