use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use trackscope::domain::ClassificationMode;
use trackscope::filter::{compile_filter_set, FilterSet, ListKind};
use trackscope::metrics::DomainGranularity;
use trackscope::report::{
    cmd_analyze, cmd_ingest, cmd_match, cmd_synth, load_psl, AnalyzeArgs, AnalyzeOptions, CorrelationChoice,
    DatasetSource, IngestArgs, PairwiseChoice, EXIT_INPUT,
};
use trackscope::synth::SynthConfig;

#[derive(Parser)]
#[command(name = "trackscope", version, about = "Measure third-party tracking in crawl logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a crawl dataset, optionally converting it.
    Ingest(IngestCmd),
    /// Generate a synthetic crawl with planted tracking levels.
    Synth(SynthCmd),
    /// Run the full analysis and write the report bundle.
    Analyze(AnalyzeCmd),
    /// Match URLs against a filter list and print one JSON result per URL.
    Match(MatchCmd),
}

#[derive(Args)]
struct DatasetArgs {
    /// Crawl dataset in JSONL form.
    #[arg(long, conflicts_with = "openwpm_db")]
    dataset: Option<PathBuf>,
    /// Crawl database with `http_requests` and `cookies` tables.
    #[arg(long, requires = "sidecar")]
    openwpm_db: Option<PathBuf>,
    /// JSON file mapping visit ids to country and site.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

impl DatasetArgs {
    fn source(&self) -> Result<DatasetSource> {
        match (&self.dataset, &self.openwpm_db, &self.sidecar) {
            (Some(p), None, _) => Ok(DatasetSource::Jsonl(p.clone())),
            (None, Some(db), Some(sidecar)) => Ok(DatasetSource::OpenWpm { db: db.clone(), sidecar: sidecar.clone() }),
            _ => bail!("give either --dataset or --openwpm-db with --sidecar"),
        }
    }
}

#[derive(Args)]
struct IngestCmd {
    #[command(flatten)]
    input: DatasetArgs,
    /// Write the dataset back out as JSONL.
    #[arg(long)]
    export_jsonl: Option<PathBuf>,
    /// Write the dataset as a crawl database (needs --export-sidecar).
    #[arg(long, requires = "export_sidecar")]
    export_db: Option<PathBuf>,
    #[arg(long)]
    export_sidecar: Option<PathBuf>,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthCmd {
    /// JSON config; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sites per country for the built-in four-country plan.
    #[arg(long, default_value_t = 250)]
    sites: u32,
    #[arg(long, default_value_t = 0.7)]
    cookie_correlation: f64,
    /// Plant this pooled tracker-minus-ad share gap per country.
    #[arg(long)]
    ad_gap: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeCmd {
    #[command(flatten)]
    input: DatasetArgs,
    #[arg(long)]
    ads: PathBuf,
    #[arg(long)]
    trackers: PathBuf,
    /// Public suffix list; the bundled snapshot is used when absent.
    #[arg(long)]
    psl: Option<PathBuf>,
    /// paper | psl
    #[arg(long, default_value = "psl")]
    mode: ClassificationMode,
    /// host | registrable
    #[arg(long, default_value = "registrable")]
    domain_granularity: DomainGranularity,
    /// rank | proportion | both
    #[arg(long, default_value = "both")]
    pairwise: PairwiseChoice,
    /// pearson | spearman | both
    #[arg(long, default_value = "pearson")]
    correlation: CorrelationChoice,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    top_k: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MatchCmd {
    /// Filter list file.
    #[arg(long, required_unless_present = "rule")]
    rules: Option<PathBuf>,
    /// Inline rule; may be repeated.
    #[arg(long)]
    rule: Vec<String>,
    /// Site the requests are made from.
    #[arg(long)]
    site: String,
    #[arg(long, default_value = "psl")]
    mode: ClassificationMode,
    #[arg(long)]
    psl: Option<PathBuf>,
    /// File with one URL per line.
    #[arg(long)]
    urls: Option<PathBuf>,
    url: Vec<String>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Ingest(c) => {
            let summary = cmd_ingest(&IngestArgs {
                dataset: c.input.source()?,
                export_jsonl: c.export_jsonl,
                export_db: c.export_db.zip(c.export_sidecar),
            })?;
            if c.json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                print!("{}", summary.render());
            }
            Ok(0)
        }
        Command::Synth(c) => {
            let config = match &c.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                None => {
                    let mut config = SynthConfig::four_country_preset(c.seed);
                    for country in &mut config.countries {
                        country.n_sites = c.sites;
                    }
                    config.cookie_correlation = c.cookie_correlation;
                    config.ad_share_gap = c.ad_gap;
                    config
                }
            };
            let out = cmd_synth(&config, &c.out)?;
            let (v, r, k) = out.dataset.counts();
            println!("wrote {} ({v} visits, {r} requests, {k} cookies)", c.out.display());
            Ok(0)
        }
        Command::Analyze(c) => {
            let args = AnalyzeArgs {
                dataset: c.input.source()?,
                ads: c.ads,
                trackers: c.trackers,
                psl: c.psl,
                options: AnalyzeOptions {
                    mode: c.mode,
                    granularity: c.domain_granularity,
                    pairwise: c.pairwise,
                    correlation: c.correlation,
                    top_k: c.top_k as usize,
                },
                out: c.out,
            };
            let outcome = cmd_analyze(&args)?;
            for note in &outcome.analysis.notes {
                eprintln!("warning: {note}");
            }
            println!("report written to {}", args.out.display());
            Ok(outcome.exit_code as u8)
        }
        Command::Match(c) => {
            let mut lines: Vec<String> = c.rule.clone();
            if let Some(path) = &c.rules {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                lines.extend(text.lines().map(str::to_string));
            }
            let (set, report): (FilterSet, _) = compile_filter_set(&lines, ListKind::Trackers);
            for (line, err) in &report.errors {
                eprintln!("rule line {line}: {err}");
            }
            let mut urls = c.url.clone();
            if let Some(path) = &c.urls {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                urls.extend(text.lines().filter(|l| !l.trim().is_empty()).map(str::to_string));
            }
            let table = load_psl(c.psl.as_deref())?;
            for line in cmd_match(&set, &urls, &c.site, c.mode, &table) {
                println!("{}", serde_json::to_string(&line)?);
            }
            Ok(0)
        }
    }
}
