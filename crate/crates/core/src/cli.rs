//! Command-line front end. The binary only forwards `std::env::args` to
//! [`run`], so every subcommand can be exercised in-process.
//!
//! Settings resolve as flags, then the JSON file given with `--config`,
//! then built-in defaults. Exit status is [`EXIT_OK`], [`EXIT_INPUT`] for
//! anything wrong with the inputs, or [`EXIT_INTERNAL`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{correlate, disagreement_report, rank_systems, CorrelationResult, RankedRow, ScoreTable};
use crate::apt::{score_apt, AptCase, AptConfig, AptScore, AptWeights, DEFAULT_WINDOW};
use crate::autoprf::{score_autoprf, AutoPrfScore};
use crate::corpus::{
    parse_judgments, parse_moses_alignment, parse_test_suite, parse_test_suite_records, parse_tokenized_text,
    ParseError, PronounItem, SystemRun, TokenizedCorpus,
};
use crate::error::Error;
use crate::lexicon::{parse_equivalence, parse_lexicon, EquivalenceTable, PronounLexicon};
use crate::service::{self, DEFAULT_ADDR};
use crate::triage::{
    build_queue, final_report, ConflictResolution, FinalReport, TriageConfig, TriageError, TriageStore,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Toolkit version followed by the on-disk format version.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (file format 1)");

pub const SCORE_FILE: &str = "score.json";
pub const ITEMS_FILE: &str = "items.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Triage(t) => t.into(),
            Error::Io(_) => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<TriageError> for CliError {
    fn from(e: TriageError) -> Self {
        match e {
            TriageError::Io(_) => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn input<E: Into<Error>>(e: E) -> CliError {
    CliError::Input(e.into().to_string())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Tsv,
    #[default]
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "pronoun-eval", version = VERSION, about = "Pronoun translation metrics and review workflow")]
pub struct Cli {
    /// Output format for results printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one system against the reference.
    #[command(subcommand)]
    Score(ScoreCommand),
    /// Pearson and Spearman correlation between two metric columns.
    Correlate(CorrelateArgs),
    /// Rank the rows of a score table by one metric.
    Rank(RankArgs),
    /// Where APT verdicts and human judgments disagree, by category.
    Disagreements(DisagreementArgs),
    /// Semi-automatic review workspace.
    #[command(subcommand)]
    Triage(TriageCommand),
}

#[derive(Debug, Subcommand)]
pub enum ScoreCommand {
    Apt(AptArgs),
    Autoprf(AutoPrfArgs),
}

#[derive(Debug, Args)]
pub struct RunInputs {
    /// Tokenised source text, one sentence per line.
    #[arg(long)]
    pub source: PathBuf,
    /// Tokenised MT output.
    #[arg(long)]
    pub mt: PathBuf,
    /// Tokenised reference translation.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Moses-style source-to-MT alignment.
    #[arg(long)]
    pub align_mt: PathBuf,
    /// Moses-style source-to-reference alignment.
    #[arg(long)]
    pub align_ref: PathBuf,
    /// Pronoun test suite, one JSON object per line.
    #[arg(long)]
    pub suite: PathBuf,
    /// Target-language pronoun forms, one per line (default: French).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Name recorded in per-item output (default: MT file stem).
    #[arg(long)]
    pub system_name: Option<String>,
    /// JSON settings file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory receiving score.json and items.jsonl.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AptArgs {
    #[command(flatten)]
    pub inputs: RunInputs,
    /// Six comma-separated case weights in [0, 1].
    #[arg(long)]
    pub weights: Option<AptWeights>,
    /// Repair alignments that miss the pronoun translation.
    #[arg(long, overrides_with = "no_fix_alignments")]
    pub fix_alignments: bool,
    #[arg(long, overrides_with = "fix_alignments")]
    pub no_fix_alignments: bool,
    /// Search radius of the alignment repair, in target tokens.
    #[arg(long)]
    pub window: Option<usize>,
    /// Tab-separated pairs of equivalent pronoun forms.
    #[arg(long)]
    pub equivalence: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AutoPrfArgs {
    #[command(flatten)]
    pub inputs: RunInputs,
    /// Count only the leftmost pronoun form on each side.
    #[arg(long, overrides_with = "no_restrict_pronouns")]
    pub restrict_pronouns: bool,
    #[arg(long, overrides_with = "restrict_pronouns")]
    pub no_restrict_pronouns: bool,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Score table: a `label` column followed by metric columns.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    /// Drop the `Reference` row before correlating.
    #[arg(long)]
    pub exclude_reference: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub metric: String,
}

#[derive(Debug, Args)]
pub struct DisagreementArgs {
    /// Per-item APT results (items.jsonl from one or more `score apt` runs).
    #[arg(long)]
    pub apt: PathBuf,
    /// Human judgments, one JSON object per line.
    #[arg(long)]
    pub judgments: PathBuf,
    #[arg(long)]
    pub suite: PathBuf,
    /// Source text; when given, suite positions are checked against it.
    #[arg(long)]
    pub source: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TriageCommand {
    /// Build a review queue from APT results.
    Init(TriageInitArgs),
    /// Serve the review API (and the UI bundle, if given).
    Serve(TriageServeArgs),
    /// Combine automatic and human verdicts into the final report.
    Report(TriageReportArgs),
}

#[derive(Debug, Args)]
pub struct TriageInitArgs {
    #[arg(long)]
    pub apt: PathBuf,
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub align_ref: PathBuf,
    /// `NAME:MT:ALIGN`, once per system in the APT results.
    #[arg(long = "run", required = true)]
    pub runs: Vec<String>,
    /// APT cases accepted without review, comma-separated (1 and/or 2).
    #[arg(long, value_delimiter = ',')]
    pub auto_accept: Option<Vec<u8>>,
    /// Do not require an antecedent verdict for anaphoric items.
    #[arg(long)]
    pub no_antecedent_check: bool,
    #[arg(long)]
    pub conflict_resolution: Option<ConflictResolution>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TriageServeArgs {
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub addr: Option<SocketAddr>,
    /// Directory holding the annotator UI bundle.
    #[arg(long)]
    pub ui: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TriageReportArgs {
    #[arg(long)]
    pub dir: PathBuf,
    /// Override the workspace's conflict resolution.
    #[arg(long)]
    pub resolution: Option<ConflictResolution>,
}

impl clap::ValueEnum for ConflictResolution {
    fn value_variants<'a>() -> &'a [Self] {
        &[
            ConflictResolution::Unable,
            ConflictResolution::PreferCorrect,
            ConflictResolution::PreferIncorrect,
        ]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            ConflictResolution::Unable => "unable",
            ConflictResolution::PreferCorrect => "prefer-correct",
            ConflictResolution::PreferIncorrect => "prefer-incorrect",
        }))
    }
}

/// Contents of a `--config` file. Every field is optional; relative paths
/// are resolved against the file's directory.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub weights: Option<AptWeights>,
    pub fix_alignments: Option<bool>,
    pub window: Option<usize>,
    pub lexicon: Option<PathBuf>,
    pub equivalence: Option<PathBuf>,
    pub restrict_pronouns: Option<bool>,
    pub auto_accept: Option<Vec<u8>>,
    pub require_antecedent_judgment: Option<bool>,
    pub conflict_resolution: Option<ConflictResolution>,
    pub addr: Option<SocketAddr>,
    pub ui: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let raw = read(path)?;
        let mut config: FileConfig = serde_json::from_str(&raw)
            .map_err(|e| CliError::Input(format!("{}: line {}: {e}", path.display(), e.line())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.lexicon, &mut config.equivalence, &mut config.ui]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}

fn flag_pair(on: bool, off: bool) -> Option<bool> {
    match (on, off) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parsed<T>(path: &Path, result: Result<T, ParseError>) -> Result<T, CliError> {
    result.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn jsonl<T: Serialize>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| serde_json::to_string(v).expect("output serializes") + "\n")
        .collect()
}

fn load_corpus(path: &Path) -> Result<TokenizedCorpus, CliError> {
    parsed(path, parse_tokenized_text(&read(path)?))
}

fn load_run(name: &str, source: &TokenizedCorpus, target: &Path, alignment: &Path) -> Result<SystemRun, CliError> {
    let tgt = load_corpus(target)?;
    let links = parsed(alignment, parse_moses_alignment(&read(alignment)?, source, &tgt))?;
    parsed(target, SystemRun::new(name, source, tgt, links))
}

fn load_suite(path: &Path, source: Option<&TokenizedCorpus>) -> Result<Vec<PronounItem>, CliError> {
    let raw = read(path)?;
    match source {
        Some(src) => parsed(path, parse_test_suite(&raw, src)),
        None => parsed(path, parse_test_suite_records(&raw)),
    }
}

fn load_lexicon(path: Option<&Path>) -> Result<PronounLexicon, CliError> {
    match path {
        Some(p) => parsed(p, parse_lexicon(&read(p)?)),
        None => Ok(PronounLexicon::french()),
    }
}

fn load_equivalence(path: Option<&Path>) -> Result<EquivalenceTable, CliError> {
    match path {
        Some(p) => parsed(p, parse_equivalence(&read(p)?)),
        None => Ok(EquivalenceTable::empty()),
    }
}

struct LoadedRuns {
    source: TokenizedCorpus,
    suite: Vec<PronounItem>,
    mt: SystemRun,
    reference: SystemRun,
}

fn load_runs(inputs: &RunInputs) -> Result<LoadedRuns, CliError> {
    let source = load_corpus(&inputs.source)?;
    let suite = load_suite(&inputs.suite, Some(&source))?;
    let name = match &inputs.system_name {
        Some(n) => n.clone(),
        None => inputs
            .mt
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "system".to_owned()),
    };
    let mt = load_run(&name, &source, &inputs.mt, &inputs.align_mt)?;
    let reference = load_run("reference", &source, &inputs.reference, &inputs.align_ref)?;
    Ok(LoadedRuns {
        source,
        suite,
        mt,
        reference,
    })
}

/// What `score apt` writes to `score.json` and prints as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AptSummary {
    pub system_name: String,
    pub weights: AptWeights,
    pub fix_alignments: bool,
    pub window: usize,
    #[serde(flatten)]
    pub score: AptScore,
    /// Items whose alignment was repaired on either side.
    pub corrected_items: usize,
}

/// What `score autoprf` writes to `score.json` and prints as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoPrfSummary {
    pub system_name: String,
    pub restricted: bool,
    pub n_items: usize,
    #[serde(flatten)]
    pub score: AutoPrfScore,
}

fn cmd_score_apt(args: &AptArgs, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let file = FileConfig::load(args.inputs.config.as_deref())?;
    let lexicon = load_lexicon(args.inputs.lexicon.as_deref().or(file.lexicon.as_deref()))?;
    let equivalence = load_equivalence(args.equivalence.as_deref().or(file.equivalence.as_deref()))?;
    let config = AptConfig {
        weights: args.weights.or(file.weights).unwrap_or_default(),
        fix_alignments: flag_pair(args.fix_alignments, args.no_fix_alignments)
            .or(file.fix_alignments)
            .unwrap_or(false),
        window: args.window.or(file.window).unwrap_or(DEFAULT_WINDOW),
        equivalence,
        lexicon,
    };
    let runs = load_runs(&args.inputs)?;
    let (score, items) = score_apt(&runs.suite, &runs.source, &runs.mt, &runs.reference, &config).map_err(input)?;
    let summary = AptSummary {
        system_name: runs.mt.system_name.clone(),
        weights: config.weights,
        fix_alignments: config.fix_alignments,
        window: config.window,
        corrected_items: items.iter().filter(|r| r.alignment_was_corrected).count(),
        score,
    };
    if let Some(dir) = &args.inputs.out {
        fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
        write_file(&dir.join(SCORE_FILE), &json_pretty(&summary))?;
        write_file(&dir.join(ITEMS_FILE), &jsonl(&items))?;
    }
    let text = match format {
        OutputFormat::Json => json_pretty(&summary),
        OutputFormat::Tsv => {
            let counts: Vec<String> = summary.score.case_counts.iter().map(|c| c.to_string()).collect();
            format!(
                "system\tscore\tn_items\tcase1\tcase2\tcase3\tcase4\tcase5\tcase6\n{}\t{:.6}\t{}\t{}\n",
                summary.system_name,
                summary.score.score,
                summary.score.n_items,
                counts.join("\t")
            )
        }
        OutputFormat::Text => {
            let cases: Vec<String> = AptCase::ALL
                .iter()
                .map(|&c| format!("{}:{}", c.number(), summary.score.count(c)))
                .collect();
            format!(
                "system     {}\nAPT        {:.3}\nitems      {}\ncases      {}\ncorrected  {}\n",
                summary.system_name,
                summary.score.score,
                summary.score.n_items,
                cases.join(" "),
                summary.corrected_items
            )
        }
    };
    emit(out, &text)
}

fn cmd_score_autoprf(args: &AutoPrfArgs, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let file = FileConfig::load(args.inputs.config.as_deref())?;
    let lexicon = load_lexicon(args.inputs.lexicon.as_deref().or(file.lexicon.as_deref()))?;
    let restricted = flag_pair(args.restrict_pronouns, args.no_restrict_pronouns)
        .or(file.restrict_pronouns)
        .unwrap_or(false);
    let runs = load_runs(&args.inputs)?;
    let (score, counts) = score_autoprf(
        &runs.suite,
        &runs.source,
        &runs.mt,
        &runs.reference,
        restricted,
        &lexicon,
    )
    .map_err(input)?;
    let summary = AutoPrfSummary {
        system_name: runs.mt.system_name.clone(),
        restricted,
        n_items: counts.len(),
        score,
    };
    if let Some(dir) = &args.inputs.out {
        fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
        write_file(&dir.join(SCORE_FILE), &json_pretty(&summary))?;
        write_file(&dir.join(ITEMS_FILE), &jsonl(&counts))?;
    }
    let s = &summary.score;
    let text = match format {
        OutputFormat::Json => json_pretty(&summary),
        OutputFormat::Tsv => format!(
            "system\trestricted\tprecision\trecall\tf\tclip\tcandidate\treference\n{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\n",
            summary.system_name,
            restricted,
            s.precision,
            s.recall,
            s.f,
            s.total_clip,
            s.total_candidate,
            s.total_reference
        ),
        OutputFormat::Text => format!(
            "system     {}\nrestricted {}\nprecision  {:.3}\nrecall     {:.3}\nF          {:.3}\nclip       {} (candidate {}, reference {})\n",
            summary.system_name,
            restricted,
            s.precision,
            s.recall,
            s.f,
            s.total_clip,
            s.total_candidate,
            s.total_reference
        ),
    };
    emit(out, &text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOutput {
    pub x: String,
    pub y: String,
    pub exclude_reference: bool,
    #[serde(flatten)]
    pub result: CorrelationResult,
}

fn load_table(path: &Path) -> Result<ScoreTable, CliError> {
    ScoreTable::parse_tsv(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_correlate(args: &CorrelateArgs, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let table = load_table(&args.table)?;
    let result = correlate(&table, &args.x, &args.y, args.exclude_reference).map_err(input)?;
    let o = CorrelationOutput {
        x: args.x.clone(),
        y: args.y.clone(),
        exclude_reference: args.exclude_reference,
        result,
    };
    let text = match format {
        OutputFormat::Json => json_pretty(&o),
        OutputFormat::Tsv => format!(
            "x\ty\trows\tpearson\tspearman\n{}\t{}\t{}\t{:.6}\t{:.6}\n",
            o.x, o.y, o.result.n, o.result.pearson, o.result.spearman
        ),
        OutputFormat::Text => format!(
            "{} vs {} ({} rows{})\npearson   {:.3}\nspearman  {:.3}\n",
            o.x,
            o.y,
            o.result.n,
            if o.exclude_reference {
                ", reference excluded"
            } else {
                ""
            },
            o.result.pearson,
            o.result.spearman
        ),
    };
    emit(out, &text)
}

fn cmd_rank(args: &RankArgs, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let table = load_table(&args.table)?;
    let ranked: Vec<RankedRow> = rank_systems(&table, &args.metric).map_err(input)?;
    let text = match format {
        OutputFormat::Json => json_pretty(&ranked),
        OutputFormat::Tsv => {
            let mut s = String::from("rank\tlabel\tvalue\ttied\n");
            for r in &ranked {
                s.push_str(&format!("{}\t{}\t{}\t{}\n", r.rank, r.label, r.value, r.tied));
            }
            s
        }
        OutputFormat::Text => {
            let width = ranked.iter().map(|r| r.label.len()).max().unwrap_or(0);
            ranked
                .iter()
                .map(|r| {
                    format!(
                        "{:>2}{} {:<width$}  {:.3}\n",
                        r.rank,
                        if r.tied { "=" } else { " " },
                        r.label,
                        r.value
                    )
                })
                .collect()
        }
    };
    emit(out, &text)
}

fn cmd_disagreements(args: &DisagreementArgs, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let source = args.source.as_deref().map(load_corpus).transpose()?;
    let suite = load_suite(&args.suite, source.as_ref())?;
    let apt = parsed(&args.apt, crate::apt::parse_apt_results(&read(&args.apt)?))?;
    let judgments = parsed(&args.judgments, parse_judgments(&read(&args.judgments)?))?;
    let report = disagreement_report(&apt, &judgments, &suite).map_err(input)?;
    let text = match format {
        OutputFormat::Json => json_pretty(&report),
        OutputFormat::Tsv => report.to_tsv(),
        OutputFormat::Text => report.to_text(),
    };
    emit(out, &text)
}

fn parse_run_spec(spec: &str) -> Result<(String, PathBuf, PathBuf), CliError> {
    let mut parts = spec.splitn(3, ':');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(name), Some(mt), Some(align)) if !name.is_empty() && !mt.is_empty() && !align.is_empty() => {
            Ok((name.to_owned(), PathBuf::from(mt), PathBuf::from(align)))
        }
        _ => Err(CliError::Input(format!("--run expects NAME:MT:ALIGN, got {spec:?}"))),
    }
}

fn cmd_triage_init(args: &TriageInitArgs, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let defaults = TriageConfig::default();
    let auto_accept = match args.auto_accept.clone().or(file.auto_accept) {
        Some(numbers) => numbers
            .into_iter()
            .map(|n| AptCase::from_number(n).ok_or_else(|| CliError::Input(format!("no APT case {n}"))))
            .collect::<Result<_, _>>()?,
        None => defaults.auto_accept_cases,
    };
    let config = TriageConfig {
        auto_accept_cases: auto_accept,
        require_antecedent_judgment: if args.no_antecedent_check {
            false
        } else {
            file.require_antecedent_judgment
                .unwrap_or(defaults.require_antecedent_judgment)
        },
        conflict_resolution: args
            .conflict_resolution
            .or(file.conflict_resolution)
            .unwrap_or(defaults.conflict_resolution),
    };
    let source = load_corpus(&args.source)?;
    let suite = load_suite(&args.suite, Some(&source))?;
    let reference = load_run("reference", &source, &args.reference, &args.align_ref)?;
    let runs = args
        .runs
        .iter()
        .map(|spec| {
            let (name, mt, align) = parse_run_spec(spec)?;
            load_run(&name, &source, &mt, &align)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let apt = parsed(&args.apt, crate::apt::parse_apt_results(&read(&args.apt)?))?;
    let queue = build_queue(&apt, &suite, &source, &reference, &runs, &config)?;
    TriageStore::init(&args.out_dir, &queue)?;
    let progress = queue.progress();
    let text = match format {
        OutputFormat::Json => json_pretty(&progress),
        OutputFormat::Tsv => format!(
            "total\tauto_accepted\tpending\n{}\t{}\t{}\n",
            progress.overall.total, progress.overall.auto_accepted, progress.overall.pending
        ),
        OutputFormat::Text => format!(
            "{}: {} items, {} auto-accepted, {} pending\n",
            args.out_dir.display(),
            progress.overall.total,
            progress.overall.auto_accepted,
            progress.overall.pending
        ),
    };
    emit(out, &text)
}

fn cmd_triage_serve(args: &TriageServeArgs, err: &mut dyn Write) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let default_addr: SocketAddr = DEFAULT_ADDR.parse().expect("default address parses");
    let addr = args.addr.or(file.addr).unwrap_or(default_addr);
    let ui = args.ui.clone().or(file.ui);
    if let Some(dir) = &ui {
        if !dir.is_dir() {
            return Err(CliError::Input(format!(
                "{}: UI bundle directory not found",
                dir.display()
            )));
        }
    }
    let store = TriageStore::open(&args.dir)?;
    let _ = writeln!(err, "serving {} on http://{addr}", args.dir.display());
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    runtime
        .block_on(service::serve(store, addr, ui))
        .map_err(|e| CliError::Internal(format!("{addr}: {e}")))
}

/// The report `triage report` prints for a workspace, as served by
/// `/api/report` when no resolution override is given.
pub fn workspace_report(dir: &Path, resolution: Option<ConflictResolution>) -> Result<FinalReport, CliError> {
    let queue = TriageStore::replayed_queue(dir)?;
    let resolution = resolution.unwrap_or(queue.config().conflict_resolution);
    Ok(final_report(&queue, resolution))
}

fn cmd_triage_report(args: &TriageReportArgs, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let report = workspace_report(&args.dir, args.resolution)?;
    let text = match format {
        OutputFormat::Json => report.to_canonical_json(),
        OutputFormat::Tsv => report.to_tsv(),
        OutputFormat::Text => report.to_text(),
    };
    emit(out, &text)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Internal(format!("writing output: {e}")))
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let format = cli.format;
    match &cli.command {
        Command::Score(ScoreCommand::Apt(a)) => cmd_score_apt(a, format, out),
        Command::Score(ScoreCommand::Autoprf(a)) => cmd_score_autoprf(a, format, out),
        Command::Correlate(a) => cmd_correlate(a, format, out),
        Command::Rank(a) => cmd_rank(a, format, out),
        Command::Disagreements(a) => cmd_disagreements(a, format, out),
        Command::Triage(TriageCommand::Init(a)) => cmd_triage_init(a, format, out),
        Command::Triage(TriageCommand::Serve(a)) => cmd_triage_serve(a, err),
        Command::Triage(TriageCommand::Report(a)) => cmd_triage_report(a, format, out),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let to_stdout = !e.use_stderr();
            let rendered = e.render().to_string();
            let _ = if to_stdout {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return if to_stdout { EXIT_OK } else { EXIT_INPUT };
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
