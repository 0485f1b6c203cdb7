//! Semi-automatic evaluation workflow.
//!
//! Pronoun translations that APT places in a high-precision case are
//! accepted automatically; everything else goes to a review queue that
//! human annotators work through. Judgments are recorded in an append-only
//! JSON-lines journal, and the queue state is always the initial snapshot
//! plus a replay of that journal.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apt::{aligned_target_tokens, AptCase, AptItemResult};
use crate::corpus::{
    DisagreementLabel, PronounCategory, PronounItem, SystemRun, TokenPosition, TokenizedCorpus, Verdict,
};

pub const QUEUE_FILE: &str = "queue.jsonl";
pub const JOURNAL_FILE: &str = "journal.jsonl";
pub const CONFIG_FILE: &str = "config.json";

/// Version of the queue and journal line formats.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TriageError {
    #[error("unknown item {0}")]
    UnknownItem(String),
    #[error("revision conflict on {item}: item is at revision {current}, judgment was made against {submitted}")]
    Conflict { item: String, current: u64, submitted: u64 },
    #[error("{0}")]
    Validation(String),
    #[error("missing context: {0}")]
    MissingContext(String),
    #[error("{path}:{line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

impl TriageError {
    /// Conflicts can be retried after reloading the item.
    pub fn is_retryable(&self) -> bool {
        matches!(self, TriageError::Conflict { .. })
    }
}

impl From<std::io::Error> for TriageError {
    fn from(e: std::io::Error) -> Self {
        TriageError::Io(e.to_string())
    }
}

/// `(system, pronoun)` key, written `system:pronoun`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemId {
    pub system_name: String,
    pub pronoun_id: String,
}

impl ItemId {
    pub fn new(system_name: impl Into<String>, pronoun_id: impl Into<String>) -> Self {
        ItemId {
            system_name: system_name.into(),
            pronoun_id: pronoun_id.into(),
        }
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.system_name, self.pronoun_id)
    }
}

impl FromStr for ItemId {
    type Err = TriageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((sys, pid)) if !sys.is_empty() && !pid.is_empty() => Ok(ItemId::new(sys, pid)),
            _ => Err(TriageError::Validation(format!(
                "malformed item id {s:?}; expected system:pronoun"
            ))),
        }
    }
}

impl Serialize for ItemId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ItemId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemStatus {
    AutoAccepted,
    Pending,
    Judged,
}

/// How an item judged differently by several annotators is counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictResolution {
    /// Conflicting items count as `unable`.
    #[default]
    Unable,
    PreferCorrect,
    PreferIncorrect,
}

impl FromStr for ConflictResolution {
    type Err = TriageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unable" => Ok(ConflictResolution::Unable),
            "prefer-correct" => Ok(ConflictResolution::PreferCorrect),
            "prefer-incorrect" => Ok(ConflictResolution::PreferIncorrect),
            other => Err(TriageError::Validation(format!(
                "unknown conflict resolution {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriageConfig {
    pub auto_accept_cases: BTreeSet<AptCase>,
    /// Anaphoric items with an annotated antecedent need an antecedent verdict.
    pub require_antecedent_judgment: bool,
    #[serde(default)]
    pub conflict_resolution: ConflictResolution,
}

impl Default for TriageConfig {
    fn default() -> Self {
        TriageConfig {
            auto_accept_cases: BTreeSet::from([AptCase::Identical]),
            require_antecedent_judgment: true,
            conflict_resolution: ConflictResolution::Unable,
        }
    }
}

impl TriageConfig {
    pub fn validate(&self) -> Result<(), TriageError> {
        if let Some(c) = self
            .auto_accept_cases
            .iter()
            .find(|c| !matches!(c, AptCase::Identical | AptCase::Equivalent))
        {
            return Err(TriageError::Validation(format!(
                "case {c} cannot be auto-accepted; only cases 1 and 2 are allowed"
            )));
        }
        Ok(())
    }
}

/// Token positions to highlight on one target side.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideHighlights {
    /// Indices in the pronoun's sentence.
    pub pronoun: Vec<usize>,
    pub antecedent: Vec<TokenPosition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSentence {
    pub sentence_index: usize,
    pub source: Vec<String>,
    pub mt: Vec<String>,
    pub reference: Vec<String>,
}

/// Everything an annotator needs to see for one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewContext {
    pub sentences: Vec<ContextSentence>,
    pub source_pronoun: TokenPosition,
    pub source_antecedent: Vec<TokenPosition>,
    pub mt: SideHighlights,
    pub reference: SideHighlights,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub item_id: ItemId,
    pub annotator: String,
    pub pronoun_verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antecedent_verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disagreement_label: Option<DisagreementLabel>,
    /// Item revision the annotator saw.
    pub revision: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub item_id: ItemId,
    pub category: PronounCategory,
    pub surface: String,
    pub status: ItemStatus,
    pub apt_case: AptCase,
    pub mt_token: Option<String>,
    pub ref_token: Option<String>,
    pub context: ReviewContext,
    pub revision: u64,
    /// Latest judgment per annotator.
    #[serde(default)]
    pub judgments: BTreeMap<String, Judgment>,
}

impl ReviewItem {
    pub fn needs_review(&self) -> bool {
        self.status != ItemStatus::AutoAccepted
    }

    pub fn judged_by(&self, annotator: &str) -> bool {
        self.judgments.contains_key(annotator)
    }

    /// Combined verdict across annotators, and whether they conflicted.
    pub fn resolved_verdict(&self, resolution: ConflictResolution) -> Option<(Verdict, bool)> {
        let verdicts: BTreeSet<Verdict> = self.judgments.values().map(|j| j.pronoun_verdict).collect();
        match verdicts.len() {
            0 => None,
            1 => verdicts.into_iter().next().map(|v| (v, false)),
            _ => {
                let pick = match resolution {
                    ConflictResolution::Unable => Verdict::Unable,
                    ConflictResolution::PreferCorrect => [Verdict::Correct, Verdict::Incorrect]
                        .into_iter()
                        .find(|v| verdicts.contains(v))
                        .unwrap_or(Verdict::Unable),
                    ConflictResolution::PreferIncorrect => [Verdict::Incorrect, Verdict::Correct]
                        .into_iter()
                        .find(|v| verdicts.contains(v))
                        .unwrap_or(Verdict::Unable),
                };
                Some((pick, true))
            }
        }
    }
}

fn build_context(
    item: &PronounItem,
    result: &AptItemResult,
    source: &TokenizedCorpus,
    reference: &SystemRun,
    run: &SystemRun,
) -> Result<ReviewContext, TriageError> {
    let pronoun_sentence = item.sentence_index;
    let antecedents = item.antecedent_positions();
    let first = antecedents
        .iter()
        .map(|p| p.sentence_index)
        .chain([pronoun_sentence.saturating_sub(1)])
        .min()
        .unwrap_or(pronoun_sentence)
        .min(pronoun_sentence);

    let mut sentences = Vec::new();
    for s in first..=pronoun_sentence {
        let missing = |side: &str| TriageError::MissingContext(format!("{side} sentence {s} for item {}", item.id));
        sentences.push(ContextSentence {
            sentence_index: s,
            source: source.sentence(s).ok_or_else(|| missing("source"))?.to_vec(),
            mt: run
                .target
                .sentence(s)
                .ok_or_else(|| missing(&run.system_name))?
                .to_vec(),
            reference: reference
                .target
                .sentence(s)
                .ok_or_else(|| missing("reference"))?
                .to_vec(),
        });
    }

    let highlights = |side: &SystemRun, selected: Option<usize>| {
        let mut pronoun: Vec<usize> = aligned_target_tokens(item, side).into_iter().map(|t| t.index).collect();
        pronoun.extend(selected);
        pronoun.sort_unstable();
        pronoun.dedup();
        let antecedent = antecedents
            .iter()
            .flat_map(|p| {
                side.alignment
                    .targets_of(p.sentence_index, p.token_index)
                    .into_iter()
                    .map(|t| TokenPosition {
                        sentence_index: p.sentence_index,
                        token_index: t,
                    })
            })
            .collect();
        SideHighlights { pronoun, antecedent }
    };

    Ok(ReviewContext {
        sentences,
        source_pronoun: item.position(),
        source_antecedent: antecedents.clone(),
        mt: highlights(run, result.mt_index),
        reference: highlights(reference, result.ref_index),
    })
}

/// Review queue: every `(system, pronoun)` pair, auto-accepted or awaiting
/// human judgment.
#[derive(Debug, Clone, PartialEq)]
pub struct TriageQueue {
    items: Vec<ReviewItem>,
    index: HashMap<ItemId, usize>,
    config: TriageConfig,
}

/// Builds the queue in `(system, suite order)` order.
pub fn build_queue(
    apt_results: &[AptItemResult],
    suite: &[PronounItem],
    source: &TokenizedCorpus,
    reference: &SystemRun,
    runs: &[SystemRun],
    config: &TriageConfig,
) -> Result<TriageQueue, TriageError> {
    config.validate()?;
    let mut by_key: HashMap<(&str, &str), &AptItemResult> = HashMap::new();
    let mut systems = BTreeSet::new();
    for r in apt_results {
        if r.system_name.contains(':') {
            return Err(TriageError::Validation(format!(
                "system name {:?} must not contain ':'",
                r.system_name
            )));
        }
        systems.insert(r.system_name.as_str());
        by_key.insert((r.system_name.as_str(), r.pronoun_id.as_str()), r);
    }
    if let Some(r) = apt_results.iter().find(|r| !suite.iter().any(|i| i.id == r.pronoun_id)) {
        return Err(TriageError::Validation(format!(
            "result for unknown pronoun {}",
            r.pronoun_id
        )));
    }

    let mut items = Vec::new();
    for system in systems {
        let run = runs
            .iter()
            .find(|r| r.system_name == system)
            .ok_or_else(|| TriageError::MissingContext(format!("no run for system {system}")))?;
        for pronoun in suite {
            let result = by_key.get(&(system, pronoun.id.as_str())).ok_or_else(|| {
                TriageError::Validation(format!("no APT result for pronoun {} in system {system}", pronoun.id))
            })?;
            let status = if config.auto_accept_cases.contains(&result.case) {
                ItemStatus::AutoAccepted
            } else {
                ItemStatus::Pending
            };
            items.push(ReviewItem {
                item_id: ItemId::new(system, pronoun.id.clone()),
                category: pronoun.category,
                surface: pronoun.surface.clone(),
                status,
                apt_case: result.case,
                mt_token: result.mt_token.clone(),
                ref_token: result.ref_token.clone(),
                context: build_context(pronoun, result, source, reference, run)?,
                revision: 0,
                judgments: BTreeMap::new(),
            });
        }
    }
    TriageQueue::from_items(items, config.clone())
}

/// Filters for picking the next item to review.
#[derive(Debug, Clone, Default)]
pub struct QueueFilter {
    pub annotator: Option<String>,
    pub category: Option<CategoryFilter>,
    pub system: Option<String>,
}

/// Either one category or every category with a given function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CategoryFilter {
    Category(PronounCategory),
    Function(crate::corpus::PronounFunction),
}

impl CategoryFilter {
    pub fn matches(self, category: PronounCategory) -> bool {
        match self {
            CategoryFilter::Category(c) => c == category,
            CategoryFilter::Function(f) => category.function() == f,
        }
    }
}

impl FromStr for CategoryFilter {
    type Err = TriageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(c) = s.parse::<PronounCategory>() {
            return Ok(CategoryFilter::Category(c));
        }
        if let Ok(c) = PronounCategory::ALL.into_iter().find(|c| c.label() == s).ok_or(()) {
            return Ok(CategoryFilter::Category(c));
        }
        s.parse()
            .map(CategoryFilter::Function)
            .map_err(|_| TriageError::Validation(format!("unknown category filter {s:?}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressCounts {
    pub total: usize,
    pub auto_accepted: usize,
    pub pending: usize,
    pub judged: usize,
}

impl ProgressCounts {
    fn add(&mut self, status: ItemStatus) {
        self.total += 1;
        match status {
            ItemStatus::AutoAccepted => self.auto_accepted += 1,
            ItemStatus::Pending => self.pending += 1,
            ItemStatus::Judged => self.judged += 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub overall: ProgressCounts,
    pub judgments: usize,
    pub by_category: BTreeMap<String, ProgressCounts>,
    pub by_system: BTreeMap<String, ProgressCounts>,
}

impl TriageQueue {
    pub fn from_items(items: Vec<ReviewItem>, config: TriageConfig) -> Result<Self, TriageError> {
        config.validate()?;
        let mut index = HashMap::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            if index.insert(item.item_id.clone(), i).is_some() {
                return Err(TriageError::Validation(format!("duplicate item {}", item.item_id)));
            }
            if item.status == ItemStatus::AutoAccepted && !config.auto_accept_cases.contains(&item.apt_case) {
                return Err(TriageError::Validation(format!(
                    "item {} is auto-accepted with case {}",
                    item.item_id, item.apt_case
                )));
            }
        }
        Ok(TriageQueue { items, index, config })
    }

    pub fn items(&self) -> &[ReviewItem] {
        &self.items
    }

    pub fn config(&self) -> &TriageConfig {
        &self.config
    }

    pub fn get(&self, id: &ItemId) -> Option<&ReviewItem> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    /// Validates a judgment against the current state without applying it.
    pub fn check_judgment(&self, judgment: &Judgment) -> Result<(), TriageError> {
        let item = self
            .get(&judgment.item_id)
            .ok_or_else(|| TriageError::UnknownItem(judgment.item_id.to_string()))?;
        if judgment.annotator.trim().is_empty() {
            return Err(TriageError::Validation("annotator must not be empty".into()));
        }
        if item.status == ItemStatus::AutoAccepted {
            return Err(TriageError::Validation(format!(
                "item {} was auto-accepted and is not open for review",
                item.item_id
            )));
        }
        if judgment.revision != item.revision {
            return Err(TriageError::Conflict {
                item: item.item_id.to_string(),
                current: item.revision,
                submitted: judgment.revision,
            });
        }
        if self.config.require_antecedent_judgment
            && item.category.is_anaphoric()
            && !item.context.source_antecedent.is_empty()
            && judgment.antecedent_verdict.is_none()
        {
            return Err(TriageError::Validation(format!(
                "item {} is anaphoric and needs an antecedent verdict",
                item.item_id
            )));
        }
        Ok(())
    }

    /// Records a judgment: the item becomes `judged`, its revision advances,
    /// and the annotator's previous judgment (if any) is replaced.
    pub fn apply_judgment(&mut self, judgment: Judgment) -> Result<&ReviewItem, TriageError> {
        self.check_judgment(&judgment)?;
        let idx = self.index[&judgment.item_id];
        let item = &mut self.items[idx];
        item.status = ItemStatus::Judged;
        item.revision += 1;
        item.judgments.insert(judgment.annotator.clone(), judgment);
        Ok(&self.items[idx])
    }

    /// Lowest-ordered reviewable item this annotator has not judged yet.
    /// Without an annotator only `pending` items qualify.
    pub fn next_item(&self, filter: &QueueFilter) -> Option<&ReviewItem> {
        self.items.iter().find(|item| {
            let open = match &filter.annotator {
                Some(a) => item.needs_review() && !item.judged_by(a),
                None => item.status == ItemStatus::Pending,
            };
            open && filter.category.is_none_or(|c| c.matches(item.category))
                && filter.system.as_ref().is_none_or(|s| &item.item_id.system_name == s)
        })
    }

    pub fn progress(&self) -> Progress {
        let mut progress = Progress::default();
        for item in &self.items {
            progress.overall.add(item.status);
            progress
                .by_category
                .entry(item.category.code().to_owned())
                .or_default()
                .add(item.status);
            progress
                .by_system
                .entry(item.item_id.system_name.clone())
                .or_default()
                .add(item.status);
            progress.judgments += item.judgments.len();
        }
        progress
    }

    /// Snapshot lines, one item per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out.push_str(&serde_json::to_string(item).expect("review item serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(raw: &str, config: TriageConfig, path: &str) -> Result<Self, TriageError> {
        let mut items = Vec::new();
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let item: ReviewItem = serde_json::from_str(line).map_err(|e| TriageError::Corrupt {
                path: path.to_owned(),
                line: i + 1,
                message: e.to_string(),
            })?;
            items.push(item);
        }
        TriageQueue::from_items(items, config)
    }

    /// Re-applies journal entries in order.
    pub fn replay<'a, I: IntoIterator<Item = &'a Judgment>>(&mut self, entries: I) -> Result<(), TriageError> {
        for (i, j) in entries.into_iter().enumerate() {
            self.apply_judgment(j.clone()).map_err(|e| TriageError::Corrupt {
                path: JOURNAL_FILE.to_owned(),
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportCounts {
    pub total: usize,
    pub auto_accepted: usize,
    pub human_correct: usize,
    pub human_incorrect: usize,
    pub unable: usize,
    pub pending: usize,
    /// Judged items whose annotators disagreed.
    pub conflicts: usize,
    /// `(auto_accepted + human_correct) / (auto_accepted + human_correct + human_incorrect)`.
    pub accuracy: f64,
    /// Share of items that needed human review.
    pub review_burden: f64,
}

impl ReportCounts {
    fn add(&mut self, item: &ReviewItem, resolution: ConflictResolution) {
        self.total += 1;
        match item.status {
            ItemStatus::AutoAccepted => self.auto_accepted += 1,
            ItemStatus::Pending => self.pending += 1,
            ItemStatus::Judged => {
                let (verdict, conflict) = item.resolved_verdict(resolution).unwrap_or((Verdict::Unable, false));
                if conflict {
                    self.conflicts += 1;
                }
                match verdict {
                    Verdict::Correct => self.human_correct += 1,
                    Verdict::Incorrect => self.human_incorrect += 1,
                    Verdict::Unable => self.unable += 1,
                }
            }
        }
    }

    fn finish(&mut self) {
        let scored = self.auto_accepted + self.human_correct + self.human_incorrect;
        self.accuracy = if scored == 0 {
            0.0
        } else {
            (self.auto_accepted + self.human_correct) as f64 / scored as f64
        };
        self.review_burden = if self.total == 0 {
            0.0
        } else {
            (self.total - self.auto_accepted) as f64 / self.total as f64
        };
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub overall: ReportCounts,
    pub by_category: BTreeMap<String, ReportCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictEntry {
    pub item_id: ItemId,
    pub verdicts: BTreeMap<String, Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalReport {
    pub format_version: u32,
    pub conflict_resolution: ConflictResolution,
    pub overall: ReportCounts,
    pub systems: BTreeMap<String, SystemReport>,
    pub conflicts: Vec<ConflictEntry>,
}

impl FinalReport {
    /// Pretty JSON with a fixed key order and a trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "system\tcategory\ttotal\tauto_accepted\thuman_correct\thuman_incorrect\tunable\tpending\tconflicts\taccuracy\treview_burden\n",
        );
        let mut line = |sys: &str, cat: &str, c: &ReportCounts| {
            out.push_str(&format!(
                "{sys}\t{cat}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.4}\t{:.4}\n",
                c.total,
                c.auto_accepted,
                c.human_correct,
                c.human_incorrect,
                c.unable,
                c.pending,
                c.conflicts,
                c.accuracy,
                c.review_burden
            ));
        };
        for (sys, report) in &self.systems {
            for (cat, counts) in &report.by_category {
                line(sys, cat, counts);
            }
            line(sys, "*", &report.overall);
        }
        line("*", "*", &self.overall);
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<20} {:>6} {:>6} {:>6} {:>6} {:>6} {:>7} {:>9} {:>7}\n",
            "system", "total", "auto", "ok", "wrong", "unable", "pending", "accuracy", "burden"
        ));
        let mut line = |label: &str, c: &ReportCounts| {
            out.push_str(&format!(
                "{:<20} {:>6} {:>6} {:>6} {:>6} {:>6} {:>7} {:>9.3} {:>6.1}%\n",
                label,
                c.total,
                c.auto_accepted,
                c.human_correct,
                c.human_incorrect,
                c.unable,
                c.pending,
                c.accuracy,
                100.0 * c.review_burden
            ));
        };
        for (sys, report) in &self.systems {
            line(sys, &report.overall);
        }
        line("overall", &self.overall);
        if !self.conflicts.is_empty() {
            out.push_str(&format!("\n{} annotator conflict(s):\n", self.conflicts.len()));
            for c in &self.conflicts {
                let v: Vec<String> = c.verdicts.iter().map(|(a, v)| format!("{a}={v:?}")).collect();
                out.push_str(&format!("  {} {}\n", c.item_id, v.join(" ")));
            }
        }
        out
    }
}

/// Aggregates the queue into per-system, per-category counts. Pending items
/// stay out of the accuracy but count towards the review burden.
pub fn final_report(queue: &TriageQueue, resolution: ConflictResolution) -> FinalReport {
    let mut overall = ReportCounts::default();
    let mut systems: BTreeMap<String, SystemReport> = BTreeMap::new();
    let mut conflicts = Vec::new();
    for item in queue.items() {
        overall.add(item, resolution);
        let sys = systems.entry(item.item_id.system_name.clone()).or_default();
        sys.overall.add(item, resolution);
        sys.by_category
            .entry(item.category.code().to_owned())
            .or_default()
            .add(item, resolution);
        if let Some((_, true)) = item.resolved_verdict(resolution) {
            conflicts.push(ConflictEntry {
                item_id: item.item_id.clone(),
                verdicts: item
                    .judgments
                    .iter()
                    .map(|(a, j)| (a.clone(), j.pronoun_verdict))
                    .collect(),
            });
        }
    }
    overall.finish();
    for sys in systems.values_mut() {
        sys.overall.finish();
        sys.by_category.values_mut().for_each(ReportCounts::finish);
    }
    FinalReport {
        format_version: FORMAT_VERSION,
        conflict_resolution: resolution,
        overall,
        systems,
        conflicts,
    }
}

/// Append-only judgment log; every write is flushed to disk before it
/// returns.
#[derive(Debug)]
pub struct Journal {
    file: File,
    path: PathBuf,
}

impl Journal {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, TriageError> {
        let path = path.into();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Journal { file, path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, judgment: &Judgment) -> Result<(), TriageError> {
        let mut line = serde_json::to_string(judgment).map_err(|e| TriageError::Io(e.to_string()))?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Vec<Judgment>, TriageError> {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            entries.push(serde_json::from_str(&line).map_err(|e| TriageError::Corrupt {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })?);
        }
        Ok(entries)
    }
}

/// A triage workspace directory: initial queue snapshot, configuration and
/// journal. The single writer of its journal.
#[derive(Debug)]
pub struct TriageStore {
    dir: PathBuf,
    queue: TriageQueue,
    journal: Journal,
}

impl TriageStore {
    /// Writes a fresh workspace. Refuses to overwrite an existing queue.
    pub fn init(dir: &Path, queue: &TriageQueue) -> Result<(), TriageError> {
        fs::create_dir_all(dir)?;
        let queue_path = dir.join(QUEUE_FILE);
        if queue_path.exists() {
            return Err(TriageError::Validation(format!(
                "{} already exists",
                queue_path.display()
            )));
        }
        let config = serde_json::to_string_pretty(queue.config()).expect("config serializes");
        fs::write(dir.join(CONFIG_FILE), config + "\n")?;
        fs::write(&queue_path, queue.to_jsonl())?;
        File::create(dir.join(JOURNAL_FILE))?;
        Ok(())
    }

    /// Loads the snapshot and replays the journal.
    pub fn open(dir: &Path) -> Result<Self, TriageError> {
        let queue = Self::replayed_queue(dir)?;
        let journal = Journal::open(dir.join(JOURNAL_FILE))?;
        Ok(TriageStore {
            dir: dir.to_owned(),
            queue,
            journal,
        })
    }

    /// Queue state reconstructed from the snapshot and journal, read-only.
    pub fn replayed_queue(dir: &Path) -> Result<TriageQueue, TriageError> {
        let config_path = dir.join(CONFIG_FILE);
        let config: TriageConfig = match fs::read_to_string(&config_path) {
            Ok(raw) => serde_json::from_str(&raw).map_err(|e| TriageError::Corrupt {
                path: config_path.display().to_string(),
                line: e.line(),
                message: e.to_string(),
            })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => TriageConfig::default(),
            Err(e) => return Err(e.into()),
        };
        let queue_path = dir.join(QUEUE_FILE);
        let raw =
            fs::read_to_string(&queue_path).map_err(|e| TriageError::Io(format!("{}: {e}", queue_path.display())))?;
        let mut queue = TriageQueue::from_jsonl(&raw, config, &queue_path.display().to_string())?;
        let entries = Journal::read(&dir.join(JOURNAL_FILE))?;
        queue.replay(&entries)?;
        Ok(queue)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn queue(&self) -> &TriageQueue {
        &self.queue
    }

    /// Validates, journals, then applies a judgment.
    pub fn submit(&mut self, judgment: Judgment) -> Result<ReviewItem, TriageError> {
        self.queue.check_judgment(&judgment)?;
        self.journal.append(&judgment)?;
        self.queue.apply_judgment(judgment).cloned()
    }

    pub fn report(&self) -> FinalReport {
        final_report(&self.queue, self.queue.config().conflict_resolution)
    }
}
