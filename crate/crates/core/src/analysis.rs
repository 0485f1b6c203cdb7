//! Meta-evaluation of metric scores against human judgments.
//!
//! Correlations between score columns, system rankings, and per-category
//! disagreement between APT cases and human verdicts.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apt::{AptCase, AptItemResult};
use crate::corpus::{DisagreementLabel, HumanJudgmentRecord, PronounCategory, PronounItem, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("unknown pronoun id {0:?}")]
    UnknownPronoun(String),
    #[error("score table line {line}: {message}")]
    Table { line: usize, message: String },
}

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<(), AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(AnalysisError::TooFewPoints(xs.len()));
    }
    Ok(())
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, AnalysisError> {
    check_pair(xs, ys)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalysisError::UndefinedCorrelation("constant input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties assigned their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && xs[order[end + 1]] == xs[order[start]] {
            end += 1;
        }
        // positions start..=end share ranks start+1..=end+1
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &i in &order[start..=end] {
            ranks[i] = avg;
        }
        start = end + 1;
    }
    ranks
}

/// Spearman's rho: Pearson on average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, AnalysisError> {
    check_pair(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub pearson: f64,
    pub spearman: f64,
    pub n: usize,
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, AnalysisError> {
    Ok(CorrelationResult {
        pearson: pearson(xs, ys)?,
        spearman: spearman(xs, ys)?,
        n: xs.len(),
    })
}

/// Label used for the reference-translation row in score tables.
pub const REFERENCE_LABEL: &str = "Reference";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub label: String,
    pub values: Vec<f64>,
}

/// Labelled rows of metric scores sharing one set of columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    metrics: Vec<String>,
    rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn new(metrics: Vec<String>, rows: Vec<ScoreRow>) -> Result<Self, AnalysisError> {
        let unique: HashSet<&String> = metrics.iter().collect();
        if unique.len() != metrics.len() {
            return Err(AnalysisError::Table {
                line: 1,
                message: "duplicate column name".into(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            let line = i + 2;
            if row.values.len() != metrics.len() {
                return Err(AnalysisError::Table {
                    line,
                    message: format!("expected {} values, got {}", metrics.len(), row.values.len()),
                });
            }
            if let Some(v) = row.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(AnalysisError::Table {
                    line,
                    message: format!("value {v} outside [0, 1]"),
                });
            }
        }
        Ok(ScoreTable { metrics, rows })
    }

    /// Parses a TSV table: header `label<TAB>metric...`, one row per line.
    pub fn parse_tsv(raw: &str) -> Result<Self, AnalysisError> {
        let mut lines = raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(AnalysisError::Table {
            line: 1,
            message: "empty table".into(),
        })?;
        let metrics: Vec<String> = header.split('\t').skip(1).map(|m| m.trim().to_owned()).collect();
        if metrics.is_empty() {
            return Err(AnalysisError::Table {
                line: 1,
                message: "no metric columns".into(),
            });
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let mut fields = line.split('\t');
            let label = fields.next().unwrap_or_default().trim().to_owned();
            let values = fields
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| AnalysisError::Table {
                        line: i + 1,
                        message: format!("invalid number {f:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != metrics.len() {
                return Err(AnalysisError::Table {
                    line: i + 1,
                    message: format!("expected {} values, got {}", metrics.len(), values.len()),
                });
            }
            rows.push(ScoreRow { label, values });
        }
        ScoreTable::new(metrics, rows)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("label\t{}\n", self.metrics.join("\t"));
        for row in &self.rows {
            let values: Vec<String> = row.values.iter().map(|v| format!("{v:.3}")).collect();
            let _ = writeln!(out, "{}\t{}", row.label, values.join("\t"));
        }
        out
    }

    pub fn metrics(&self) -> &[String] {
        &self.metrics
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    pub fn column(&self, metric: &str) -> Result<Vec<f64>, AnalysisError> {
        let idx = self
            .metrics
            .iter()
            .position(|m| m == metric)
            .ok_or_else(|| AnalysisError::UnknownColumn(metric.to_owned()))?;
        Ok(self.rows.iter().map(|r| r.values[idx]).collect())
    }

    /// Copy of the table without the reference row.
    pub fn without_reference(&self) -> ScoreTable {
        ScoreTable {
            metrics: self.metrics.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| !r.label.eq_ignore_ascii_case(REFERENCE_LABEL))
                .cloned()
                .collect(),
        }
    }
}

/// Correlates two columns, optionally dropping the reference row first.
pub fn correlate(
    table: &ScoreTable,
    x: &str,
    y: &str,
    exclude_reference: bool,
) -> Result<CorrelationResult, AnalysisError> {
    let filtered;
    let table = if exclude_reference {
        filtered = table.without_reference();
        &filtered
    } else {
        table
    };
    correlation(&table.column(x)?, &table.column(y)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub rank: usize,
    pub label: String,
    pub value: f64,
    /// Shares its value with at least one other row.
    pub tied: bool,
}

/// Rows ordered by descending score; ties are ordered by label and share
/// the rank of the first of them.
pub fn rank_systems(table: &ScoreTable, metric: &str) -> Result<Vec<RankedRow>, AnalysisError> {
    let values = table.column(metric)?;
    let mut rows: Vec<(String, f64)> = table
        .rows
        .iter()
        .zip(values)
        .map(|(r, v)| (r.label.clone(), v))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut out: Vec<RankedRow> = Vec::with_capacity(rows.len());
    for (i, (label, value)) in rows.iter().enumerate() {
        let tied = rows.iter().filter(|(_, v)| v == value).count() > 1;
        let rank = match out.last() {
            Some(prev) if prev.value == *value => prev.rank,
            _ => i + 1,
        };
        out.push(RankedRow {
            rank,
            label: label.clone(),
            value: *value,
            tied,
        });
    }
    Ok(out)
}

/// Verdict for one `(pronoun, system)` pair after combining annotators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedVerdict {
    pub verdict: Verdict,
    pub conflict: bool,
    pub label: Option<DisagreementLabel>,
}

/// Keeps the last record per annotator, then combines annotators: agreeing
/// verdicts stand, conflicting ones become `unable`.
pub fn resolve_judgments(records: &[HumanJudgmentRecord]) -> BTreeMap<(String, String), ResolvedVerdict> {
    let mut latest: BTreeMap<(String, String), BTreeMap<String, &HumanJudgmentRecord>> = BTreeMap::new();
    for r in records {
        latest
            .entry((r.pronoun_id.clone(), r.system_name.clone()))
            .or_default()
            .insert(r.annotator.clone(), r);
    }
    latest
        .into_iter()
        .map(|(key, by_annotator)| {
            let verdicts: HashSet<Verdict> = by_annotator.values().map(|r| r.pronoun_verdict).collect();
            let conflict = verdicts.len() > 1;
            let verdict = if conflict {
                Verdict::Unable
            } else {
                *verdicts.iter().next().expect("at least one annotator")
            };
            let label = by_annotator.values().find_map(|r| r.disagreement_label);
            (
                key,
                ResolvedVerdict {
                    verdict,
                    conflict,
                    label,
                },
            )
        })
        .collect()
}

/// One row of the disagreement table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementRow {
    pub label: String,
    pub category: Option<PronounCategory>,
    /// Joined items by APT case 1, 2, 3.
    pub case_counts: [usize; 3],
    pub human_correct: usize,
    pub human_incorrect: usize,
    pub disagreements: usize,
    pub total: usize,
    pub percent: f64,
    /// Disagreement labels attached to disagreeing items.
    pub labels: BTreeMap<DisagreementLabel, usize>,
}

impl DisagreementRow {
    fn new(label: &str, category: Option<PronounCategory>) -> Self {
        DisagreementRow {
            label: label.to_owned(),
            category,
            case_counts: [0; 3],
            human_correct: 0,
            human_incorrect: 0,
            disagreements: 0,
            total: 0,
            percent: 0.0,
            labels: BTreeMap::new(),
        }
    }

    fn add(&mut self, case: AptCase, verdict: Verdict, label: Option<DisagreementLabel>) {
        self.case_counts[usize::from(case.number()) - 1] += 1;
        match verdict {
            Verdict::Correct => self.human_correct += 1,
            Verdict::Incorrect => self.human_incorrect += 1,
            Verdict::Unable => unreachable!("unable verdicts are not joined"),
        }
        if is_disagreement(case, verdict) {
            self.disagreements += 1;
            if let Some(l) = label {
                *self.labels.entry(l).or_default() += 1;
            }
        }
        self.total += 1;
        self.percent = 100.0 * self.disagreements as f64 / self.total as f64;
    }
}

/// APT counts cases 1 and 2 as correct and case 3 as incorrect.
fn is_disagreement(case: AptCase, verdict: Verdict) -> bool {
    matches!(
        (case, verdict),
        (AptCase::Identical | AptCase::Equivalent, Verdict::Incorrect) | (AptCase::Incompatible, Verdict::Correct)
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDisagreement {
    pub case: AptCase,
    pub joined: usize,
    pub disagreements: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementReport {
    pub rows: Vec<DisagreementRow>,
    pub overall: DisagreementRow,
    pub per_case: Vec<CaseDisagreement>,
    /// Joined pairs whose annotators disagreed and were therefore excluded.
    pub annotator_conflicts: usize,
}

/// Joins APT results with human verdicts on `(pronoun_id, system)`, keeping
/// only APT cases 1–3 with a correct/incorrect verdict.
pub fn disagreement_report(
    apt_results: &[AptItemResult],
    judgments: &[HumanJudgmentRecord],
    suite: &[PronounItem],
) -> Result<DisagreementReport, AnalysisError> {
    let categories: HashMap<&str, PronounCategory> = suite.iter().map(|i| (i.id.as_str(), i.category)).collect();
    if let Some(j) = judgments
        .iter()
        .find(|j| !categories.contains_key(j.pronoun_id.as_str()))
    {
        return Err(AnalysisError::UnknownPronoun(j.pronoun_id.clone()));
    }
    if let Some(r) = apt_results
        .iter()
        .find(|r| !categories.contains_key(r.pronoun_id.as_str()))
    {
        return Err(AnalysisError::UnknownPronoun(r.pronoun_id.clone()));
    }
    let verdicts = resolve_judgments(judgments);

    let present: HashSet<PronounCategory> = suite.iter().map(|i| i.category).collect();
    let mut rows: BTreeMap<PronounCategory, DisagreementRow> = PronounCategory::ALL
        .into_iter()
        .filter(|c| present.contains(c))
        .map(|c| (c, DisagreementRow::new(c.label(), Some(c))))
        .collect();
    let mut overall = DisagreementRow::new("Total", None);
    let mut per_case = [(0usize, 0usize); 3];
    let mut annotator_conflicts = 0;

    for result in apt_results {
        if !matches!(
            result.case,
            AptCase::Identical | AptCase::Equivalent | AptCase::Incompatible
        ) {
            continue;
        }
        let key = (result.pronoun_id.clone(), result.system_name.clone());
        let Some(resolved) = verdicts.get(&key) else {
            continue;
        };
        if resolved.conflict {
            annotator_conflicts += 1;
        }
        if resolved.verdict == Verdict::Unable {
            continue;
        }
        let category = categories[result.pronoun_id.as_str()];
        let row = rows.get_mut(&category).expect("row for every suite category");
        row.add(result.case, resolved.verdict, resolved.label);
        overall.add(result.case, resolved.verdict, resolved.label);
        let slot = &mut per_case[usize::from(result.case.number()) - 1];
        slot.0 += 1;
        if is_disagreement(result.case, resolved.verdict) {
            slot.1 += 1;
        }
    }

    let per_case = [AptCase::Identical, AptCase::Equivalent, AptCase::Incompatible]
        .into_iter()
        .zip(per_case)
        .map(|(case, (joined, disagreements))| CaseDisagreement {
            case,
            joined,
            disagreements,
            rate: if joined == 0 {
                0.0
            } else {
                disagreements as f64 / joined as f64
            },
        })
        .collect();

    Ok(DisagreementReport {
        rows: rows.into_values().collect(),
        overall,
        per_case,
        annotator_conflicts,
    })
}

impl DisagreementReport {
    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("category\tcase1\tcase2\tcase3\tcorrect\tincorrect\tdisagreements\ttotal\tpercent\n");
        for row in self.rows.iter().chain(std::iter::once(&self.overall)) {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.1}",
                row.label,
                row.case_counts[0],
                row.case_counts[1],
                row.case_counts[2],
                row.human_correct,
                row.human_incorrect,
                row.disagreements,
                row.total,
                row.percent
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>5} {:>5} {:>7} {:>7} {:>13} {:>6}",
            "category", "case1", "case2", "case3", "correct", "incorr.", "disagreement", "%"
        );
        for row in self.rows.iter().chain(std::iter::once(&self.overall)) {
            let _ = writeln!(
                out,
                "{:<16} {:>6} {:>5} {:>5} {:>7} {:>7} {:>6} / {:<4} {:>6.1}",
                row.label,
                row.case_counts[0],
                row.case_counts[1],
                row.case_counts[2],
                row.human_correct,
                row.human_incorrect,
                row.disagreements,
                row.total,
                row.percent
            );
        }
        out.push('\n');
        for c in &self.per_case {
            let _ = writeln!(
                out,
                "case {} ({}): {} of {} disagree ({:.1}%)",
                c.case,
                c.case.name(),
                c.disagreements,
                c.joined,
                100.0 * c.rate
            );
        }
        let labelled: Vec<_> = self.rows.iter().filter(|r| !r.labels.is_empty()).collect();
        if !labelled.is_empty() {
            out.push_str("\ndisagreement labels (V E I O):\n");
            for row in labelled {
                let counts: Vec<String> = DisagreementLabel::ALL
                    .iter()
                    .map(|l| row.labels.get(l).map_or("-".to_owned(), |n| n.to_string()))
                    .collect();
                let _ = writeln!(out, "{:<16} {}", row.label, counts.join(" "));
            }
        }
        if self.annotator_conflicts > 0 {
            let _ = writeln!(out, "\nannotator conflicts excluded: {}", self.annotator_conflicts);
        }
        out
    }
}
