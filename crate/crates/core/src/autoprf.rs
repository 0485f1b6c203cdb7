//! Precision/recall/F over clipped counts of the target tokens aligned to
//! each source pronoun, with an optional restriction to a single pronoun
//! form per side.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::apt::aligned_target_tokens;
use crate::corpus::{PronounItem, SystemRun, TokenizedCorpus};
use crate::error::{check_resolvable, ScoreError};
use crate::lexicon::PronounLexicon;

/// Overlap of two token multisets, clipping each distinct form at its
/// count on the reference side.
pub fn clipped_count<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> usize {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for c in candidate {
        counts.entry(c.as_ref()).or_default().0 += 1;
    }
    for r in reference {
        counts.entry(r.as_ref()).or_default().1 += 1;
    }
    counts.values().map(|&(c, r)| c.min(r)).sum()
}

fn leftmost_pronoun(tokens: &[String], lexicon: &PronounLexicon) -> Vec<String> {
    tokens
        .iter()
        .find(|t| lexicon.contains(t))
        .cloned()
        .into_iter()
        .collect()
}

/// Keeps only the leftmost lexicon form on each side (so each side has at
/// most one element). Inputs are in target order.
pub fn restrict_to_pronoun(
    candidate: &[String],
    reference: &[String],
    lexicon: &PronounLexicon,
) -> (Vec<String>, Vec<String>) {
    (
        leftmost_pronoun(candidate, lexicon),
        leftmost_pronoun(reference, lexicon),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutoPrfCounts {
    pub pronoun_id: String,
    /// Lowercased MT tokens aligned to the pronoun, in target order.
    pub candidate: Vec<String>,
    /// Lowercased reference tokens aligned to the pronoun, in target order.
    pub reference: Vec<String>,
    pub clip: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoPrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
    pub total_clip: usize,
    pub total_candidate: usize,
    pub total_reference: usize,
}

impl AutoPrfScore {
    /// Aggregates per-item counts. Empty denominators score 0.
    pub fn from_counts(counts: &[AutoPrfCounts]) -> Self {
        let total_clip: usize = counts.iter().map(|c| c.clip).sum();
        let total_candidate: usize = counts.iter().map(|c| c.candidate.len()).sum();
        let total_reference: usize = counts.iter().map(|c| c.reference.len()).sum();
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(total_clip, total_candidate);
        let recall = ratio(total_clip, total_reference);
        let f = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        AutoPrfScore {
            precision,
            recall,
            f,
            total_clip,
            total_candidate,
            total_reference,
        }
    }
}

fn lowercased_side(item: &PronounItem, run: &SystemRun) -> Vec<String> {
    aligned_target_tokens(item, run)
        .into_iter()
        .map(|t| t.token.to_lowercase())
        .collect()
}

/// Scores one system against the reference from the raw alignments.
pub fn score_autoprf(
    items: &[PronounItem],
    source: &TokenizedCorpus,
    mt_run: &SystemRun,
    ref_run: &SystemRun,
    restricted: bool,
    lexicon: &PronounLexicon,
) -> Result<(AutoPrfScore, Vec<AutoPrfCounts>), ScoreError> {
    check_resolvable(items, source, &[mt_run, ref_run])?;
    let counts: Vec<AutoPrfCounts> = items
        .iter()
        .map(|item| {
            let mut candidate = lowercased_side(item, mt_run);
            let mut reference = lowercased_side(item, ref_run);
            if restricted {
                (candidate, reference) = restrict_to_pronoun(&candidate, &reference, lexicon);
            }
            let clip = clipped_count(&candidate, &reference);
            AutoPrfCounts {
                pronoun_id: item.id.clone(),
                candidate,
                reference,
                clip,
            }
        })
        .collect();
    Ok((AutoPrfScore::from_counts(&counts), counts))
}
