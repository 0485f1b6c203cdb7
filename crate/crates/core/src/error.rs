use thiserror::Error;

use crate::corpus::{PronounItem, SystemRun, TokenizedCorpus};

/// Failures shared by the APT and AutoPRF scorers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("no pronouns to score")]
    NoPronouns,
    #[error("items reference positions missing from the corpus: {}", .0.join(", "))]
    UnresolvedItems(Vec<String>),
    #[error("run {system} has {found} sentences, source has {expected}")]
    RunLengthMismatch {
        system: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Checks that every item resolves in the source and that each run is
/// sentence-parallel with it.
pub(crate) fn check_resolvable(
    items: &[PronounItem],
    source: &TokenizedCorpus,
    runs: &[&SystemRun],
) -> Result<(), ScoreError> {
    if items.is_empty() {
        return Err(ScoreError::NoPronouns);
    }
    for run in runs {
        if run.target.len() != source.len() || run.alignment.len() != source.len() {
            return Err(ScoreError::RunLengthMismatch {
                system: run.system_name.clone(),
                expected: source.len(),
                found: run.target.len().min(run.alignment.len()),
            });
        }
    }
    let unresolved: Vec<String> = items
        .iter()
        .filter(|item| source.token(item.sentence_index, item.token_index).is_none())
        .map(|item| item.id.clone())
        .collect();
    if unresolved.is_empty() {
        Ok(())
    } else {
        Err(ScoreError::UnresolvedItems(unresolved))
    }
}

/// Crate-wide error used at the command-line and service boundaries.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] crate::corpus::ParseError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error(transparent)]
    Triage(#[from] crate::triage::TriageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
