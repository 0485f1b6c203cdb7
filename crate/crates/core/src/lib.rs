//! Reference-based evaluation of pronoun translation.
//!
//! * [`apt`] and [`autoprf`] score an MT system's pronoun translations
//!   against a reference through source-target word alignments.
//! * [`analysis`] compares metric scores with human judgments: Pearson and
//!   Spearman correlation, system rankings, and per-category disagreement.
//! * [`triage`] accepts high-precision metric decisions automatically and
//!   queues the rest for annotators; [`service`] exposes that queue over HTTP.
//! * [`corpus`] and [`lexicon`] hold the input formats.
//!
//! Runnable walkthroughs for each part live in the crate's `examples/`
//! directory; the `pronoun-eval` binary wraps the same functions.

pub mod analysis;
pub mod apt;
pub mod autoprf;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod fixtures;
pub mod lexicon;
pub mod service;
pub mod triage;

pub use error::{Error, ScoreError};
