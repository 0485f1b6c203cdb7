//! Scores the two demo systems with APT under both weightings, with and
//! without alignment repair, then lists the per-item cases.
//!
//! ```text
//! cargo run --example apt_scoring
//! ```

use std::fs;
use std::path::Path;

use pronoun_eval::apt::{score_apt, AptConfig, AptWeights};
use pronoun_eval::corpus::{parse_moses_alignment, parse_test_suite, parse_tokenized_text, SystemRun, TokenizedCorpus};
use pronoun_eval::fixtures::EQUIVALENCE_EXAMPLE;
use pronoun_eval::lexicon::parse_equivalence;

fn load_run(dir: &Path, name: &str, source: &TokenizedCorpus) -> Result<SystemRun, Box<dyn std::error::Error>> {
    let target = parse_tokenized_text(&fs::read_to_string(dir.join(format!("{name}.txt")))?)?;
    let links = parse_moses_alignment(&fs::read_to_string(dir.join(format!("{name}.align")))?, source, &target)?;
    Ok(SystemRun::new(name, source, target, links)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo");
    let source = parse_tokenized_text(&fs::read_to_string(dir.join("source.txt"))?)?;
    let suite = parse_test_suite(&fs::read_to_string(dir.join("suite.jsonl"))?, &source)?;
    let reference = load_run(&dir, "reference", &source)?;
    let equivalence = parse_equivalence(EQUIVALENCE_EXAMPLE)?;

    println!(
        "{:<8} {:>7} {:>7} {:>7} {:>7}",
        "system", "APT-A+", "APT-A-", "APT-B+", "APT-B-"
    );
    for name in ["smt-a", "nmt-b"] {
        let run = load_run(&dir, name, &source)?;
        let mut cells = Vec::new();
        for weights in [AptWeights::apt_a(), AptWeights::apt_b()] {
            for fix_alignments in [true, false] {
                let config = AptConfig {
                    weights,
                    fix_alignments,
                    equivalence: equivalence.clone(),
                    ..AptConfig::default()
                };
                let (score, _) = score_apt(&suite, &source, &run, &reference, &config)?;
                cells.push(format!("{:>7.3}", score.score));
            }
        }
        println!("{name:<8} {}", cells.join(" "));
    }

    let run = load_run(&dir, "smt-a", &source)?;
    let config = AptConfig {
        fix_alignments: true,
        equivalence,
        ..AptConfig::default()
    };
    let (_, items) = score_apt(&suite, &source, &run, &reference, &config)?;
    println!("\nsmt-a, per item (repaired alignments):");
    for (item, r) in suite.iter().zip(&items) {
        println!(
            "  {:<3} {:<14} case {} {:<14} mt={:<6} ref={:<6}{}",
            r.pronoun_id,
            item.category.label(),
            r.case.number(),
            format!("({})", r.case.name()),
            r.mt_token.as_deref().unwrap_or("-"),
            r.ref_token.as_deref().unwrap_or("-"),
            if r.alignment_was_corrected { "  [repaired]" } else { "" }
        );
    }
    Ok(())
}
