//! Semi-automatic evaluation end to end: score, build a review queue that
//! auto-accepts identical translations, record two annotators' judgments,
//! and produce the combined report. The journal is replayed on reopen.

use std::fs;
use std::path::Path;

use pronoun_eval::apt::{score_apt, AptConfig};
use pronoun_eval::corpus::{
    parse_moses_alignment, parse_test_suite, parse_tokenized_text, SystemRun, TokenizedCorpus, Verdict,
};
use pronoun_eval::triage::{build_queue, Judgment, QueueFilter, TriageConfig, TriageStore};

fn load_run(dir: &Path, name: &str, source: &TokenizedCorpus) -> Result<SystemRun, Box<dyn std::error::Error>> {
    let target = parse_tokenized_text(&fs::read_to_string(dir.join(format!("{name}.txt")))?)?;
    let links = parse_moses_alignment(&fs::read_to_string(dir.join(format!("{name}.align")))?, source, &target)?;
    Ok(SystemRun::new(name, source, target, links)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let demo = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo");
    let source = parse_tokenized_text(&fs::read_to_string(demo.join("source.txt"))?)?;
    let suite = parse_test_suite(&fs::read_to_string(demo.join("suite.jsonl"))?, &source)?;
    let reference = load_run(&demo, "reference", &source)?;
    let runs = vec![load_run(&demo, "smt-a", &source)?, load_run(&demo, "nmt-b", &source)?];

    let config = AptConfig {
        fix_alignments: true,
        ..AptConfig::default()
    };
    let mut results = Vec::new();
    for run in &runs {
        results.extend(score_apt(&suite, &source, run, &reference, &config)?.1);
    }
    let queue = build_queue(&results, &suite, &source, &reference, &runs, &TriageConfig::default())?;

    let workspace = std::env::temp_dir().join(format!("pronoun-eval-triage-{}", std::process::id()));
    let _ = fs::remove_dir_all(&workspace);
    TriageStore::init(&workspace, &queue)?;
    let mut store = TriageStore::open(&workspace)?;
    let p = store.queue().progress().overall;
    println!(
        "{} items: {} auto-accepted, {} pending",
        p.total, p.auto_accepted, p.pending
    );

    // ann1 reviews everything; ann2 disagrees on the first item.
    for annotator in ["ann1", "ann2"] {
        let filter = QueueFilter {
            annotator: Some(annotator.to_owned()),
            ..QueueFilter::default()
        };
        while let Some(item) = store.queue().next_item(&filter).cloned() {
            let verdict = match (annotator, item.mt_token.as_deref()) {
                ("ann2", _) => Verdict::Incorrect,
                (_, Some("elles")) => Verdict::Incorrect,
                _ => Verdict::Correct,
            };
            let needs_antecedent = !item.context.source_antecedent.is_empty();
            let judged = store.submit(Judgment {
                item_id: item.item_id.clone(),
                annotator: annotator.to_owned(),
                pronoun_verdict: verdict,
                antecedent_verdict: needs_antecedent.then_some(Verdict::Correct),
                disagreement_label: None,
                revision: item.revision,
                timestamp: None,
            })?;
            println!("  {annotator} judged {} as {verdict:?}", judged.item_id);
            if annotator == "ann2" {
                break;
            }
        }
    }

    let report = store.report();
    print!("\n{}", report.to_text());

    drop(store);
    let reopened = TriageStore::open(&workspace)?;
    assert_eq!(reopened.report().to_canonical_json(), report.to_canonical_json());
    println!(
        "\nreopened {} and replayed the journal to the same report",
        workspace.display()
    );
    fs::remove_dir_all(&workspace)?;
    Ok(())
}
