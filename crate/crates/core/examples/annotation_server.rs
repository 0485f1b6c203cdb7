//! Serves a review workspace over HTTP for the annotator interface.
//!
//! ```text
//! cargo run --example annotation_server -- [ADDR] [UI_DIR]
//! curl 'http://127.0.0.1:7878/api/queue/next?annotator=me'
//! curl -X POST -H 'content-type: application/json' \
//!      -d '{"annotator":"me","pronoun_verdict":"correct","antecedent_verdict":"correct","revision":0}' \
//!      'http://127.0.0.1:7878/api/items/smt-a:p1/judgment'
//! curl http://127.0.0.1:7878/api/report
//! ```
//!
//! The workspace is built from the demo corpus in a temporary directory.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use pronoun_eval::apt::{score_apt, AptConfig};
use pronoun_eval::corpus::{parse_moses_alignment, parse_test_suite, parse_tokenized_text, SystemRun, TokenizedCorpus};
use pronoun_eval::service::{serve, DEFAULT_ADDR};
use pronoun_eval::triage::{build_queue, TriageConfig, TriageStore};

fn load_run(dir: &Path, name: &str, source: &TokenizedCorpus) -> Result<SystemRun, Box<dyn std::error::Error>> {
    let target = parse_tokenized_text(&fs::read_to_string(dir.join(format!("{name}.txt")))?)?;
    let links = parse_moses_alignment(&fs::read_to_string(dir.join(format!("{name}.align")))?, source, &target)?;
    Ok(SystemRun::new(name, source, target, links)?)
}

fn demo_workspace(dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
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
    TriageStore::init(dir, &queue)?;
    Ok(())
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let addr: SocketAddr = args.next().as_deref().unwrap_or(DEFAULT_ADDR).parse()?;
    let ui = args.next().map(PathBuf::from);

    let workspace = std::env::temp_dir().join(format!("pronoun-eval-server-{}", std::process::id()));
    demo_workspace(&workspace)?;
    println!("workspace {}", workspace.display());
    println!("press Ctrl-C to stop");
    serve(TriageStore::open(&workspace)?, addr, ui).await?;
    Ok(())
}
