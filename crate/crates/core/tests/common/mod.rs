//! Shared helpers for the integration tests: brute-force oracles written
//! directly from the metric definitions, a random instance generator, and
//! a writer that lays a fixture out as command-line input files.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use pronoun_eval::corpus::{
    format_test_suite, PronounCategory, PronounItem, SystemRun, TokenizedCorpus, WordAlignment,
};
use pronoun_eval::lexicon::FRENCH_PRONOUNS;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo")
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// Runs the command line in-process and captures both streams.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = pronoun_eval::cli::run(
        std::iter::once("pronoun-eval").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn is_pronoun(token: &str) -> bool {
    FRENCH_PRONOUNS.contains(&token.to_lowercase().as_str())
}

fn links_from(run: &SystemRun, sentence: usize) -> Vec<(usize, usize)> {
    run.alignment
        .sentence(sentence)
        .into_iter()
        .flatten()
        .copied()
        .collect()
}

/// Target positions a pronoun is read from, before or after repair.
pub fn oracle_side(
    item: &PronounItem,
    suite: &[PronounItem],
    source: &TokenizedCorpus,
    run: &SystemRun,
    fix: bool,
    window: usize,
) -> (Vec<usize>, bool) {
    let s = item.sentence_index;
    let p = item.token_index;
    let links = links_from(run, s);
    let target = run.target.sentence(s).unwrap();
    let mut raw: Vec<usize> = links.iter().filter(|l| l.0 == p).map(|l| l.1).collect();
    raw.sort();
    if !fix || raw.iter().any(|&t| is_pronoun(&target[t])) {
        return (raw, false);
    }

    let src_len = source.sentence(s).unwrap().len();
    let mut near: Vec<usize> = links
        .iter()
        .filter(|l| l.0 != p && l.0.abs_diff(p) <= 2)
        .map(|l| l.1)
        .collect();
    near.sort();
    let centre = if near.is_empty() {
        (p * target.len() / src_len).min(target.len() - 1)
    } else {
        near[(near.len() - 1) / 2]
    };

    let others: Vec<usize> = suite
        .iter()
        .filter(|o| o.sentence_index == s && o.token_index != p)
        .map(|o| o.token_index)
        .collect();
    let owned: BTreeSet<usize> = links.iter().filter(|l| others.contains(&l.0)).map(|l| l.1).collect();

    let mut order: Vec<usize> = (0..target.len()).collect();
    order.sort_by_key(|&t| (t.abs_diff(centre), t));
    for t in order {
        if t.abs_diff(centre) > window {
            break;
        }
        if is_pronoun(&target[t]) && !owned.contains(&t) {
            return (vec![t], true);
        }
    }
    (raw, false)
}

fn first_pronoun(run: &SystemRun, sentence: usize, positions: &[usize]) -> Option<String> {
    let target = run.target.sentence(sentence).unwrap();
    positions
        .iter()
        .map(|&t| &target[t])
        .find(|t| is_pronoun(t))
        .map(|t| t.to_lowercase())
}

pub struct OracleApt {
    pub cases: Vec<u8>,
    pub corrected: Vec<bool>,
    pub score: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn oracle_apt(
    suite: &[PronounItem],
    source: &TokenizedCorpus,
    mt: &SystemRun,
    reference: &SystemRun,
    weights: [f64; 6],
    equivalent: &[(String, String)],
    fix: bool,
    window: usize,
) -> OracleApt {
    let mut cases = Vec::new();
    let mut corrected = Vec::new();
    for item in suite {
        let (m, mc) = oracle_side(item, suite, source, mt, fix, window);
        let (r, rc) = oracle_side(item, suite, source, reference, fix, window);
        let m = first_pronoun(mt, item.sentence_index, &m);
        let r = first_pronoun(reference, item.sentence_index, &r);
        let case = match (m, r) {
            (Some(a), Some(b)) if a == b => 1,
            (Some(a), Some(b))
                if equivalent
                    .iter()
                    .any(|(x, y)| (x == &a && y == &b) || (x == &b && y == &a)) =>
            {
                2
            }
            (Some(_), Some(_)) => 3,
            (None, Some(_)) => 4,
            (Some(_), None) => 5,
            (None, None) => 6,
        };
        cases.push(case);
        corrected.push(mc || rc);
    }
    let total: f64 = cases.iter().map(|&c| weights[usize::from(c) - 1]).sum();
    OracleApt {
        score: total / cases.len() as f64,
        cases,
        corrected,
    }
}

pub struct OraclePrf {
    pub clips: Vec<usize>,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

pub fn oracle_autoprf(suite: &[PronounItem], mt: &SystemRun, reference: &SystemRun, restricted: bool) -> OraclePrf {
    let side = |run: &SystemRun, item: &PronounItem| -> Vec<String> {
        let target = run.target.sentence(item.sentence_index).unwrap();
        let mut positions: Vec<usize> = links_from(run, item.sentence_index)
            .into_iter()
            .filter(|l| l.0 == item.token_index)
            .map(|l| l.1)
            .collect();
        positions.sort();
        let tokens: Vec<String> = positions.iter().map(|&t| target[t].to_lowercase()).collect();
        if restricted {
            tokens.into_iter().filter(|t| is_pronoun(t)).take(1).collect()
        } else {
            tokens
        }
    };
    let (mut clip_sum, mut cand_sum, mut ref_sum) = (0usize, 0usize, 0usize);
    let mut clips = Vec::new();
    for item in suite {
        let c = side(mt, item);
        let mut r = side(reference, item);
        let mut clip = 0;
        for token in &c {
            if let Some(i) = r.iter().position(|x| x == token) {
                r.swap_remove(i);
                clip += 1;
            }
        }
        clips.push(clip);
        clip_sum += clip;
        cand_sum += c.len();
        ref_sum += side(reference, item).len();
    }
    let precision = if cand_sum == 0 {
        0.0
    } else {
        clip_sum as f64 / cand_sum as f64
    };
    let recall = if ref_sum == 0 {
        0.0
    } else {
        clip_sum as f64 / ref_sum as f64
    };
    let f = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    OraclePrf {
        clips,
        precision,
        recall,
        f,
    }
}

/// A random source text with a suite, a reference run and one MT run.
#[derive(Debug, Clone)]
pub struct Instance {
    pub source: TokenizedCorpus,
    pub suite: Vec<PronounItem>,
    pub reference: SystemRun,
    pub mt: SystemRun,
}

const SOURCE_WORDS: &[&str] = &["it", "they", "you", "the", "cat", "said", "is", "red", "."];
const TARGET_WORDS: &[&str] = &[
    "il", "Il", "elle", "ils", "ce", "c'", "le", "on", "que", "chat", "dit", "est", "rouge", "le_chat", ".",
];

fn random_sentences<R: Rng>(rng: &mut R, n: usize, words: &[&str]) -> Vec<Vec<String>> {
    (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=8);
            (0..len).map(|_| words.choose(rng).unwrap().to_string()).collect()
        })
        .collect()
}

fn random_run<R: Rng>(rng: &mut R, name: &str, source: &TokenizedCorpus, density: f64) -> SystemRun {
    let target = TokenizedCorpus::new(random_sentences(rng, source.len(), TARGET_WORDS)).unwrap();
    let links = source
        .sentences()
        .iter()
        .zip(target.sentences())
        .map(|(s, t)| {
            let mut set = BTreeSet::new();
            for i in 0..s.len() {
                for j in 0..t.len() {
                    if rng.gen_bool(density) {
                        set.insert((i, j));
                    }
                }
            }
            set
        })
        .collect();
    let alignment = WordAlignment::new(links, source, &target).unwrap();
    SystemRun::new(name, source, target, alignment).unwrap()
}

/// At most 5 sentences of at most 8 tokens, with 1 to 4 pronoun items.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let n = rng.gen_range(1..=5);
    let source = TokenizedCorpus::new(random_sentences(rng, n, SOURCE_WORDS)).unwrap();
    let max_items = 4;
    let density = rng.gen_range(0.05..0.35);
    let suite = random_suite(rng, &source, max_items);
    Instance {
        reference: random_run(rng, "reference", &source, density),
        mt: random_run(rng, "mt", &source, density),
        suite,
        source,
    }
}

/// Between 1 and `max_items` items at distinct random source positions.
pub fn random_suite<R: Rng>(rng: &mut R, source: &TokenizedCorpus, max_items: usize) -> Vec<PronounItem> {
    let mut positions: Vec<(usize, usize)> = source
        .sentences()
        .iter()
        .enumerate()
        .flat_map(|(s, toks)| (0..toks.len()).map(move |t| (s, t)))
        .collect();
    positions.shuffle(rng);
    let k = rng.gen_range(1..=max_items.min(positions.len()));
    positions[..k]
        .iter()
        .enumerate()
        .map(|(i, &(s, t))| PronounItem {
            id: format!("p{i}"),
            sentence_index: s,
            token_index: t,
            surface: source.token(s, t).unwrap().to_owned(),
            category: *PronounCategory::ALL.choose(rng).unwrap(),
            antecedent_head: None,
        })
        .collect()
}

/// A source text of `sentences` random sentences.
pub fn random_source<R: Rng>(rng: &mut R, sentences: usize) -> TokenizedCorpus {
    TokenizedCorpus::new(random_sentences(rng, sentences, SOURCE_WORDS)).unwrap()
}

/// A random target side and alignment for `source`.
pub fn random_system<R: Rng>(rng: &mut R, name: &str, source: &TokenizedCorpus, density: f64) -> SystemRun {
    random_run(rng, name, source, density)
}

/// Paths of an instance written out as command-line inputs.
pub struct InputFiles {
    pub source: PathBuf,
    pub mt: PathBuf,
    pub align_mt: PathBuf,
    pub reference: PathBuf,
    pub align_ref: PathBuf,
    pub suite: PathBuf,
}

impl InputFiles {
    pub fn write(
        dir: &Path,
        source: &TokenizedCorpus,
        suite: &[PronounItem],
        mt: &SystemRun,
        reference: &SystemRun,
    ) -> Self {
        let files = InputFiles {
            source: dir.join("source.txt"),
            mt: dir.join("mt.txt"),
            align_mt: dir.join("mt.align"),
            reference: dir.join("reference.txt"),
            align_ref: dir.join("reference.align"),
            suite: dir.join("suite.jsonl"),
        };
        fs::write(&files.source, source.to_text()).unwrap();
        fs::write(&files.mt, mt.target.to_text()).unwrap();
        fs::write(&files.align_mt, mt.alignment.to_moses()).unwrap();
        fs::write(&files.reference, reference.target.to_text()).unwrap();
        fs::write(&files.align_ref, reference.alignment.to_moses()).unwrap();
        fs::write(&files.suite, format_test_suite(suite)).unwrap();
        files
    }

    /// The shared `--source ... --suite` arguments.
    pub fn args(&self) -> Vec<String> {
        let p = |p: &PathBuf| p.display().to_string();
        vec![
            "--source".into(),
            p(&self.source),
            "--mt".into(),
            p(&self.mt),
            "--align-mt".into(),
            p(&self.align_mt),
            "--ref".into(),
            p(&self.reference),
            "--align-ref".into(),
            p(&self.align_ref),
            "--suite".into(),
            p(&self.suite),
        ]
    }
}

pub const DEMO_SYSTEMS: [&str; 2] = ["smt-a", "nmt-b"];

/// Scores both demo systems with alignment repair and returns the combined
/// per-item results file.
pub fn score_demo(dir: &Path) -> PathBuf {
    let demo = demo_dir();
    let d = |name: &str| demo.join(name).display().to_string();
    let mut combined = String::new();
    for system in DEMO_SYSTEMS {
        let out = dir.join(format!("score-{system}"));
        let (code, _, err) = cli(&[
            "score",
            "apt",
            "--source",
            &d("source.txt"),
            "--mt",
            &d(&format!("{system}.txt")),
            "--align-mt",
            &d(&format!("{system}.align")),
            "--ref",
            &d("reference.txt"),
            "--align-ref",
            &d("reference.align"),
            "--suite",
            &d("suite.jsonl"),
            "--fix-alignments",
            "--out",
            &out.display().to_string(),
        ]);
        assert_eq!(code, 0, "{err}");
        combined.push_str(&fs::read_to_string(out.join("items.jsonl")).unwrap());
    }
    let path = dir.join("apt.jsonl");
    fs::write(&path, combined).unwrap();
    path
}

/// A triage workspace over the demo corpus, in `dir/triage`.
pub fn init_demo_workspace(dir: &Path, extra: &[&str]) -> PathBuf {
    let apt = score_demo(dir);
    let demo = demo_dir();
    let d = |name: &str| demo.join(name).display().to_string();
    let workspace = dir.join("triage");
    let runs: Vec<String> = DEMO_SYSTEMS
        .iter()
        .map(|s| format!("{s}:{}:{}", d(&format!("{s}.txt")), d(&format!("{s}.align"))))
        .collect();
    let apt = apt.display().to_string();
    let out_dir = workspace.display().to_string();
    let (source, suite, reference, align_ref) = (
        d("source.txt"),
        d("suite.jsonl"),
        d("reference.txt"),
        d("reference.align"),
    );
    let mut args = vec![
        "triage",
        "init",
        "--apt",
        &apt,
        "--suite",
        &suite,
        "--source",
        &source,
        "--ref",
        &reference,
        "--align-ref",
        &align_ref,
        "--run",
        &runs[0],
        "--run",
        &runs[1],
        "--out-dir",
        &out_dir,
    ];
    args.extend_from_slice(extra);
    let (code, _, err) = cli(&args);
    assert_eq!(code, 0, "{err}");
    workspace
}
