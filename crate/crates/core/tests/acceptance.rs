//! Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
//! any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{cli, data_dir, oracle_apt, oracle_autoprf, random_instance, random_source, random_suite, random_system};
use pronoun_eval::analysis::disagreement_report;
use pronoun_eval::apt::{score_apt, AptConfig, AptWeights};
use pronoun_eval::autoprf::score_autoprf;
use pronoun_eval::cli::CorrelationOutput;
use pronoun_eval::corpus::{PronounCategory, PronounItem, SystemRun, TokenizedCorpus};
use pronoun_eval::fixtures::{bicycle_fixture, disagreement_fixture, published_joint_counts, que_fixture, SYSTEMS};
use pronoun_eval::lexicon::{EquivalenceTable, PronounLexicon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn correlate(x: &str) -> (CorrelationOutput, Duration) {
    let table = data_dir().join("system_scores.tsv").display().to_string();
    let start = Instant::now();
    let (code, out, err) = cli(&[
        "--format",
        "json",
        "correlate",
        "--table",
        &table,
        "--x",
        x,
        "--y",
        "PROTEST",
    ]);
    let elapsed = start.elapsed();
    assert_eq!(code, 0, "{err}");
    (serde_json::from_str(&out).unwrap(), elapsed)
}

fn correlation_columns(columns: &[(&str, f64, f64)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &(column, pearson, spearman) in columns {
        let (o, elapsed) = correlate(column);
        let ok = (o.result.pearson - pearson).abs() <= 0.002
            && (o.result.spearman - spearman).abs() <= 0.005
            && elapsed < Duration::from_secs(1);
        pass &= ok;
        parts.push(format!(
            "{column} pearson {:.4} (want {pearson}±0.002) spearman {:.4} (want {spearman}±0.005) in {:.1} ms",
            o.result.pearson,
            o.result.spearman,
            elapsed.as_secs_f64() * 1e3
        ));
    }
    outcome(pass, parts.join("; "))
}

fn self_score(source: &TokenizedCorpus, suite: &[PronounItem], reference: &SystemRun) -> (f64, f64, f64, f64, f64) {
    let lexicon = PronounLexicon::french();
    let mut apt = Vec::new();
    for fix in [false, true] {
        let config = AptConfig {
            fix_alignments: fix,
            ..AptConfig::default()
        };
        apt.push(score_apt(suite, source, reference, reference, &config).unwrap().0.score);
    }
    let (prf, _) = score_autoprf(suite, source, reference, reference, false, &lexicon).unwrap();
    (apt[0], apt[1], prf.precision, prf.recall, prf.f)
}

fn reference_self_score() -> Outcome {
    let demo = common::demo_dir();
    let source =
        pronoun_eval::corpus::parse_tokenized_text(&std::fs::read_to_string(demo.join("source.txt")).unwrap()).unwrap();
    let suite =
        pronoun_eval::corpus::parse_test_suite(&std::fs::read_to_string(demo.join("suite.jsonl")).unwrap(), &source)
            .unwrap();
    let target =
        pronoun_eval::corpus::parse_tokenized_text(&std::fs::read_to_string(demo.join("reference.txt")).unwrap())
            .unwrap();
    let alignment = pronoun_eval::corpus::parse_moses_alignment(
        &std::fs::read_to_string(demo.join("reference.align")).unwrap(),
        &source,
        &target,
    )
    .unwrap();
    let demo_ref = SystemRun::new("reference", &source, target, alignment).unwrap();

    let mut pass = true;
    let mut parts = Vec::new();
    let bike = bicycle_fixture();
    let que = que_fixture();
    for (name, src, suite, run) in [
        ("demo", &source, &suite, &demo_ref),
        ("bicycle", &bike.source, &bike.items, &bike.reference),
        ("que", &que.source, &que.items, &que.reference),
    ] {
        let (a, a_fix, p, r, f) = self_score(src, suite, run);
        pass &= a == 1.0 && a_fix == 1.0 && p == 1.0 && r == 1.0 && f == 1.0;
        parts.push(format!(
            "{name}: APT {a:.3}/{a_fix:.3} (raw/repaired) P={p} R={r} F={f}"
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Percentages as printed in the published per-category table.
const PRINTED_PERCENT: [(PronounCategory, f64); 13] = [
    (PronounCategory::AnaphoricIntraSubjectIt, 21.8),
    (PronounCategory::AnaphoricIntraNonSubjectIt, 15.4),
    (PronounCategory::AnaphoricInterSubjectIt, 26.5),
    (PronounCategory::AnaphoricInterNonSubjectIt, 48.0),
    (PronounCategory::AnaphoricIntraThey, 14.9),
    (PronounCategory::AnaphoricInterThey, 20.4),
    (PronounCategory::AnaphoricSingularThey, 43.6),
    (PronounCategory::AnaphoricGroupItThey, 32.5),
    (PronounCategory::EventIt, 22.2),
    (PronounCategory::PleonasticIt, 16.0),
    (PronounCategory::GenericYou, 36.5),
    (PronounCategory::DeicticSingularYou, 32.0),
    (PronounCategory::DeicticPluralYou, 6.9),
];

fn disagreement_arithmetic() -> Outcome {
    let rows = published_joint_counts();
    let fixture = disagreement_fixture(&rows);
    let report = disagreement_report(&fixture.apt_results, &fixture.judgments, &fixture.suite).unwrap();
    let o = &report.overall;
    let mut pass = o.disagreements == 473 && o.total == 1994 && (o.percent - 23.7).abs() <= 0.05;
    let mut notes = vec![format!("overall {}/{} = {:.2}%", o.disagreements, o.total, o.percent)];

    let mut printed_mismatch = Vec::new();
    for (row, (category, printed)) in report.rows.iter().zip(PRINTED_PERCENT) {
        let joint = rows.iter().find(|r| r.category == category).unwrap();
        let from_counts = 100.0 * joint.disagreements() as f64 / joint.total() as f64;
        pass &= row.category == Some(category)
            && row.disagreements == joint.disagreements()
            && row.total == joint.total()
            && (row.percent - from_counts).abs() < 1e-9;
        if (row.percent - printed).abs() > 0.05 {
            printed_mismatch.push(format!(
                "{} {}/{} = {:.2} vs printed {printed}",
                category.label(),
                row.disagreements,
                row.total,
                row.percent
            ));
        }
    }
    pass &= report.rows.len() == 13;
    for (label, d, t) in [("intra sbj it", 42, 193), ("inter nsbj it", 12, 25)] {
        let row = report.rows.iter().find(|r| r.label == label).unwrap();
        pass &= row.disagreements == d && row.total == t;
        notes.push(format!("{label} {d}/{t} = {:.1}", row.percent));
    }
    let cases: Vec<String> = report
        .per_case
        .iter()
        .map(|c| format!("case {} {:.1}%", c.case.number(), 100.0 * c.rate))
        .collect();
    notes.push(cases.join(", "));
    // The printed figure for one row is inconsistent with its own counts;
    // the counts are reproduced exactly, so only that row may differ.
    let only_known_erratum = printed_mismatch.len() <= 1
        && printed_mismatch
            .iter()
            .all(|m| m.starts_with(PronounCategory::DeicticPluralYou.label()));
    pass &= only_known_erratum;
    if !printed_mismatch.is_empty() {
        notes.push(format!("printed rounding differs: {}", printed_mismatch.join("; ")));
    }
    outcome(pass, notes.join("; "))
}

fn has_reference_pronoun(item: &PronounItem, run: &SystemRun, lexicon: &PronounLexicon) -> bool {
    pronoun_eval::apt::aligned_target_tokens(item, run)
        .iter()
        .any(|t| lexicon.contains(&t.token))
}

fn restriction_property() -> Outcome {
    let lexicon = PronounLexicon::french();
    let que = que_fixture();
    let clip = |restricted| {
        score_autoprf(&que.items, &que.source, &que.mt, &que.reference, restricted, &lexicon)
            .unwrap()
            .0
            .total_clip
    };
    let (unrestricted, restricted) = (clip(false), clip(true));
    let mut pass = unrestricted == 2 && restricted == 1;

    let mut rng = ChaCha8Rng::seed_from_u64(0x4e5);
    let (mut checked, mut drawn) = (0, 0);
    while checked < 1000 {
        drawn += 1;
        let inst = random_instance(&mut rng);
        if !inst
            .suite
            .iter()
            .all(|i| has_reference_pronoun(i, &inst.reference, &lexicon))
        {
            continue;
        }
        let (prf, counts) =
            score_autoprf(&inst.suite, &inst.source, &inst.mt, &inst.reference, true, &lexicon).unwrap();
        let (apt, _) = score_apt(
            &inst.suite,
            &inst.source,
            &inst.mt,
            &inst.reference,
            &AptConfig::default(),
        )
        .unwrap();
        pass &= counts.iter().all(|c| c.clip <= 1) && prf.recall == apt.score;
        checked += 1;
    }
    outcome(
        pass,
        format!(
            "que Σclip {unrestricted} unrestricted vs {restricted} restricted; {checked} random instances ({drawn} drawn) with restricted clip in {{0,1}} and recall == APT-A without repair"
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e9);
    let lexicon = PronounLexicon::french();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let inst = random_instance(&mut rng);
        let weights: [f64; 6] = std::array::from_fn(|_| f64::from(rng.gen_range(0..=4u8)) / 4.0);
        let pairs = if rng.gen_bool(0.5) {
            vec![("il".to_string(), "ce".to_string())]
        } else {
            vec![]
        };
        let fix = rng.gen_bool(0.5);
        let restricted = rng.gen_bool(0.5);
        let config = AptConfig {
            weights: AptWeights::new(weights).unwrap(),
            fix_alignments: fix,
            equivalence: EquivalenceTable::from_pairs(pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))).unwrap(),
            ..AptConfig::default()
        };
        let (score, results) = score_apt(&inst.suite, &inst.source, &inst.mt, &inst.reference, &config).unwrap();
        let want = oracle_apt(
            &inst.suite,
            &inst.source,
            &inst.mt,
            &inst.reference,
            weights,
            &pairs,
            fix,
            config.window,
        );
        let cases: Vec<u8> = results.iter().map(|r| r.case.number()).collect();
        let (prf, counts) = score_autoprf(
            &inst.suite,
            &inst.source,
            &inst.mt,
            &inst.reference,
            restricted,
            &lexicon,
        )
        .unwrap();
        let want_prf = oracle_autoprf(&inst.suite, &inst.mt, &inst.reference, restricted);
        let clips: Vec<usize> = counts.iter().map(|c| c.clip).collect();
        let same = cases == want.cases
            && score.score == want.score
            && clips == want_prf.clips
            && (prf.precision, prf.recall, prf.f) == (want_prf.precision, want_prf.recall, want_prf.f);
        if !same {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("1000 instances, {mismatches} mismatches against the brute-force recomputation"),
    )
}

fn ablation_locality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xab1);
    let lexicon = PronounLexicon::french();
    let source = random_source(&mut rng, 60);
    let suite = random_suite(&mut rng, &source, 40);
    let reference = random_system(&mut rng, "reference", &source, 0.3);
    let mut pass = true;
    let mut counts = Vec::new();
    for system in SYSTEMS {
        let density = rng.gen_range(0.15..0.35);
        let mt = random_system(&mut rng, system, &source, density);
        let score = |fix| {
            let config = AptConfig {
                fix_alignments: fix,
                ..AptConfig::default()
            };
            score_apt(&suite, &source, &mt, &reference, &config).unwrap().1
        };
        let (raw, repaired) = (score(false), score(true));
        let mut changed = 0;
        for ((item, a), b) in suite.iter().zip(&raw).zip(&repaired) {
            if a.case != b.case {
                changed += 1;
                let lacks_pronoun =
                    !has_reference_pronoun(item, &mt, &lexicon) || !has_reference_pronoun(item, &reference, &lexicon);
                pass &= lacks_pronoun;
            }
        }
        counts.push(format!("{system} {changed}"));
    }
    outcome(
        pass,
        format!("{} items, case changes per system: {}", suite.len(), counts.join(", ")),
    )
}

fn main() {
    let criteria: Vec<(&str, Outcome)> = vec![
        (
            "correlation reproduction (with alignment repair)",
            correlation_columns(&[("APT-A+", 0.907, 0.778), ("APT-B+", 0.913, 0.803)]),
        ),
        (
            "correlation reproduction (without alignment repair)",
            correlation_columns(&[("APT-A-", 0.913, 0.778), ("APT-B-", 0.919, 0.803)]),
        ),
        ("reference self-score", reference_self_score()),
        ("disagreement arithmetic", disagreement_arithmetic()),
        ("restriction property", restriction_property()),
        ("oracle equivalence", oracle_equivalence()),
        ("ablation locality", ablation_locality()),
    ];
    let mut failed = 0;
    for (name, o) in &criteria {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
