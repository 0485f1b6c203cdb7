//! Bundled published tables and small synthetic corpora used by the
//! examples, the command-line demo and the test suites.

use crate::apt::{AptCase, AptItemResult};
use crate::corpus::{
    parse_moses_alignment, parse_tokenized_text, DisagreementLabel, HumanJudgmentRecord, PronounCategory, PronounItem,
    SystemRun, TokenizedCorpus, Verdict,
};

/// APT (with and without alignment repair, two weight settings) and human
/// accuracy per system over the 250-pronoun suite, as published.
pub const SYSTEM_SCORES_TSV: &str = include_str!("../data/system_scores.tsv");

pub const LEXICON_FR: &str = include_str!("../data/lexicon_fr.txt");

pub const EQUIVALENCE_EXAMPLE: &str = include_str!("../data/equivalence_example.tsv");

/// The eight MT systems of the published study, in table order.
pub const SYSTEMS: [&str; 8] = [
    "baseline",
    "idiap",
    "uu-tiedemann",
    "uu-hardmeier",
    "auto-postedit",
    "its2",
    "limsi",
    "nyu",
];

/// Joint counts of APT case and human verdict for one category, over the
/// items where both give a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointCounts {
    pub category: PronounCategory,
    pub case1_correct: usize,
    pub case1_incorrect: usize,
    pub case2_correct: usize,
    pub case2_incorrect: usize,
    pub case3_correct: usize,
    pub case3_incorrect: usize,
    /// V, E, I, O labels on the disagreeing items.
    pub labels: [usize; 4],
}

impl JointCounts {
    pub fn total(&self) -> usize {
        self.case1_correct
            + self.case1_incorrect
            + self.case2_correct
            + self.case2_incorrect
            + self.case3_correct
            + self.case3_incorrect
    }

    pub fn disagreements(&self) -> usize {
        self.case1_incorrect + self.case2_incorrect + self.case3_correct
    }
}

const fn joint(
    category: PronounCategory,
    case1: (usize, usize),
    case2: (usize, usize),
    case3: (usize, usize),
    labels: [usize; 4],
) -> JointCounts {
    JointCounts {
        category,
        case1_correct: case1.0,
        case1_incorrect: case1.1,
        case2_correct: case2.0,
        case2_incorrect: case2.1,
        case3_correct: case3.0,
        case3_incorrect: case3.1,
        labels,
    }
}

/// A joint distribution consistent with the published per-category
/// marginals (case counts, human correct/incorrect, disagreements) and with
/// the published disagreement-label counts.
///
/// The marginals fix, per category, how many case-1/2 items were judged
/// incorrect and how many case-3 items were judged correct; only the split
/// of the former between cases 1 and 2 is a free choice.
pub fn published_joint_counts() -> Vec<JointCounts> {
    use PronounCategory::*;
    vec![
        joint(AnaphoricIntraSubjectIt, (104, 8), (4, 9), (25, 43), [26, 9, 7, 0]),
        joint(AnaphoricIntraNonSubjectIt, (52, 0), (1, 0), (12, 13), [0, 0, 0, 12]),
        joint(AnaphoricInterSubjectIt, (83, 16), (12, 5), (35, 60), [32, 5, 19, 0]),
        joint(AnaphoricInterNonSubjectIt, (6, 12), (0, 0), (0, 7), [12, 0, 0, 0]),
        joint(AnaphoricIntraThey, (109, 6), (0, 0), (24, 62), [26, 0, 2, 2]),
        joint(AnaphoricInterThey, (96, 21), (0, 0), (22, 72), [41, 0, 2, 0]),
        joint(AnaphoricSingularThey, (38, 14), (0, 0), (34, 24), [47, 0, 0, 1]),
        joint(AnaphoricGroupItThey, (38, 7), (0, 0), (19, 16), [24, 0, 0, 2]),
        joint(EventIt, (109, 16), (23, 15), (25, 64), [0, 16, 0, 40]),
        joint(PleonasticIt, (152, 3), (38, 11), (26, 20), [0, 11, 0, 29]),
        joint(GenericYou, (105, 0), (0, 0), (61, 1), [0, 0, 0, 0]),
        joint(DeicticSingularYou, (85, 0), (0, 0), (41, 2), [0, 0, 0, 0]),
        joint(DeicticPluralYou, (81, 0), (0, 0), (6, 1), [0, 0, 0, 0]),
    ]
}

/// Suite, per-system APT results and human judgments realising the given
/// joint counts.
#[derive(Debug, Clone)]
pub struct DisagreementFixture {
    pub suite: Vec<PronounItem>,
    pub apt_results: Vec<AptItemResult>,
    pub judgments: Vec<HumanJudgmentRecord>,
}

fn apt_result(pronoun_id: &str, system: &str, case: AptCase) -> AptItemResult {
    let tok = |present: bool, t: &str| present.then(|| t.to_owned());
    let (mt, rf) = match case {
        AptCase::Incompatible => ("elle", "il"),
        AptCase::Equivalent => ("ce", "il"),
        _ => ("il", "il"),
    };
    AptItemResult {
        pronoun_id: pronoun_id.to_owned(),
        system_name: system.to_owned(),
        case,
        mt_token: tok(case.has_mt_token(), mt),
        ref_token: tok(case.has_ref_token(), rf),
        mt_index: case.has_mt_token().then_some(0),
        ref_index: case.has_ref_token().then_some(0),
        alignment_was_corrected: false,
    }
}

fn judgment(pronoun_id: &str, system: &str, verdict: Verdict, annotator: &str) -> HumanJudgmentRecord {
    HumanJudgmentRecord {
        pronoun_id: pronoun_id.to_owned(),
        system_name: system.to_owned(),
        pronoun_verdict: verdict,
        antecedent_verdict: None,
        annotator: annotator.to_owned(),
        disagreement_label: None,
    }
}

/// Lays the joint counts out over `(pronoun, system)` slots for the eight
/// published systems. Every category also gets slots that must be excluded
/// from the comparison: a case the metric cannot decide, an `unable`
/// verdict, and a pair of conflicting annotators.
pub fn disagreement_fixture(rows: &[JointCounts]) -> DisagreementFixture {
    let mut fixture = DisagreementFixture {
        suite: Vec::new(),
        apt_results: Vec::new(),
        judgments: Vec::new(),
    };
    for row in rows {
        let mut cells: Vec<(AptCase, Verdict, Option<DisagreementLabel>)> = Vec::new();
        let mut labels: Vec<DisagreementLabel> = DisagreementLabel::ALL
            .iter()
            .zip(row.labels)
            .flat_map(|(&l, n)| std::iter::repeat_n(l, n))
            .collect();
        // E labels go to case-2 disagreements first.
        labels.sort_by_key(|l| *l != DisagreementLabel::E);
        let mut take_label = || (!labels.is_empty()).then(|| labels.remove(0));
        for _ in 0..row.case2_incorrect {
            cells.push((AptCase::Equivalent, Verdict::Incorrect, take_label()));
        }
        for _ in 0..row.case1_incorrect {
            cells.push((AptCase::Identical, Verdict::Incorrect, take_label()));
        }
        for _ in 0..row.case3_correct {
            cells.push((AptCase::Incompatible, Verdict::Correct, take_label()));
        }
        cells.extend(std::iter::repeat_n(
            (AptCase::Identical, Verdict::Correct, None),
            row.case1_correct,
        ));
        cells.extend(std::iter::repeat_n(
            (AptCase::Equivalent, Verdict::Correct, None),
            row.case2_correct,
        ));
        cells.extend(std::iter::repeat_n(
            (AptCase::Incompatible, Verdict::Incorrect, None),
            row.case3_incorrect,
        ));

        const EXCLUDED: usize = 3;
        let slots = cells.len() + EXCLUDED;
        let n_pronouns = slots.div_ceil(SYSTEMS.len());
        let mut cells = cells.into_iter();
        let mut excluded = 0;
        for k in 0..n_pronouns {
            let id = format!("{}-{k}", row.category.code());
            fixture.suite.push(PronounItem {
                id: id.clone(),
                sentence_index: 0,
                token_index: 0,
                surface: "it".to_owned(),
                category: row.category,
                antecedent_head: None,
            });
            for system in SYSTEMS {
                if let Some((case, verdict, label)) = cells.next() {
                    fixture.apt_results.push(apt_result(&id, system, case));
                    let mut j = judgment(&id, system, verdict, "A");
                    j.disagreement_label = label;
                    fixture.judgments.push(j);
                    continue;
                }
                match excluded % EXCLUDED {
                    0 => {
                        fixture
                            .apt_results
                            .push(apt_result(&id, system, AptCase::NoMtTranslation));
                        fixture.judgments.push(judgment(&id, system, Verdict::Correct, "A"));
                    }
                    1 => {
                        fixture.apt_results.push(apt_result(&id, system, AptCase::Identical));
                        fixture.judgments.push(judgment(&id, system, Verdict::Unable, "A"));
                    }
                    _ => {
                        fixture.apt_results.push(apt_result(&id, system, AptCase::Incompatible));
                        fixture.judgments.push(judgment(&id, system, Verdict::Correct, "A"));
                        fixture.judgments.push(judgment(&id, system, Verdict::Incorrect, "B"));
                    }
                }
                excluded += 1;
            }
        }
    }
    fixture
}

/// Source text, reference run and one pronoun item.
#[derive(Debug, Clone)]
pub struct MiniCorpus {
    pub source: TokenizedCorpus,
    pub reference: SystemRun,
    pub mt: SystemRun,
    pub items: Vec<PronounItem>,
}

fn run(name: &str, source: &TokenizedCorpus, target: &str, alignment: &str) -> SystemRun {
    let target = parse_tokenized_text(target).expect("fixture text parses");
    let alignment = parse_moses_alignment(alignment, source, &target).expect("fixture alignment parses");
    SystemRun::new(name, source, target, alignment).expect("fixture run is consistent")
}

/// A pronoun aligned to both the complementiser `que` and `il`, on both sides.
pub fn que_fixture() -> MiniCorpus {
    let source = parse_tokenized_text("I know it is red .\n").expect("fixture text parses");
    let text = "Je sais que il est rouge .\n";
    let links = "0-0 1-1 2-2 2-3 3-4 4-5 5-6\n";
    MiniCorpus {
        reference: run("reference", &source, text, links),
        mt: run("que-system", &source, text, links),
        items: vec![PronounItem {
            id: "que-1".into(),
            sentence_index: 0,
            token_index: 2,
            surface: "it".into(),
            category: PronounCategory::AnaphoricIntraSubjectIt,
            antecedent_head: None,
        }],
        source,
    }
}

/// The bicycle example: the reference says `Il`, the MT output `Elle`
/// after translating the antecedent with a feminine noun.
pub fn bicycle_fixture() -> MiniCorpus {
    let source = parse_tokenized_text("I have a bicycle .\nIt is red .\n").expect("fixture text parses");
    let links = "0-0 1-0 2-1 3-2 4-3\n0-0 1-1 2-2 3-3\n";
    MiniCorpus {
        reference: run("reference", &source, "J'ai un vélo .\nIl est rouge .\n", links),
        mt: run(
            "bicyclette",
            &source,
            "J'ai une bicyclette .\nElle est rouge .\n",
            links,
        ),
        items: vec![PronounItem {
            id: "bike-it".into(),
            sentence_index: 1,
            token_index: 0,
            surface: "It".into(),
            category: PronounCategory::AnaphoricInterSubjectIt,
            antecedent_head: Some(vec![(0, 3)]),
        }],
        source,
    }
}
