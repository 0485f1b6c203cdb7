//! Accuracy of Pronoun Translation.
//!
//! Each source pronoun is reduced to one candidate translation on the MT side
//! and one on the reference side (the leftmost aligned lexicon form), the
//! pair is classified into one of six cases, and the score is the weighted
//! proportion of cases.
//!
//! An optional alignment repair step looks for a nearby pronoun in the target
//! sentence when the pronoun's own links hit no lexicon form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{PronounItem, SystemRun, TokenizedCorpus};
use crate::error::{check_resolvable, ScoreError};
use crate::lexicon::{EquivalenceTable, PronounLexicon};

pub const DEFAULT_WINDOW: usize = 3;

/// Source positions on each side of the pronoun used to project it into
/// the target sentence.
const PROJECTION_NEIGHBOURS: usize = 2;

/// Outcome of comparing the MT and reference translations of one pronoun.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AptCase {
    Identical = 1,
    Equivalent = 2,
    Incompatible = 3,
    NoMtTranslation = 4,
    NoReferenceTranslation = 5,
    Neither = 6,
}

impl AptCase {
    pub const ALL: [AptCase; 6] = [
        AptCase::Identical,
        AptCase::Equivalent,
        AptCase::Incompatible,
        AptCase::NoMtTranslation,
        AptCase::NoReferenceTranslation,
        AptCase::Neither,
    ];

    /// 1-based case number.
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<AptCase> {
        AptCase::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn has_mt_token(self) -> bool {
        matches!(
            self,
            AptCase::Identical | AptCase::Equivalent | AptCase::Incompatible | AptCase::NoReferenceTranslation
        )
    }

    pub fn has_ref_token(self) -> bool {
        matches!(
            self,
            AptCase::Identical | AptCase::Equivalent | AptCase::Incompatible | AptCase::NoMtTranslation
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            AptCase::Identical => "identical",
            AptCase::Equivalent => "equivalent",
            AptCase::Incompatible => "incompatible",
            AptCase::NoMtTranslation => "no-mt-translation",
            AptCase::NoReferenceTranslation => "no-reference-translation",
            AptCase::Neither => "neither",
        }
    }
}

impl fmt::Display for AptCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl Serialize for AptCase {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for AptCase {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let n = u8::deserialize(deserializer)?;
        AptCase::from_number(n).ok_or_else(|| serde::de::Error::custom(format!("APT case must be 1-6, got {n}")))
    }
}

/// One weight in `[0, 1]` per case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AptWeights([f64; 6]);

impl AptWeights {
    pub fn new(weights: [f64; 6]) -> Result<Self, ScoreError> {
        for (i, w) in weights.iter().enumerate() {
            if !(0.0..=1.0).contains(w) {
                return Err(ScoreError::Config(format!("weight w{} = {w} is outside [0, 1]", i + 1)));
            }
        }
        Ok(AptWeights(weights))
    }

    /// Full credit for identical translations only.
    pub fn apt_a() -> Self {
        AptWeights([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    }

    /// Identical 1, equivalent 0.5, everything else 0.
    pub fn apt_b() -> Self {
        AptWeights([1.0, 0.5, 0.0, 0.0, 0.0, 0.0])
    }

    pub fn weight(&self, case: AptCase) -> f64 {
        self.0[usize::from(case.number()) - 1]
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.0
    }
}

impl Default for AptWeights {
    fn default() -> Self {
        AptWeights::apt_a()
    }
}

impl TryFrom<Vec<f64>> for AptWeights {
    type Error = ScoreError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        let arr: [f64; 6] = v
            .try_into()
            .map_err(|v: Vec<f64>| ScoreError::Config(format!("expected 6 weights, got {}", v.len())))?;
        AptWeights::new(arr)
    }
}

impl From<AptWeights> for Vec<f64> {
    fn from(w: AptWeights) -> Self {
        w.0.to_vec()
    }
}

impl std::str::FromStr for AptWeights {
    type Err = ScoreError;

    /// Parses `w1,w2,w3,w4,w5,w6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values = s
            .split(',')
            .map(|w| {
                w.trim()
                    .parse::<f64>()
                    .map_err(|_| ScoreError::Config(format!("invalid weight {w:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        AptWeights::try_from(values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AptConfig {
    pub weights: AptWeights,
    pub fix_alignments: bool,
    pub window: usize,
    pub equivalence: EquivalenceTable,
    pub lexicon: PronounLexicon,
}

impl Default for AptConfig {
    fn default() -> Self {
        AptConfig {
            weights: AptWeights::apt_a(),
            fix_alignments: false,
            window: DEFAULT_WINDOW,
            equivalence: EquivalenceTable::empty(),
            lexicon: PronounLexicon::french(),
        }
    }
}

/// A target token together with its position in the target sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetToken {
    pub index: usize,
    pub token: String,
}

impl TargetToken {
    pub fn new(index: usize, token: impl Into<String>) -> Self {
        TargetToken {
            index,
            token: token.into(),
        }
    }
}

/// Target tokens linked to the pronoun, in target order.
pub fn aligned_target_tokens(item: &PronounItem, run: &SystemRun) -> Vec<TargetToken> {
    let Some(sentence) = run.target.sentence(item.sentence_index) else {
        return Vec::new();
    };
    run.alignment
        .targets_of(item.sentence_index, item.token_index)
        .into_iter()
        .filter_map(|t| sentence.get(t).map(|tok| TargetToken::new(t, tok.clone())))
        .collect()
}

/// Result of [`correct_alignment`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectedAlignment {
    pub tokens: Vec<TargetToken>,
    pub corrected: bool,
}

/// Where the pronoun is expected to land in the target sentence: the lower
/// median of the targets linked to its neighbours, or its relative position
/// when none of them is aligned.
fn projected_position(item: &PronounItem, source: &TokenizedCorpus, run: &SystemRun, tgt_len: usize) -> usize {
    let src_len = source.sentence(item.sentence_index).map_or(1, <[String]>::len);
    let s = item.token_index;
    let lo = s.saturating_sub(PROJECTION_NEIGHBOURS);
    let hi = (s + PROJECTION_NEIGHBOURS).min(src_len.saturating_sub(1));
    let mut targets: Vec<usize> = run
        .alignment
        .sentence(item.sentence_index)
        .into_iter()
        .flatten()
        .filter(|&&(src, _)| src != s && (lo..=hi).contains(&src))
        .map(|&(_, t)| t)
        .collect();
    if targets.is_empty() {
        (s * tgt_len / src_len.max(1)).min(tgt_len.saturating_sub(1))
    } else {
        targets.sort_unstable();
        targets[(targets.len() - 1) / 2]
    }
}

/// Repairs a pronoun alignment that hits no lexicon form.
///
/// Searches `±window` around the projected target position for the nearest
/// lexicon token (leftmost on ties) that is not linked to another suite
/// pronoun in the same sentence. Returns the raw links unchanged when they
/// already contain a pronoun or when nothing suitable is found.
pub fn correct_alignment(
    item: &PronounItem,
    suite: &[PronounItem],
    source: &TokenizedCorpus,
    run: &SystemRun,
    lexicon: &PronounLexicon,
    window: usize,
) -> CorrectedAlignment {
    let raw = aligned_target_tokens(item, run);
    let unchanged = |tokens| CorrectedAlignment {
        tokens,
        corrected: false,
    };
    if raw.iter().any(|t| lexicon.contains(&t.token)) {
        return unchanged(raw);
    }
    let Some(target) = run.target.sentence(item.sentence_index) else {
        return unchanged(raw);
    };
    let projected = projected_position(item, source, run, target.len());

    let taken: Vec<usize> = suite
        .iter()
        .filter(|other| other.sentence_index == item.sentence_index && other.token_index != item.token_index)
        .flat_map(|other| run.alignment.targets_of(other.sentence_index, other.token_index))
        .collect();
    let eligible = |p: usize| lexicon.contains(&target[p]) && !taken.contains(&p);

    for distance in 0..=window {
        let left = projected.checked_sub(distance);
        let right = (distance > 0).then_some(projected + distance);
        for p in [left, right].into_iter().flatten() {
            if p < target.len() && eligible(p) {
                return CorrectedAlignment {
                    tokens: vec![TargetToken::new(p, target[p].clone())],
                    corrected: true,
                };
            }
        }
    }
    unchanged(raw)
}

/// Lowercased leftmost lexicon form among `tokens`.
pub fn select_pronoun_translation(tokens: &[TargetToken], lexicon: &PronounLexicon) -> Option<TargetToken> {
    tokens
        .iter()
        .filter(|t| lexicon.contains(&t.token))
        .min_by_key(|t| t.index)
        .map(|t| TargetToken::new(t.index, t.token.to_lowercase()))
}

/// Six-way comparison of lowercased candidate translations.
pub fn classify(mt: Option<&str>, reference: Option<&str>, equivalence: &EquivalenceTable) -> AptCase {
    match (mt, reference) {
        (Some(m), Some(r)) if m == r => AptCase::Identical,
        (Some(m), Some(r)) if equivalence.contains(m, r) => AptCase::Equivalent,
        (Some(_), Some(_)) => AptCase::Incompatible,
        (None, Some(_)) => AptCase::NoMtTranslation,
        (Some(_), None) => AptCase::NoReferenceTranslation,
        (None, None) => AptCase::Neither,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AptItemResult {
    pub pronoun_id: String,
    pub system_name: String,
    pub case: AptCase,
    pub mt_token: Option<String>,
    pub ref_token: Option<String>,
    pub mt_index: Option<usize>,
    pub ref_index: Option<usize>,
    pub alignment_was_corrected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AptScore {
    pub score: f64,
    pub n_items: usize,
    pub case_counts: [usize; 6],
}

impl AptScore {
    pub fn from_cases<I: IntoIterator<Item = AptCase>>(cases: I, weights: &AptWeights) -> Self {
        let mut case_counts = [0usize; 6];
        for case in cases {
            case_counts[usize::from(case.number()) - 1] += 1;
        }
        let n_items: usize = case_counts.iter().sum();
        let weighted: f64 = AptCase::ALL
            .iter()
            .map(|&c| weights.weight(c) * case_counts[usize::from(c.number()) - 1] as f64)
            .sum();
        let score = if n_items == 0 { 0.0 } else { weighted / n_items as f64 };
        AptScore {
            score,
            n_items,
            case_counts,
        }
    }

    pub fn count(&self, case: AptCase) -> usize {
        self.case_counts[usize::from(case.number()) - 1]
    }
}

fn side_tokens(
    item: &PronounItem,
    suite: &[PronounItem],
    source: &TokenizedCorpus,
    run: &SystemRun,
    config: &AptConfig,
) -> CorrectedAlignment {
    if config.fix_alignments {
        correct_alignment(item, suite, source, run, &config.lexicon, config.window)
    } else {
        CorrectedAlignment {
            tokens: aligned_target_tokens(item, run),
            corrected: false,
        }
    }
}

/// Scores one system against the reference.
pub fn score_apt(
    items: &[PronounItem],
    source: &TokenizedCorpus,
    mt_run: &SystemRun,
    ref_run: &SystemRun,
    config: &AptConfig,
) -> Result<(AptScore, Vec<AptItemResult>), ScoreError> {
    check_resolvable(items, source, &[mt_run, ref_run])?;
    let results: Vec<AptItemResult> = items
        .iter()
        .map(|item| {
            let mt = side_tokens(item, items, source, mt_run, config);
            let rf = side_tokens(item, items, source, ref_run, config);
            let mt_sel = select_pronoun_translation(&mt.tokens, &config.lexicon);
            let ref_sel = select_pronoun_translation(&rf.tokens, &config.lexicon);
            let case = classify(
                mt_sel.as_ref().map(|t| t.token.as_str()),
                ref_sel.as_ref().map(|t| t.token.as_str()),
                &config.equivalence,
            );
            AptItemResult {
                pronoun_id: item.id.clone(),
                system_name: mt_run.system_name.clone(),
                case,
                mt_index: mt_sel.as_ref().map(|t| t.index),
                ref_index: ref_sel.as_ref().map(|t| t.index),
                mt_token: mt_sel.map(|t| t.token),
                ref_token: ref_sel.map(|t| t.token),
                alignment_was_corrected: mt.corrected || rf.corrected,
            }
        })
        .collect();
    let score = AptScore::from_cases(results.iter().map(|r| r.case), &config.weights);
    Ok((score, results))
}

/// Parses per-item result JSON lines.
pub fn parse_apt_results(raw: &str) -> Result<Vec<AptItemResult>, crate::corpus::ParseError> {
    let mut out = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: AptItemResult =
            serde_json::from_str(line).map_err(|e| crate::corpus::ParseError::at(i + 1, e.to_string()))?;
        if r.mt_token.is_some() != r.case.has_mt_token() || r.ref_token.is_some() != r.case.has_ref_token() {
            return Err(crate::corpus::ParseError::at(
                i + 1,
                format!("tokens inconsistent with case {} for {}", r.case, r.pronoun_id),
            ));
        }
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_moses_alignment, parse_tokenized_text, PronounCategory};
    use proptest::prelude::*;

    fn item(id: &str, s: usize, t: usize, surface: &str) -> PronounItem {
        PronounItem {
            id: id.into(),
            sentence_index: s,
            token_index: t,
            surface: surface.into(),
            category: PronounCategory::AnaphoricInterSubjectIt,
            antecedent_head: None,
        }
    }

    fn run(source: &TokenizedCorpus, target: &str, align: &str) -> SystemRun {
        let tgt = parse_tokenized_text(target).unwrap();
        let al = parse_moses_alignment(align, source, &tgt).unwrap();
        SystemRun::new("sys", source, tgt, al).unwrap()
    }

    fn tokens(list: &[(usize, &str)]) -> Vec<TargetToken> {
        list.iter().map(|&(i, t)| TargetToken::new(i, t)).collect()
    }

    #[test]
    fn aligned_tokens_follow_links() {
        let src = parse_tokenized_text("It is red .").unwrap();
        let it = item("p", 0, 0, "It");
        assert_eq!(
            aligned_target_tokens(&it, &run(&src, "Il est rouge .", "0-0")),
            tokens(&[(0, "Il")])
        );
        assert!(aligned_target_tokens(&it, &run(&src, "Il est rouge .", "")).is_empty());
        assert_eq!(
            aligned_target_tokens(&it, &run(&src, "Il est rouge .", "0-1 0-0")),
            tokens(&[(0, "Il"), (1, "est")])
        );
    }

    #[test]
    fn correction_short_circuits_on_lexicon_hit() {
        let src = parse_tokenized_text("It is red .").unwrap();
        let it = item("p", 0, 0, "It");
        let r = run(&src, "rouge elle est .", "0-1 1-2");
        let out = correct_alignment(&it, std::slice::from_ref(&it), &src, &r, &PronounLexicon::french(), 3);
        assert_eq!(out.tokens, tokens(&[(1, "elle")]));
        assert!(!out.corrected);
    }

    #[test]
    fn correction_finds_unaligned_pronoun() {
        // Hand trace: "It" (src 0) is unaligned. Neighbours 1 and 2 link to
        // targets 1 and 2, lower median 1. Window 3 around 1: distance 0 -> "est"
        // (not a pronoun); distance 1 -> left 0 "Elle" is a pronoun. Picked.
        let src = parse_tokenized_text("It is red .").unwrap();
        let it = item("p", 0, 0, "It");
        let r = run(&src, "Elle est rouge .", "1-1 2-2 3-3");
        let out = correct_alignment(&it, std::slice::from_ref(&it), &src, &r, &PronounLexicon::french(), 3);
        assert_eq!(out.tokens, tokens(&[(0, "Elle")]));
        assert!(out.corrected);
    }

    #[test]
    fn correction_falls_back_when_nothing_in_window() {
        let src = parse_tokenized_text("He said that it works .").unwrap();
        let it = item("p", 0, 3, "it");
        let r = run(&src, "Il a dit que marche bien .", "0-0 1-1 1-2 2-3 3-3 4-4 5-6");
        let lex = PronounLexicon::french();
        // Neighbour links project to 3 ("que"); nothing in 1..=5 is a
        // pronoun, and "Il" at 0 is out of reach and owned by "He" anyway.
        let he = item("h", 0, 0, "He");
        let out = correct_alignment(&it, &[he.clone(), it.clone()], &src, &r, &lex, 2);
        assert_eq!(out.tokens, tokens(&[(3, "que")]));
        assert!(!out.corrected);
    }

    #[test]
    fn correction_skips_tokens_owned_by_other_suite_pronouns() {
        let src = parse_tokenized_text("It said it .").unwrap();
        let first = item("a", 0, 0, "It");
        let second = item("b", 0, 2, "it");
        // Second "it" unaligned; only nearby pronoun "il" belongs to the first.
        let r = run(&src, "il a dit .", "0-0 1-1 1-2 3-3");
        let lex = PronounLexicon::french();
        let suite = [first.clone(), second.clone()];
        let out = correct_alignment(&second, &suite, &src, &r, &lex, 3);
        assert!(!out.corrected);
        assert!(out.tokens.is_empty());
        // Without the other suite pronoun the same token is taken.
        let out = correct_alignment(&second, std::slice::from_ref(&second), &src, &r, &lex, 3);
        assert_eq!(out.tokens, tokens(&[(0, "il")]));
    }

    #[test]
    fn correction_uses_relative_position_without_neighbour_links() {
        let src = parse_tokenized_text("a b c it").unwrap();
        let it = item("p", 0, 3, "it");
        let r = run(&src, "w x y z elle v u t", "");
        // 3 * 8 / 4 = 6; nearest pronoun within 3 is "elle" at 4.
        let out = correct_alignment(&it, std::slice::from_ref(&it), &src, &r, &PronounLexicon::french(), 3);
        assert_eq!(out.tokens, tokens(&[(4, "elle")]));
        let out = correct_alignment(&it, std::slice::from_ref(&it), &src, &r, &PronounLexicon::french(), 1);
        assert!(!out.corrected);
    }

    #[test]
    fn selects_leftmost_lexicon_token() {
        let lex = PronounLexicon::french();
        assert_eq!(
            select_pronoun_translation(&tokens(&[(0, "Il"), (1, "que")]), &lex).map(|t| t.token),
            Some("il".to_owned())
        );
        assert_eq!(select_pronoun_translation(&tokens(&[(0, "que")]), &lex), None);
        assert_eq!(select_pronoun_translation(&[], &lex), None);
        assert_eq!(
            select_pronoun_translation(&tokens(&[(3, "elle"), (1, "il")]), &lex).map(|t| t.index),
            Some(1)
        );
    }

    #[test]
    fn classifies_all_six_cases() {
        let empty = EquivalenceTable::empty();
        let eq = EquivalenceTable::from_pairs([("il", "ce")]).unwrap();
        assert_eq!(classify(Some("il"), Some("il"), &empty), AptCase::Identical);
        assert_eq!(classify(Some("il"), Some("ce"), &eq), AptCase::Equivalent);
        assert_eq!(classify(Some("elle"), Some("il"), &empty), AptCase::Incompatible);
        assert_eq!(classify(None, Some("il"), &empty), AptCase::NoMtTranslation);
        assert_eq!(classify(Some("il"), None, &empty), AptCase::NoReferenceTranslation);
        assert_eq!(classify(None, None, &empty), AptCase::Neither);
    }

    #[test]
    fn aggregates_weighted_cases() {
        use AptCase::*;
        let cases = [Identical, Identical, Equivalent, Incompatible];
        let b = AptScore::from_cases(cases, &AptWeights::apt_b());
        assert!((b.score - 0.625).abs() < 1e-12);
        let a = AptScore::from_cases(cases, &AptWeights::apt_a());
        assert!((a.score - 0.5).abs() < 1e-12);
        assert_eq!(a.case_counts, [2, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn weights_parse_and_validate() {
        let w: AptWeights = "1,0.5,0,0,0,0".parse().unwrap();
        assert_eq!(w, AptWeights::apt_b());
        assert!("1,0.5,0,0,0".parse::<AptWeights>().is_err());
        assert!("1,1.5,0,0,0,0".parse::<AptWeights>().is_err());
        assert!("1,x,0,0,0,0".parse::<AptWeights>().is_err());
        let json = serde_json::to_string(&AptWeights::apt_b()).unwrap();
        assert_eq!(json, "[1.0,0.5,0.0,0.0,0.0,0.0]");
        assert!(serde_json::from_str::<AptWeights>("[1,2,0,0,0,0]").is_err());
    }

    #[test]
    fn reference_against_itself_is_perfect() {
        let src = parse_tokenized_text("I have a bike .\nIt is red .").unwrap();
        let reference = run(
            &src,
            "J'ai un vélo .\nIl est rouge .",
            "0-0 1-0 2-1 3-2 4-3\n0-0 1-1 2-2 3-3",
        );
        let items = [item("p1", 1, 0, "It")];
        let (score, results) = score_apt(&items, &src, &reference, &reference, &AptConfig::default()).unwrap();
        assert_eq!(score.score, 1.0);
        assert_eq!(results[0].case, AptCase::Identical);
        assert_eq!(results[0].mt_token.as_deref(), Some("il"));
    }

    #[test]
    fn velo_example_is_incompatible() {
        let src = parse_tokenized_text("I have a bicycle .\nIt is red .").unwrap();
        let reference = run(
            &src,
            "J'ai un vélo .\nIl est rouge .",
            "0-0 1-0 2-1 3-2 4-3\n0-0 1-1 2-2 3-3",
        );
        let mt = run(
            &src,
            "J'ai une bicyclette .\nElle est rouge .",
            "0-0 1-0 2-1 3-2 4-3\n0-0 1-1 2-2 3-3",
        );
        let items = [item("p1", 1, 0, "It")];
        let (score, results) = score_apt(&items, &src, &mt, &reference, &AptConfig::default()).unwrap();
        assert_eq!(results[0].case, AptCase::Incompatible);
        assert_eq!(score.score, 0.0);
    }

    #[test]
    fn unresolved_items_are_listed() {
        let src = parse_tokenized_text("It is red .").unwrap();
        let r = run(&src, "Il est rouge .", "0-0");
        let items = [item("ok", 0, 0, "It"), item("bad1", 3, 0, "x"), item("bad2", 0, 9, "x")];
        let err = score_apt(&items, &src, &r, &r, &AptConfig::default()).unwrap_err();
        assert_eq!(err, ScoreError::UnresolvedItems(vec!["bad1".into(), "bad2".into()]));
        assert_eq!(
            score_apt(&[], &src, &r, &r, &AptConfig::default()).unwrap_err(),
            ScoreError::NoPronouns
        );
    }

    #[test]
    fn results_round_trip_through_jsonl() {
        let r = AptItemResult {
            pronoun_id: "p1".into(),
            system_name: "s".into(),
            case: AptCase::NoMtTranslation,
            mt_token: None,
            ref_token: Some("il".into()),
            mt_index: None,
            ref_index: Some(0),
            alignment_was_corrected: false,
        };
        let line = serde_json::to_string(&r).unwrap();
        assert!(line.contains("\"case\":4"));
        assert_eq!(parse_apt_results(&line).unwrap(), vec![r]);
        let broken = line.replace("\"case\":4", "\"case\":1");
        assert!(parse_apt_results(&broken).is_err());
        assert!(parse_apt_results(&line.replace("\"case\":4", "\"case\":7")).is_err());
    }

    fn case_strategy() -> impl Strategy<Value = AptCase> {
        (1u8..=6).prop_map(|n| AptCase::from_number(n).unwrap())
    }

    fn weights_strategy() -> impl Strategy<Value = [f64; 6]> {
        prop::array::uniform6(0.0f64..=1.0)
    }

    proptest! {
        #[test]
        fn score_stays_in_unit_interval(cases in prop::collection::vec(case_strategy(), 1..40), w in weights_strategy()) {
            let weights = AptWeights::new(w).unwrap();
            let s = AptScore::from_cases(cases.iter().copied(), &weights);
            prop_assert!((0.0..=1.0).contains(&s.score));
            prop_assert_eq!(s.case_counts.iter().sum::<usize>(), cases.len());
            let all_full = cases.iter().all(|&c| weights.weight(c) == 1.0);
            prop_assert_eq!(s.score == 1.0, all_full);
        }

        #[test]
        fn raising_a_weight_never_lowers_the_score(
            cases in prop::collection::vec(case_strategy(), 1..40),
            w in weights_strategy(),
            k in 0usize..6,
            bump in 0.0f64..=1.0,
        ) {
            let before = AptScore::from_cases(cases.iter().copied(), &AptWeights::new(w).unwrap());
            let mut raised = w;
            raised[k] = (raised[k] + bump).min(1.0);
            let after = AptScore::from_cases(cases.iter().copied(), &AptWeights::new(raised).unwrap());
            prop_assert!(after.score >= before.score - 1e-12);
        }

        #[test]
        fn equivalence_is_symmetric_in_classify(a in "[a-e]", b in "[a-e]", pairs in prop::collection::vec(("[a-e]", "[a-e]"), 0..6)) {
            let mut table = EquivalenceTable::empty();
            for (x, y) in &pairs {
                if x != y {
                    table.insert(x, y).unwrap();
                }
            }
            let ab = classify(Some(&a), Some(&b), &table) == AptCase::Equivalent;
            let ba = classify(Some(&b), Some(&a), &table) == AptCase::Equivalent;
            prop_assert_eq!(ab, ba);
        }
    }
}
