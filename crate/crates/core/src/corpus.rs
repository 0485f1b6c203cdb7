//! Input artifacts: tokenized text, Moses alignments, test-suite annotations,
//! and human judgment files.
//!
//! All parsers reject malformed input with a line-numbered [`ParseError`];
//! nothing is silently repaired.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A parse or validation failure, carrying the 1-based line it was found on
/// when one applies.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub fn new(message: impl Into<String>) -> Self {
        ParseError {
            line: None,
            message: message.into(),
        }
    }

    pub fn at(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {}: {}", line, self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Splits a file into lines, tolerating one trailing newline.
fn split_lines(raw: &str) -> Vec<&str> {
    let body = raw.strip_suffix('\n').unwrap_or(raw);
    body.split('\n').collect()
}

fn reject_carriage_returns(raw: &str) -> Result<(), ParseError> {
    if let Some(pos) = raw.find('\r') {
        let line = raw[..pos].matches('\n').count() + 1;
        return Err(ParseError::at(line, "carriage return found; expected LF line endings"));
    }
    Ok(())
}

/// Sentence-segmented, whitespace-tokenized text. One sentence per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedCorpus {
    sentences: Vec<Vec<String>>,
}

impl TokenizedCorpus {
    /// Builds a corpus from already-split sentences, checking the same
    /// invariants as [`parse_tokenized_text`].
    pub fn new(sentences: Vec<Vec<String>>) -> Result<Self, ParseError> {
        if sentences.is_empty() {
            return Err(ParseError::new("empty corpus"));
        }
        for (i, sentence) in sentences.iter().enumerate() {
            if sentence.is_empty() {
                return Err(ParseError::at(i + 1, "sentence has no tokens"));
            }
            for token in sentence {
                if token.is_empty() {
                    return Err(ParseError::at(i + 1, "empty token"));
                }
                if token.chars().any(char::is_whitespace) {
                    return Err(ParseError::at(i + 1, format!("token {token:?} contains whitespace")));
                }
            }
        }
        Ok(TokenizedCorpus { sentences })
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn sentence(&self, index: usize) -> Option<&[String]> {
        self.sentences.get(index).map(Vec::as_slice)
    }

    pub fn token(&self, sentence: usize, token: usize) -> Option<&str> {
        self.sentences.get(sentence)?.get(token).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Canonical single-space, LF-terminated rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for sentence in &self.sentences {
            out.push_str(&sentence.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses one-sentence-per-line tokenized text.
pub fn parse_tokenized_text(raw: &str) -> Result<TokenizedCorpus, ParseError> {
    if raw.is_empty() {
        return Err(ParseError::new("empty corpus"));
    }
    reject_carriage_returns(raw)?;
    let mut sentences = Vec::new();
    for (i, line) in split_lines(raw).into_iter().enumerate() {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if tokens.is_empty() {
            return Err(ParseError::at(i + 1, "blank line (sentence without tokens)"));
        }
        sentences.push(tokens);
    }
    TokenizedCorpus::new(sentences)
}

/// Per-sentence sets of 0-based `(source, target)` token links.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WordAlignment {
    links: Vec<BTreeSet<(usize, usize)>>,
}

impl WordAlignment {
    /// Builds an alignment and validates it against both sides.
    pub fn new(
        links: Vec<BTreeSet<(usize, usize)>>,
        src: &TokenizedCorpus,
        tgt: &TokenizedCorpus,
    ) -> Result<Self, ParseError> {
        let alignment = WordAlignment { links };
        alignment.validate(src, tgt)?;
        Ok(alignment)
    }

    pub fn validate(&self, src: &TokenizedCorpus, tgt: &TokenizedCorpus) -> Result<(), ParseError> {
        if self.links.len() != src.len() || self.links.len() != tgt.len() {
            return Err(ParseError::new(format!(
                "line count mismatch: alignment has {} lines, source {} and target {} sentences",
                self.links.len(),
                src.len(),
                tgt.len()
            )));
        }
        for (i, pairs) in self.links.iter().enumerate() {
            let (src_len, tgt_len) = (src.sentences[i].len(), tgt.sentences[i].len());
            for &(s, t) in pairs {
                if s >= src_len || t >= tgt_len {
                    return Err(ParseError::at(
                        i + 1,
                        format!("link {s}-{t} out of bounds (source length {src_len}, target length {tgt_len})"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn sentence(&self, index: usize) -> Option<&BTreeSet<(usize, usize)>> {
        self.links.get(index)
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Target indices linked to `src_index` in sentence `sentence`, ascending.
    pub fn targets_of(&self, sentence: usize, src_index: usize) -> Vec<usize> {
        self.links
            .get(sentence)
            .map(|pairs| {
                pairs
                    .iter()
                    .filter(|&&(s, _)| s == src_index)
                    .map(|&(_, t)| t)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Renders in Moses `i-j` format, one line per sentence.
    pub fn to_moses(&self) -> String {
        let mut out = String::new();
        for pairs in &self.links {
            let line: Vec<String> = pairs.iter().map(|(s, t)| format!("{s}-{t}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn parse_index(text: &str, line: usize, pair: &str) -> Result<usize, ParseError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::at(line, format!("malformed alignment pair {pair:?}")));
    }
    text.parse()
        .map_err(|_| ParseError::at(line, format!("malformed alignment pair {pair:?}")))
}

/// Parses Moses-format alignments (`0-0 1-2 2-1`, one line per sentence pair).
pub fn parse_moses_alignment(
    raw: &str,
    src: &TokenizedCorpus,
    tgt: &TokenizedCorpus,
) -> Result<WordAlignment, ParseError> {
    reject_carriage_returns(raw)?;
    let lines = split_lines(raw);
    if lines.len() != src.len() || lines.len() != tgt.len() {
        return Err(ParseError::at(
            lines.len().min(src.len().min(tgt.len())) + 1,
            format!(
                "line count mismatch: alignment has {} lines, source {} and target {} sentences",
                lines.len(),
                src.len(),
                tgt.len()
            ),
        ));
    }
    let mut links = Vec::with_capacity(lines.len());
    for (i, line) in lines.into_iter().enumerate() {
        let lineno = i + 1;
        let mut pairs = BTreeSet::new();
        for pair in line.split_whitespace() {
            let (s, t) = pair
                .split_once('-')
                .ok_or_else(|| ParseError::at(lineno, format!("malformed alignment pair {pair:?}")))?;
            let s = parse_index(s, lineno, pair)?;
            let t = parse_index(t, lineno, pair)?;
            if !pairs.insert((s, t)) {
                return Err(ParseError::at(lineno, format!("duplicate alignment pair {pair:?}")));
            }
        }
        links.push(pairs);
    }
    let alignment = WordAlignment { links };
    alignment.validate(src, tgt)?;
    Ok(alignment)
}

/// Broad pronoun function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PronounFunction {
    Anaphoric,
    Event,
    Pleonastic,
    AddresseeReference,
}

impl PronounFunction {
    pub fn code(self) -> &'static str {
        match self {
            PronounFunction::Anaphoric => "anaphoric",
            PronounFunction::Event => "event",
            PronounFunction::Pleonastic => "pleonastic",
            PronounFunction::AddresseeReference => "addressee-reference",
        }
    }
}

impl FromStr for PronounFunction {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "anaphoric" => Ok(PronounFunction::Anaphoric),
            "event" => Ok(PronounFunction::Event),
            "pleonastic" => Ok(PronounFunction::Pleonastic),
            "addressee-reference" | "addressee" => Ok(PronounFunction::AddresseeReference),
            other => Err(ParseError::new(format!("unknown pronoun function {other:?}"))),
        }
    }
}

/// Fine-grained pronoun category. The function is implied by the
/// subcategory, so the two can never disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PronounCategory {
    AnaphoricIntraSubjectIt,
    AnaphoricIntraNonSubjectIt,
    AnaphoricInterSubjectIt,
    AnaphoricInterNonSubjectIt,
    AnaphoricIntraThey,
    AnaphoricInterThey,
    AnaphoricSingularThey,
    AnaphoricGroupItThey,
    EventIt,
    PleonasticIt,
    GenericYou,
    DeicticSingularYou,
    DeicticPluralYou,
}

impl PronounCategory {
    /// All categories in reporting order.
    pub const ALL: [PronounCategory; 13] = [
        PronounCategory::AnaphoricIntraSubjectIt,
        PronounCategory::AnaphoricIntraNonSubjectIt,
        PronounCategory::AnaphoricInterSubjectIt,
        PronounCategory::AnaphoricInterNonSubjectIt,
        PronounCategory::AnaphoricIntraThey,
        PronounCategory::AnaphoricInterThey,
        PronounCategory::AnaphoricSingularThey,
        PronounCategory::AnaphoricGroupItThey,
        PronounCategory::EventIt,
        PronounCategory::PleonasticIt,
        PronounCategory::GenericYou,
        PronounCategory::DeicticSingularYou,
        PronounCategory::DeicticPluralYou,
    ];

    pub fn function(self) -> PronounFunction {
        use PronounCategory::*;
        match self {
            AnaphoricIntraSubjectIt
            | AnaphoricIntraNonSubjectIt
            | AnaphoricInterSubjectIt
            | AnaphoricInterNonSubjectIt
            | AnaphoricIntraThey
            | AnaphoricInterThey
            | AnaphoricSingularThey
            | AnaphoricGroupItThey => PronounFunction::Anaphoric,
            EventIt => PronounFunction::Event,
            PleonasticIt => PronounFunction::Pleonastic,
            GenericYou | DeicticSingularYou | DeicticPluralYou => PronounFunction::AddresseeReference,
        }
    }

    /// Machine-readable code used in suite files and API filters.
    pub fn code(self) -> &'static str {
        use PronounCategory::*;
        match self {
            AnaphoricIntraSubjectIt => "anaphoric.intra.subject.it",
            AnaphoricIntraNonSubjectIt => "anaphoric.intra.nonsubject.it",
            AnaphoricInterSubjectIt => "anaphoric.inter.subject.it",
            AnaphoricInterNonSubjectIt => "anaphoric.inter.nonsubject.it",
            AnaphoricIntraThey => "anaphoric.intra.they",
            AnaphoricInterThey => "anaphoric.inter.they",
            AnaphoricSingularThey => "anaphoric.singular.they",
            AnaphoricGroupItThey => "anaphoric.group.it-they",
            EventIt => "event.it",
            PleonasticIt => "pleonastic.it",
            GenericYou => "addressee.generic.you",
            DeicticSingularYou => "addressee.deictic.singular.you",
            DeicticPluralYou => "addressee.deictic.plural.you",
        }
    }

    /// Short human-readable label for report tables.
    pub fn label(self) -> &'static str {
        use PronounCategory::*;
        match self {
            AnaphoricIntraSubjectIt => "intra sbj it",
            AnaphoricIntraNonSubjectIt => "intra nsbj it",
            AnaphoricInterSubjectIt => "inter sbj it",
            AnaphoricInterNonSubjectIt => "inter nsbj it",
            AnaphoricIntraThey => "intra they",
            AnaphoricInterThey => "inter they",
            AnaphoricSingularThey => "sg they",
            AnaphoricGroupItThey => "group it/they",
            EventIt => "event it",
            PleonasticIt => "pleonastic it",
            GenericYou => "generic you",
            DeicticSingularYou => "deictic sg you",
            DeicticPluralYou => "deictic pl you",
        }
    }

    pub fn is_anaphoric(self) -> bool {
        self.function() == PronounFunction::Anaphoric
    }
}

impl fmt::Display for PronounCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for PronounCategory {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PronounCategory::ALL
            .into_iter()
            .find(|c| c.code() == s)
            .ok_or_else(|| ParseError::new(format!("unknown category {s:?}")))
    }
}

impl Serialize for PronounCategory {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for PronounCategory {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let code = String::deserialize(deserializer)?;
        code.parse()
            .map_err(|e: ParseError| serde::de::Error::custom(e.message))
    }
}

/// A sentence/token position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenPosition {
    pub sentence_index: usize,
    pub token_index: usize,
}

/// One annotated source pronoun of the test suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounItem {
    pub id: String,
    pub sentence_index: usize,
    pub token_index: usize,
    pub surface: String,
    pub category: PronounCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antecedent_head: Option<Vec<(usize, usize)>>,
}

impl PronounItem {
    pub fn position(&self) -> TokenPosition {
        TokenPosition {
            sentence_index: self.sentence_index,
            token_index: self.token_index,
        }
    }

    pub fn antecedent_positions(&self) -> Vec<TokenPosition> {
        self.antecedent_head
            .iter()
            .flatten()
            .map(|&(sentence_index, token_index)| TokenPosition {
                sentence_index,
                token_index,
            })
            .collect()
    }

    /// Checks position, surface form and antecedent bounds against the
    /// source corpus.
    pub fn validate(&self, src: &TokenizedCorpus) -> Result<(), ParseError> {
        let token = src.token(self.sentence_index, self.token_index).ok_or_else(|| {
            ParseError::new(format!(
                "item {}: position ({}, {}) out of bounds",
                self.id, self.sentence_index, self.token_index
            ))
        })?;
        if token.to_lowercase() != self.surface.to_lowercase() {
            return Err(ParseError::new(format!(
                "item {}: surface mismatch: suite has {:?}, corpus has {:?}",
                self.id, self.surface, token
            )));
        }
        for &(s, t) in self.antecedent_head.iter().flatten() {
            if src.token(s, t).is_none() {
                return Err(ParseError::new(format!(
                    "item {}: antecedent position ({s}, {t}) out of bounds",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct RawPronounItem {
    id: String,
    sentence_index: usize,
    token_index: usize,
    surface: String,
    category: String,
    #[serde(default)]
    function: Option<String>,
    #[serde(default)]
    antecedent_head: Option<Vec<(usize, usize)>>,
}

/// Parses suite JSON lines without checking positions against a corpus.
/// Ids must be unique and categories known.
pub fn parse_test_suite_records(raw: &str) -> Result<Vec<PronounItem>, ParseError> {
    reject_carriage_returns(raw)?;
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in raw.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawPronounItem = serde_json::from_str(line).map_err(|e| ParseError::at(lineno, e.to_string()))?;
        let category: PronounCategory = rec
            .category
            .parse()
            .map_err(|e: ParseError| ParseError::at(lineno, e.message))?;
        if let Some(function) = &rec.function {
            let function: PronounFunction = function
                .parse()
                .map_err(|e: ParseError| ParseError::at(lineno, e.message))?;
            if function != category.function() {
                return Err(ParseError::at(
                    lineno,
                    format!("category {} is not a {} pronoun", category, function.code()),
                ));
            }
        }
        if !seen.insert(rec.id.clone()) {
            return Err(ParseError::at(lineno, format!("duplicate id {:?}", rec.id)));
        }
        items.push(PronounItem {
            id: rec.id,
            sentence_index: rec.sentence_index,
            token_index: rec.token_index,
            surface: rec.surface,
            category,
            antecedent_head: rec.antecedent_head,
        });
    }
    Ok(items)
}

/// Parses suite JSON lines and validates every item against the source corpus.
pub fn parse_test_suite(raw: &str, src: &TokenizedCorpus) -> Result<Vec<PronounItem>, ParseError> {
    let items = parse_test_suite_records(raw)?;
    let mut lineno = 0;
    let mut lines = raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    for item in &items {
        if let Some((i, _)) = lines.next() {
            lineno = i + 1;
        }
        item.validate(src).map_err(|e| ParseError::at(lineno, e.message))?;
    }
    Ok(items)
}

/// Serializes a suite back to JSON lines.
pub fn format_test_suite(items: &[PronounItem]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("suite item serializes"));
        out.push('\n');
    }
    out
}

/// Human verdict on a pronoun or antecedent translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Incorrect,
    Unable,
}

impl FromStr for Verdict {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "correct" => Ok(Verdict::Correct),
            "incorrect" => Ok(Verdict::Incorrect),
            "unable" => Ok(Verdict::Unable),
            other => Err(ParseError::new(format!("unknown verdict {other:?}"))),
        }
    }
}

/// Disagreement codes: valid alternative, incorrect equivalence,
/// impersonal translation, other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DisagreementLabel {
    V,
    E,
    I,
    O,
}

impl DisagreementLabel {
    pub const ALL: [DisagreementLabel; 4] = [
        DisagreementLabel::V,
        DisagreementLabel::E,
        DisagreementLabel::I,
        DisagreementLabel::O,
    ];

    pub fn description(self) -> &'static str {
        match self {
            DisagreementLabel::V => "valid alternative translation",
            DisagreementLabel::E => "incorrect equivalence",
            DisagreementLabel::I => "impersonal translation",
            DisagreementLabel::O => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanJudgmentRecord {
    pub pronoun_id: String,
    pub system_name: String,
    pub pronoun_verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antecedent_verdict: Option<Verdict>,
    pub annotator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disagreement_label: Option<DisagreementLabel>,
}

/// Keys `(pronoun_id, system_name, annotator)` that occur more than once,
/// with the 1-based indices of every occurrence.
pub fn duplicate_judgments(records: &[HumanJudgmentRecord]) -> Vec<((String, String, String), Vec<usize>)> {
    let mut seen: HashMap<(String, String, String), Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        seen.entry((r.pronoun_id.clone(), r.system_name.clone(), r.annotator.clone()))
            .or_default()
            .push(i + 1);
    }
    let mut dups: Vec<_> = seen.into_iter().filter(|(_, v)| v.len() > 1).collect();
    dups.sort_by(|a, b| a.1[0].cmp(&b.1[0]));
    dups
}

/// Parses judgment JSON lines. Duplicate `(pronoun, system, annotator)`
/// records are all kept and logged; consumers treat the later one as
/// authoritative.
pub fn parse_judgments(raw: &str) -> Result<Vec<HumanJudgmentRecord>, ParseError> {
    reject_carriage_returns(raw)?;
    let mut records = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: HumanJudgmentRecord = serde_json::from_str(line).map_err(|e| ParseError::at(i + 1, e.to_string()))?;
        records.push(rec);
    }
    for ((pronoun, system, annotator), occurrences) in duplicate_judgments(&records) {
        log::warn!(
            "duplicate judgment for pronoun {pronoun} / system {system} / annotator {annotator} \
             (records {occurrences:?}); the last one is used"
        );
    }
    Ok(records)
}

/// A system's (or the reference's) target side plus its source alignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemRun {
    pub system_name: String,
    pub target: TokenizedCorpus,
    pub alignment: WordAlignment,
}

impl SystemRun {
    pub fn new(
        system_name: impl Into<String>,
        source: &TokenizedCorpus,
        target: TokenizedCorpus,
        alignment: WordAlignment,
    ) -> Result<Self, ParseError> {
        if target.len() != source.len() {
            return Err(ParseError::new(format!(
                "target has {} sentences but source has {}",
                target.len(),
                source.len()
            )));
        }
        alignment.validate(source, &target)?;
        Ok(SystemRun {
            system_name: system_name.into(),
            target,
            alignment,
        })
    }
}
