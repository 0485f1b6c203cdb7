//! Target-language pronoun inventory and the pronoun equivalence table.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::ParseError;

/// French personal, impersonal and clitic pronoun forms.
pub const FRENCH_PRONOUNS: &[&str] = &[
    "il", "elle", "ils", "elles", "ce", "c'", "ça", "cela", "on", "le", "la", "les", "lui", "leur", "eux", "y", "en",
    "tu", "vous", "se", "s'",
];

/// Lowercased target tokens that count as pronouns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronounLexicon {
    forms: BTreeSet<String>,
}

impl PronounLexicon {
    pub fn new<I, S>(forms: I) -> Result<Self, ParseError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for form in forms {
            let form = form.into();
            if form.is_empty() || form.chars().any(char::is_whitespace) {
                return Err(ParseError::new(format!("invalid lexicon form {form:?}")));
            }
            if form != form.to_lowercase() {
                return Err(ParseError::new(format!("lexicon form {form:?} is not lowercase")));
            }
            set.insert(form);
        }
        if set.is_empty() {
            return Err(ParseError::new("empty pronoun lexicon"));
        }
        Ok(PronounLexicon { forms: set })
    }

    pub fn french() -> Self {
        PronounLexicon::new(FRENCH_PRONOUNS.iter().copied()).expect("built-in lexicon is valid")
    }

    /// Case-insensitive membership test.
    pub fn contains(&self, token: &str) -> bool {
        self.forms.contains(&token.to_lowercase())
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.forms.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

impl Default for PronounLexicon {
    fn default() -> Self {
        PronounLexicon::french()
    }
}

/// Parses a lexicon file: one form per line, `#` comments and blank lines
/// ignored.
pub fn parse_lexicon(raw: &str) -> Result<PronounLexicon, ParseError> {
    let mut forms = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line != line.to_lowercase() {
            return Err(ParseError::at(i + 1, format!("lexicon form {line:?} is not lowercase")));
        }
        if line.chars().any(char::is_whitespace) {
            return Err(ParseError::at(
                i + 1,
                format!("lexicon form {line:?} contains whitespace"),
            ));
        }
        forms.push(line.to_owned());
    }
    PronounLexicon::new(forms)
}

/// Unordered pairs of distinct lowercased forms that earn partial credit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceTable {
    // stored with the smaller form first
    pairs: BTreeSet<(String, String)>,
}

impl EquivalenceTable {
    pub fn empty() -> Self {
        EquivalenceTable::default()
    }

    pub fn insert(&mut self, a: &str, b: &str) -> Result<(), ParseError> {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        if a == b {
            return Err(ParseError::new(format!(
                "equivalence pair {a:?}/{b:?} is not between distinct forms"
            )));
        }
        self.pairs.insert(if a < b { (a, b) } else { (b, a) });
        Ok(())
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, ParseError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut table = EquivalenceTable::empty();
        for (a, b) in pairs {
            table.insert(a, b)?;
        }
        Ok(table)
    }

    /// Symmetric membership test on lowercased forms.
    pub fn contains(&self, a: &str, b: &str) -> bool {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        let key = if a < b { (a, b) } else { (b, a) };
        self.pairs.contains(&key)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

/// Parses an equivalence file: one tab-separated pair per line.
pub fn parse_equivalence(raw: &str) -> Result<EquivalenceTable, ParseError> {
    let mut table = EquivalenceTable::empty();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 || fields.iter().any(|f| f.trim().is_empty()) {
            return Err(ParseError::at(
                i + 1,
                format!("expected two tab-separated forms, got {line:?}"),
            ));
        }
        table
            .insert(fields[0].trim(), fields[1].trim())
            .map_err(|e| ParseError::at(i + 1, e.message))?;
    }
    Ok(table)
}
