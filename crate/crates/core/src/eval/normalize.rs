//! Canonical answer tokens for comparing free-text answers with concepts.
//!
//! The pipeline, applied in order:
//!
//! 1. lowercase and split on whitespace (which also trims and collapses runs),
//! 2. strip non-alphanumeric characters from both ends of every word,
//! 3. drop leading articles (`a`, `an`, `the`) while another word follows,
//! 4. singularize the last word:
//!    `-ies` → `-y` (words longer than four letters),
//!    `-sses` → `-ss`, `-xes`/`-ches`/`-shes` → drop `es`,
//!    otherwise a trailing `s` is dropped unless the word ends in `ss`, `us`
//!    or `is`, has three letters or fewer, or would be left ending in
//!    punctuation,
//! 5. replace the result through the synonym table, if it has an entry.
//!
//! Every step is idempotent and synonym targets are themselves resolved to
//! fixed points, so normalizing twice gives the same token as normalizing
//! once.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("guess is empty")]
    EmptyGuess,
    #[error("synonym table: {0}")]
    InvalidSynonyms(String),
}

const ARTICLES: [&str; 3] = ["a", "an", "the"];

fn singularize(word: &str) -> String {
    let len = word.chars().count();
    if len > 4 && word.ends_with("ies") {
        return format!("{}y", &word[..word.len() - 3]);
    }
    if word.ends_with("sses") {
        return word[..word.len() - 2].to_string();
    }
    if word.ends_with("xes") || word.ends_with("ches") || word.ends_with("shes") {
        return word[..word.len() - 2].to_string();
    }
    if len > 3 && word.ends_with('s') && !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
        let stem = &word[..word.len() - 1];
        // Keeps the result free of exposed trailing punctuation.
        if stem.ends_with(char::is_alphanumeric) {
            return stem.to_string();
        }
    }
    word.to_string()
}

/// Steps 1–4 of the pipeline; `None` when nothing is left.
pub fn canonical_form(text: &str) -> Option<String> {
    let mut words: Vec<String> = text
        .split_whitespace()
        .map(|w| w.to_lowercase().trim_matches(|c: char| !c.is_alphanumeric()).to_string())
        .filter(|w| !w.is_empty())
        .collect();
    while words.len() > 1 && ARTICLES.contains(&words[0].as_str()) {
        words.remove(0);
    }
    let last = words.pop()?;
    words.push(singularize(&last));
    Some(words.join(" "))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnswerNormalizer {
    synonyms: BTreeMap<String, String>,
}

impl AnswerNormalizer {
    /// A normalizer without synonyms.
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a normalizer from `(variant, canonical)` pairs. Chains are
    /// followed to their end; cycles are rejected.
    pub fn with_synonyms<I, K, V>(pairs: I) -> Result<Self, NormalizeError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut raw = BTreeMap::new();
        for (k, v) in pairs {
            let key =
                canonical_form(k.as_ref()).ok_or_else(|| NormalizeError::InvalidSynonyms("empty variant".into()))?;
            let value = canonical_form(v.as_ref())
                .ok_or_else(|| NormalizeError::InvalidSynonyms(format!("empty target for {key}")))?;
            if key != value {
                raw.insert(key, value);
            }
        }
        let mut synonyms = BTreeMap::new();
        for (key, first) in &raw {
            let mut target = first.clone();
            let mut steps = 0;
            while let Some(next) = raw.get(&target) {
                target = next.clone();
                steps += 1;
                if steps > raw.len() {
                    return Err(NormalizeError::InvalidSynonyms(format!("cycle through {key}")));
                }
            }
            if &target != key {
                synonyms.insert(key.clone(), target);
            } else {
                return Err(NormalizeError::InvalidSynonyms(format!("cycle through {key}")));
            }
        }
        Ok(Self { synonyms })
    }

    /// Parses a JSON object mapping variants to canonical answers.
    pub fn from_json(text: &str) -> Result<Self, NormalizeError> {
        let map: BTreeMap<String, String> =
            serde_json::from_str(text).map_err(|e| NormalizeError::InvalidSynonyms(e.to_string()))?;
        Self::with_synonyms(map)
    }

    /// The synonym table shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(crate::data::SYNONYMS).expect("bundled synonym table is valid")
    }

    pub fn synonym_count(&self) -> usize {
        self.synonyms.len()
    }

    pub fn normalize(&self, text: &str) -> Result<String, NormalizeError> {
        let base = canonical_form(text).ok_or(NormalizeError::EmptyGuess)?;
        Ok(self.synonyms.get(&base).cloned().unwrap_or(base))
    }
}
