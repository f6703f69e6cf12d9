//! Genre style lexica: surface templates keyed by genre and category.
//!
//! A lexicon file is line-delimited JSON. Each record names a genre, a
//! category and a non-empty list of templates:
//!
//! ```text
//! {"genre":"poetic","category":"behavioural","templates":["Softly I go, forever {property}."]}
//! ```
//!
//! Templates may use two slots: `{property}` (mandatory) and
//! `{relation-phrase}`, which expands to a short phrase that reads after
//! "I am", e.g. `made of` or `capable of`.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::{GeneratorError, Genre};
use crate::knowledge::RelationKind;
use crate::semantics::{AttributeCategory, SemanticAttribute};

pub const PROPERTY_SLOT: &str = "{property}";
pub const RELATION_SLOT: &str = "{relation-phrase}";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StyleLexicon {
    templates: BTreeMap<(Genre, AttributeCategory), Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconRecord {
    genre: Genre,
    category: AttributeCategory,
    templates: Vec<String>,
}

impl StyleLexicon {
    pub fn from_jsonl(text: &str) -> Result<Self, GeneratorError> {
        let mut lexicon = StyleLexicon::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let record: LexiconRecord = serde_json::from_str(line)
                .map_err(|e| GeneratorError::InvalidLexicon(format!("line {}: {e}", idx + 1)))?;
            if record.templates.is_empty() {
                return Err(GeneratorError::InvalidLexicon(format!("line {}: no templates", idx + 1)));
            }
            for template in record.templates {
                lexicon.insert(record.genre, record.category, template)?;
            }
        }
        Ok(lexicon)
    }

    pub fn insert(
        &mut self,
        genre: Genre,
        category: AttributeCategory,
        template: impl Into<String>,
    ) -> Result<(), GeneratorError> {
        let template = template.into();
        validate_template(&template)?;
        self.templates.entry((genre, category)).or_default().push(template);
        Ok(())
    }

    pub fn templates(&self, genre: Genre, category: AttributeCategory) -> Option<&[String]> {
        self.templates.get(&(genre, category)).map(Vec::as_slice)
    }

    /// `(genre, category)` pairs without any template.
    pub fn missing_pairs(&self) -> Vec<(Genre, AttributeCategory)> {
        Genre::ALL
            .into_iter()
            .flat_map(|g| AttributeCategory::ALL.into_iter().map(move |c| (g, c)))
            .filter(|key| !self.templates.contains_key(key))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_pairs().is_empty()
    }
}

fn validate_template(template: &str) -> Result<(), GeneratorError> {
    if !template.contains(PROPERTY_SLOT) {
        return Err(GeneratorError::InvalidLexicon(format!("template lacks {PROPERTY_SLOT}: {template:?}")));
    }
    let stripped = template.replace(PROPERTY_SLOT, "").replace(RELATION_SLOT, "");
    if stripped.contains('{') || stripped.contains('}') {
        return Err(GeneratorError::InvalidLexicon(format!("unknown slot in {template:?}")));
    }
    Ok(())
}

pub fn relation_phrase(relation: RelationKind) -> &'static str {
    match relation {
        RelationKind::IsA => "a kind of",
        RelationKind::PartOf => "a part of",
        RelationKind::HasPart => "equipped with",
        RelationKind::LocatedAt => "found in the",
        RelationKind::UsedFor => "used for",
        RelationKind::Requires => "in need of",
        RelationKind::HasProperty => "",
        RelationKind::MadeOf => "made of",
        RelationKind::CapableOf => "capable of",
        RelationKind::Does => "known for",
        RelationKind::Becomes => "bound to become",
    }
}

/// Fills both slots, collapses whitespace and capitalizes the first letter.
pub fn fill_template(template: &str, attribute: &SemanticAttribute) -> String {
    let filled = template
        .replace(RELATION_SLOT, relation_phrase(attribute.relation()))
        .replace(PROPERTY_SLOT, attribute.property());
    let collapsed = filled.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut chars = collapsed.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => collapsed,
    }
}
