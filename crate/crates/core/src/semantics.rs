//! Categorized semantic attributes and per-concept profiles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::knowledge::{normalize_token, ConceptId, KnowledgeBase, KnowledgeError, RelationKind};
use crate::Fraction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("no concept holds ({0}, {1})")]
    AttributeAbsent(RelationKind, String),
    #[error("unknown attribute category `{0}`")]
    UnknownCategory(String),
}

impl From<KnowledgeError> for SemanticsError {
    fn from(e: KnowledgeError) -> Self {
        match e {
            KnowledgeError::UnknownConcept(c) => SemanticsError::UnknownConcept(c),
            other => SemanticsError::UnknownConcept(other.to_string()),
        }
    }
}

/// The four attribute categories, in their fixed display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttributeCategory {
    Functional,
    Perceptual,
    Relational,
    Behavioural,
}

impl AttributeCategory {
    pub const ALL: [AttributeCategory; 4] = [
        AttributeCategory::Functional,
        AttributeCategory::Perceptual,
        AttributeCategory::Relational,
        AttributeCategory::Behavioural,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttributeCategory::Functional => "functional",
            AttributeCategory::Perceptual => "perceptual",
            AttributeCategory::Relational => "relational",
            AttributeCategory::Behavioural => "behavioural",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AttributeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttributeCategory {
    type Err = SemanticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = normalize_token(s);
        let wanted = if wanted == "behavioral" { "behavioural".to_string() } else { wanted };
        AttributeCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == wanted)
            .ok_or_else(|| SemanticsError::UnknownCategory(s.to_string()))
    }
}

impl Serialize for AttributeCategory {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for AttributeCategory {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// The category a relation's attributes fall into.
pub fn categorize(relation: RelationKind) -> AttributeCategory {
    use AttributeCategory::*;
    use RelationKind::*;
    match relation {
        UsedFor | Requires => Functional,
        HasProperty | MadeOf => Perceptual,
        IsA | PartOf | HasPart | LocatedAt => Relational,
        CapableOf | Does | Becomes => Behavioural,
    }
}

/// A `(relation, property)` pair tagged with its category.
///
/// Ordering is by relation name, then property; the category is derived and
/// never stored independently.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemanticAttribute {
    relation: RelationKind,
    property: String,
}

impl SemanticAttribute {
    pub fn new(relation: RelationKind, property: &str) -> Self {
        Self { relation, property: normalize_token(property) }
    }

    pub fn relation(&self) -> RelationKind {
        self.relation
    }

    pub fn property(&self) -> &str {
        &self.property
    }

    pub fn category(&self) -> AttributeCategory {
        categorize(self.relation)
    }
}

impl Ord for SemanticAttribute {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.relation.as_str(), &self.property).cmp(&(other.relation.as_str(), &other.property))
    }
}

impl PartialOrd for SemanticAttribute {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SemanticAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.relation, self.property)
    }
}

#[derive(Serialize, Deserialize)]
struct AttributeRepr {
    relation: RelationKind,
    property: String,
}

impl Serialize for SemanticAttribute {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        AttributeRepr { relation: self.relation, property: self.property.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SemanticAttribute {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = AttributeRepr::deserialize(d)?;
        Ok(SemanticAttribute::new(repr.relation, &repr.property))
    }
}

/// A concept's attributes partitioned by category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticProfile {
    pub concept: ConceptId,
    by_category: BTreeMap<AttributeCategory, BTreeSet<SemanticAttribute>>,
}

impl SemanticProfile {
    pub fn new(concept: ConceptId, attributes: impl IntoIterator<Item = SemanticAttribute>) -> Self {
        let mut by_category: BTreeMap<_, BTreeSet<_>> =
            AttributeCategory::ALL.into_iter().map(|c| (c, BTreeSet::new())).collect();
        for attr in attributes {
            by_category.entry(attr.category()).or_default().insert(attr);
        }
        Self { concept, by_category }
    }

    pub fn category(&self, category: AttributeCategory) -> &BTreeSet<SemanticAttribute> {
        &self.by_category[&category]
    }

    /// Category sets in the fixed category order.
    pub fn categories(&self) -> impl Iterator<Item = (AttributeCategory, &BTreeSet<SemanticAttribute>)> {
        self.by_category.iter().map(|(c, s)| (*c, s))
    }

    pub fn attributes(&self) -> impl Iterator<Item = &SemanticAttribute> {
        self.by_category.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.by_category.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Copy of this profile keeping only attributes matching `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&SemanticAttribute) -> bool) -> Self {
        Self::new(self.concept.clone(), self.attributes().filter(|a| keep(a)).cloned())
    }
}

pub fn build_profile(kb: &KnowledgeBase, concept: &ConceptId) -> Result<SemanticProfile, SemanticsError> {
    let attrs = kb.attributes_of(concept).ok_or_else(|| SemanticsError::UnknownConcept(concept.to_string()))?;
    Ok(SemanticProfile::new(concept.clone(), attrs.iter().map(|(r, p)| SemanticAttribute::new(*r, p))))
}

/// `1 / |holders|` for the exact `(relation, property)` pair.
pub fn distinctiveness(kb: &KnowledgeBase, attribute: &SemanticAttribute) -> Result<Fraction, SemanticsError> {
    let holders = kb.holders(attribute.relation(), attribute.property()).len();
    if holders == 0 {
        return Err(SemanticsError::AttributeAbsent(attribute.relation(), attribute.property().to_string()));
    }
    Ok(Fraction::new(1, holders as u128))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use RelationKind::*;

    fn attrs(pairs: &[(RelationKind, &str)]) -> BTreeSet<SemanticAttribute> {
        pairs.iter().map(|(r, p)| SemanticAttribute::new(*r, p)).collect()
    }

    #[test]
    fn mapping_table() {
        assert_eq!(categorize(UsedFor), AttributeCategory::Functional);
        assert_eq!(categorize(HasProperty), AttributeCategory::Perceptual);
        assert_eq!(categorize(IsA), AttributeCategory::Relational);
        let expected = [
            (IsA, AttributeCategory::Relational),
            (PartOf, AttributeCategory::Relational),
            (HasPart, AttributeCategory::Relational),
            (LocatedAt, AttributeCategory::Relational),
            (UsedFor, AttributeCategory::Functional),
            (Requires, AttributeCategory::Functional),
            (HasProperty, AttributeCategory::Perceptual),
            (MadeOf, AttributeCategory::Perceptual),
            (CapableOf, AttributeCategory::Behavioural),
            (Does, AttributeCategory::Behavioural),
            (Becomes, AttributeCategory::Behavioural),
        ];
        for (r, c) in expected {
            assert_eq!(categorize(r), c, "{r}");
        }
    }

    #[test]
    fn spoon_profile() {
        let kb = data::tk6();
        let p = build_profile(&kb, &kb.concept("spoon").unwrap()).unwrap();
        assert_eq!(p.category(AttributeCategory::Functional), &attrs(&[(UsedFor, "scooping")]));
        assert_eq!(p.category(AttributeCategory::Perceptual), &attrs(&[(HasProperty, "shiny"), (MadeOf, "metal")]));
        assert_eq!(p.category(AttributeCategory::Relational), &attrs(&[(IsA, "utensil")]));
        assert!(p.category(AttributeCategory::Behavioural).is_empty());
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn river_profile() {
        let kb = data::tk6();
        let p = build_profile(&kb, &kb.concept("river").unwrap()).unwrap();
        assert_eq!(p.category(AttributeCategory::Relational), &attrs(&[(IsA, "waterway")]));
        assert_eq!(p.category(AttributeCategory::Behavioural), &attrs(&[(CapableOf, "flowing")]));
        assert!(p.category(AttributeCategory::Functional).is_empty());
        assert!(p.category(AttributeCategory::Perceptual).is_empty());
    }

    #[test]
    fn unknown_concept_profile() {
        let kb = data::tk6();
        let err = build_profile(&kb, &ConceptId::new("unicorn").unwrap()).unwrap_err();
        assert_eq!(err, SemanticsError::UnknownConcept("unicorn".into()));
    }

    #[test]
    fn distinctiveness_tk6() {
        let kb = data::tk6();
        let d = |r, p| distinctiveness(&kb, &SemanticAttribute::new(r, p)).unwrap();
        assert_eq!(d(UsedFor, "scooping"), Fraction::new(1, 2));
        assert_eq!(d(IsA, "utensil"), Fraction::new(1, 3));
        assert_eq!(d(CapableOf, "flowing"), Fraction::new(1, 1));
        assert!(matches!(
            distinctiveness(&kb, &SemanticAttribute::new(IsA, "unicorn")),
            Err(SemanticsError::AttributeAbsent(..))
        ));
    }

    #[test]
    fn partition_and_fidelity_over_bundled_kb() {
        let kb = data::kb60();
        for c in kb.concepts() {
            let p = build_profile(&kb, c).unwrap();
            assert_eq!(p.len(), kb.attributes_of(c).unwrap().len());
            for (cat, set) in p.categories() {
                assert!(set.iter().all(|a| a.category() == cat));
            }
        }
    }

    #[test]
    fn category_parse_accepts_both_spellings() {
        assert_eq!("Behavioral".parse::<AttributeCategory>().unwrap(), AttributeCategory::Behavioural);
        assert!("tactile".parse::<AttributeCategory>().is_err());
    }
}
