//! Concept triples and the indexed knowledge base built from them.
//!
//! A knowledge base is a deduplicated set of `⟨concept, relation, property⟩`
//! facts plus three lookup indices:
//!
//! * forward: concept → `(relation, property)` pairs it holds,
//! * inverted: `(relation, property)` → concepts holding it,
//! * property: property → concepts holding it under any relation.
//!
//! The forward and inverted indices are exact transposes of each other. A
//! [`KnowledgeBase`] is immutable once [`ingest`] returns, so it can be shared
//! freely across threads.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnowledgeError {
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("no valid triples ({rejected} lines rejected)")]
    EmptyKnowledgeBase { rejected: usize },
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
}

/// Lowercases, trims and collapses internal whitespace runs to one space.
pub fn normalize_token(raw: &str) -> String {
    raw.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

/// A normalized, non-empty concept name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(raw: &str) -> Result<Self, KnowledgeError> {
        let name = normalize_token(raw);
        if name.is_empty() {
            return Err(KnowledgeError::MalformedRecord("empty concept".into()));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ConceptId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for ConceptId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ConceptId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        ConceptId::new(&raw).map_err(serde::de::Error::custom)
    }
}

/// The closed relation vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    IsA,
    PartOf,
    HasPart,
    LocatedAt,
    UsedFor,
    Requires,
    HasProperty,
    MadeOf,
    CapableOf,
    Does,
    Becomes,
}

impl RelationKind {
    pub const ALL: [RelationKind; 11] = [
        RelationKind::IsA,
        RelationKind::PartOf,
        RelationKind::HasPart,
        RelationKind::LocatedAt,
        RelationKind::UsedFor,
        RelationKind::Requires,
        RelationKind::HasProperty,
        RelationKind::MadeOf,
        RelationKind::CapableOf,
        RelationKind::Does,
        RelationKind::Becomes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::IsA => "is-a",
            RelationKind::PartOf => "part-of",
            RelationKind::HasPart => "has-part",
            RelationKind::LocatedAt => "located-at",
            RelationKind::UsedFor => "used-for",
            RelationKind::Requires => "requires",
            RelationKind::HasProperty => "has-property",
            RelationKind::MadeOf => "made-of",
            RelationKind::CapableOf => "capable-of",
            RelationKind::Does => "does",
            RelationKind::Becomes => "becomes",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationKind {
    type Err = KnowledgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = normalize_token(s);
        RelationKind::ALL
            .into_iter()
            .find(|r| r.as_str() == wanted)
            .ok_or_else(|| KnowledgeError::UnknownRelation(s.trim().to_string()))
    }
}

impl Serialize for RelationKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RelationKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// One `⟨concept, relation, property⟩` fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub concept: ConceptId,
    pub relation: RelationKind,
    pub property: String,
}

impl Triple {
    pub fn new(concept: &str, relation: RelationKind, property: &str) -> Result<Self, KnowledgeError> {
        let property = normalize_token(property);
        if property.is_empty() {
            return Err(KnowledgeError::MalformedRecord("empty property".into()));
        }
        Ok(Self { concept: ConceptId::new(concept)?, relation, property })
    }

    /// Renders the triple as one record of the triple file format.
    pub fn to_record(&self) -> String {
        serde_json::json!({
            "concept": self.concept.as_str(),
            "relation": self.relation.as_str(),
            "property": self.property,
        })
        .to_string()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    concept: String,
    relation: String,
    property: String,
}

/// Parses one line of the triple file format.
pub fn parse_triple_record(line: &str) -> Result<Triple, KnowledgeError> {
    let raw: RawRecord =
        serde_json::from_str(line.trim()).map_err(|e| KnowledgeError::MalformedRecord(e.to_string()))?;
    if raw.concept.trim().is_empty() || raw.relation.trim().is_empty() {
        return Err(KnowledgeError::MalformedRecord("empty field".into()));
    }
    let relation: RelationKind = raw.relation.parse()?;
    Triple::new(&raw.concept, relation, &raw.property)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedLine {
    /// 1-based line number.
    pub line: usize,
    pub text: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub duplicates: usize,
    pub comments: usize,
    pub rejected: Vec<RejectedLine>,
}

type Attribute = (RelationKind, String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    triples: BTreeSet<Triple>,
    forward: BTreeMap<ConceptId, BTreeSet<Attribute>>,
    inverted: BTreeMap<Attribute, BTreeSet<ConceptId>>,
    by_property: BTreeMap<String, BTreeSet<ConceptId>>,
}

static EMPTY: BTreeSet<ConceptId> = BTreeSet::new();

/// Parses every record, reporting rejected lines, and indexes the
/// deduplicated union of the valid triples.
pub fn ingest<I, S>(lines: I) -> Result<(KnowledgeBase, IngestReport), KnowledgeError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut report = IngestReport::default();
    let mut triples = BTreeSet::new();
    for (idx, line) in lines.into_iter().enumerate() {
        let line = line.as_ref();
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            report.comments += 1;
            continue;
        }
        match parse_triple_record(trimmed) {
            Ok(t) => {
                if triples.insert(t) {
                    report.accepted += 1;
                } else {
                    report.duplicates += 1;
                }
            }
            Err(e) => {
                report.rejected.push(RejectedLine { line: idx + 1, text: line.to_string(), reason: e.to_string() })
            }
        }
    }
    if triples.is_empty() {
        return Err(KnowledgeError::EmptyKnowledgeBase { rejected: report.rejected.len() });
    }
    Ok((KnowledgeBase::from_triples(triples), report))
}

impl KnowledgeBase {
    /// Ingests the whole text of a triple file.
    pub fn from_text(text: &str) -> Result<(Self, IngestReport), KnowledgeError> {
        ingest(text.lines())
    }

    fn from_triples(triples: BTreeSet<Triple>) -> Self {
        let mut forward: BTreeMap<ConceptId, BTreeSet<Attribute>> = BTreeMap::new();
        let mut inverted: BTreeMap<Attribute, BTreeSet<ConceptId>> = BTreeMap::new();
        let mut by_property: BTreeMap<String, BTreeSet<ConceptId>> = BTreeMap::new();
        for t in &triples {
            let key = (t.relation, t.property.clone());
            forward.entry(t.concept.clone()).or_default().insert(key.clone());
            inverted.entry(key).or_default().insert(t.concept.clone());
            by_property.entry(t.property.clone()).or_default().insert(t.concept.clone());
        }
        Self { triples, forward, inverted, by_property }
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn concepts(&self) -> impl Iterator<Item = &ConceptId> {
        self.forward.keys()
    }

    pub fn concept_count(&self) -> usize {
        self.forward.len()
    }

    pub fn contains(&self, concept: &ConceptId) -> bool {
        self.forward.contains_key(concept)
    }

    /// Looks a concept up by raw (unnormalized) name.
    pub fn concept(&self, raw: &str) -> Result<ConceptId, KnowledgeError> {
        let id = ConceptId::new(raw).map_err(|_| KnowledgeError::UnknownConcept(raw.to_string()))?;
        if self.contains(&id) {
            Ok(id)
        } else {
            Err(KnowledgeError::UnknownConcept(id.0))
        }
    }

    /// The `(relation, property)` pairs a concept holds.
    pub fn attributes_of(&self, concept: &ConceptId) -> Option<&BTreeSet<(RelationKind, String)>> {
        self.forward.get(concept)
    }

    pub fn holds(&self, concept: &ConceptId, relation: RelationKind, property: &str) -> bool {
        self.forward.get(concept).is_some_and(|attrs| attrs.contains(&(relation, property.to_string())))
    }

    /// Inverted-index lookup; borrowed variant of [`KnowledgeBase::concepts_with`].
    pub fn holders(&self, relation: RelationKind, property: &str) -> &BTreeSet<ConceptId> {
        self.inverted.get(&(relation, property.to_string())).unwrap_or(&EMPTY)
    }

    /// Property-index lookup: concepts holding `property` under any relation.
    pub fn property_holders(&self, property: &str) -> &BTreeSet<ConceptId> {
        self.by_property.get(property).unwrap_or(&EMPTY)
    }

    /// Concepts holding `property`, under `relation` if one is given.
    pub fn concepts_with(&self, relation: Option<RelationKind>, property: &str) -> BTreeSet<ConceptId> {
        let property = normalize_token(property);
        match relation {
            Some(r) => self.holders(r, &property).clone(),
            None => self.property_holders(&property).clone(),
        }
    }

    /// Every `is-a` label reachable from `concept`, following a label onward
    /// whenever it names another concept. Terminates on cycles.
    pub fn hypernym_closure(&self, concept: &ConceptId) -> Result<BTreeSet<String>, KnowledgeError> {
        if !self.contains(concept) {
            return Err(KnowledgeError::UnknownConcept(concept.to_string()));
        }
        let mut labels = BTreeSet::new();
        let mut visited = BTreeSet::from([concept.clone()]);
        let mut queue = VecDeque::from([concept.clone()]);
        while let Some(current) = queue.pop_front() {
            let Some(attrs) = self.forward.get(&current) else { continue };
            for (relation, property) in attrs {
                if *relation != RelationKind::IsA {
                    continue;
                }
                labels.insert(property.clone());
                let next = ConceptId(property.clone());
                if self.contains(&next) && visited.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        Ok(labels)
    }

    /// SHA-256 over the canonical (sorted, normalized) triple records.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.triples {
            hasher.update(t.to_record().as_bytes());
            hasher.update(b"\n");
        }
        hex_string(&hasher.finalize())
    }

    pub(crate) fn forward_index(&self) -> &BTreeMap<ConceptId, BTreeSet<Attribute>> {
        &self.forward
    }

    pub(crate) fn inverted_index(&self) -> &BTreeMap<Attribute, BTreeSet<ConceptId>> {
        &self.inverted
    }

    /// Checks the index invariants by full enumeration.
    pub fn indices_consistent(&self) -> bool {
        let forward_ok = self
            .forward_index()
            .iter()
            .all(|(c, attrs)| attrs.iter().all(|a| self.inverted_index().get(a).is_some_and(|s| s.contains(c))));
        let inverted_ok = self
            .inverted_index()
            .iter()
            .all(|(a, cs)| cs.iter().all(|c| self.forward_index().get(c).is_some_and(|s| s.contains(a))));
        let mut union: BTreeMap<&str, BTreeSet<&ConceptId>> = BTreeMap::new();
        for ((_, p), cs) in self.inverted_index() {
            union.entry(p.as_str()).or_default().extend(cs.iter());
        }
        let property_ok = union.len() == self.by_property.len()
            && union
                .iter()
                .all(|(p, cs)| self.by_property.get(*p).is_some_and(|s| s.iter().collect::<BTreeSet<_>>() == *cs));
        forward_ok && inverted_ok && property_ok
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    use std::fmt::Write;
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
