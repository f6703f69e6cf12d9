#![allow(dead_code)]

use proptest::prelude::*;
use riddler::generator::{AttributePredicate, Clue, Genre, Riddle};
use riddler::knowledge::{KnowledgeBase, RelationKind, Triple};
use riddler::semantics::SemanticAttribute;

pub const CONCEPTS: [&str; 8] = ["anchor", "bell", "comet", "dune", "ember", "fern", "glacier", "harbor"];
pub const PROPERTIES: [&str; 6] = ["bright", "cold", "heavy", "old", "round", "silent"];

pub fn relation() -> impl Strategy<Value = RelationKind> {
    prop::sample::select(RelationKind::ALL.to_vec())
}

/// A triple over a deliberately small vocabulary, so random predicates hit
/// populated index entries often. Concept names may also appear as
/// properties, which exercises is-a chains and cycles.
pub fn triple() -> impl Strategy<Value = Triple> {
    let property = prop_oneof![
        3 => prop::sample::select(PROPERTIES.to_vec()),
        1 => prop::sample::select(CONCEPTS.to_vec()),
    ];
    (prop::sample::select(CONCEPTS.to_vec()), relation(), property)
        .prop_map(|(c, r, p)| Triple::new(c, r, p).expect("vocabulary is valid"))
}

pub fn triples() -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec(triple(), 1..40)
}

pub fn kb_from(triples: &[Triple]) -> KnowledgeBase {
    let text: String = triples.iter().map(|t| t.to_record() + "\n").collect();
    KnowledgeBase::from_text(&text).expect("non-empty").0
}

pub fn kb() -> impl Strategy<Value = KnowledgeBase> {
    triples().prop_map(|t| kb_from(&t))
}

pub fn predicate() -> impl Strategy<Value = AttributePredicate> {
    (relation(), prop::sample::select(PROPERTIES.to_vec()), any::<bool>()).prop_map(|(r, p, exact)| {
        if exact {
            AttributePredicate::exact(r, p)
        } else {
            AttributePredicate::relaxed(p)
        }
    })
}

pub fn predicates() -> impl Strategy<Value = Vec<AttributePredicate>> {
    prop::collection::vec(predicate(), 1..5)
}

/// Wraps bare predicates in a riddle. Surfaces and sources are placeholders;
/// the validator reads only the predicates.
pub fn riddle_of(predicates: &[AttributePredicate]) -> Riddle {
    let clues = predicates
        .iter()
        .map(|p| Clue {
            surface: format!("clue about {}", p.property()),
            predicate: p.clone(),
            source: SemanticAttribute::new(p.relation().unwrap_or(RelationKind::HasProperty), p.property()),
        })
        .collect();
    Riddle {
        id: "r-test".into(),
        intended: riddler::knowledge::ConceptId::new(CONCEPTS[0]).unwrap(),
        genre: Genre::Descriptive,
        seed: 0,
        clues,
    }
}
