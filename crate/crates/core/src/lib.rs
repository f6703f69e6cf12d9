//! Analogy-based riddle generation with exhaustive answer-set validation.
//!
//! The crate is a pipeline of small modules:
//!
//! * [`knowledge`] ingests `⟨concept, relation, property⟩` triples into an
//!   indexed, immutable [`KnowledgeBase`](knowledge::KnowledgeBase);
//! * [`semantics`] sorts a concept's attributes into functional, perceptual,
//!   relational and behavioural categories;
//! * [`generator`] writes genre-styled riddles whose clues each carry a
//!   checkable predicate;
//! * [`validator`] enumerates every concept satisfying all of a riddle's
//!   predicates and classifies guesses;
//! * [`eval`] asks an external solver for all answers and measures how much
//!   of the answer set it recovers.
//!
//! ```
//! use riddler::{data, generator::{generate_riddle, Genre, GeneratorConfig}, validator::answer_set};
//!
//! let kb = data::tk6();
//! let spoon = kb.concept("spoon").unwrap();
//! let riddle = generate_riddle(&kb, &spoon, Genre::Descriptive, &GeneratorConfig::default(), 7).unwrap();
//! let answers = answer_set(&kb, &riddle).unwrap();
//! assert!(answers.answers.contains(&spoon));
//! ```

pub mod data;
pub mod eval;
pub mod generator;
pub mod knowledge;
pub mod semantics;
pub mod validator;

/// Exact rational used for distinctiveness, coverage and means.
pub type Fraction = num_rational::Ratio<u128>;

pub fn fraction_to_f64(f: Fraction) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

/// Serializes a [`Fraction`] as its `"numer/denom"` string.
pub mod fraction_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::Fraction;

    pub fn serialize<S: Serializer>(f: &Fraction, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", f.numer(), f.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Fraction, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse::<Fraction>().map_err(serde::de::Error::custom)
    }
}
