//! Genre-styled riddle generation.
//!
//! A riddle is built in four steps: profile the concept, pick attributes by
//! genre-weighted sampling over categories, turn each attribute into a
//! machine-checkable predicate, and realize a surface clue from the genre's
//! lexicon. The generator never checks how many concepts a riddle admits;
//! that is the validator's job.

mod lexicon;
mod rng;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use lexicon::{fill_template, relation_phrase, StyleLexicon, PROPERTY_SLOT, RELATION_SLOT};
pub use rng::{derive_seed, RiddleRng};

use crate::knowledge::{hex_string, normalize_token, ConceptId, KnowledgeBase, RelationKind};
use crate::semantics::{build_profile, AttributeCategory, SemanticAttribute, SemanticProfile, SemanticsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("concept `{0}` has no usable attributes")]
    EmptyProfile(String),
    #[error("no template for genre {0}, category {1}")]
    MissingTemplate(Genre, AttributeCategory),
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("unknown genre `{0}`")]
    UnknownGenre(String),
}

impl From<SemanticsError> for GeneratorError {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::UnknownConcept(c) => GeneratorError::UnknownConcept(c),
            other => GeneratorError::UnknownConcept(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Genre {
    Descriptive,
    Metaphorical,
    Poetic,
    Humorous,
    Situational,
}

impl Genre {
    pub const ALL: [Genre; 5] =
        [Genre::Descriptive, Genre::Metaphorical, Genre::Poetic, Genre::Humorous, Genre::Situational];

    pub fn as_str(self) -> &'static str {
        match self {
            Genre::Descriptive => "descriptive",
            Genre::Metaphorical => "metaphorical",
            Genre::Poetic => "poetic",
            Genre::Humorous => "humorous",
            Genre::Situational => "situational",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Genre {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = normalize_token(s);
        Genre::ALL.into_iter().find(|g| g.as_str() == wanted).ok_or_else(|| GeneratorError::UnknownGenre(s.to_string()))
    }
}

impl Serialize for Genre {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Genre {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// The checkable condition behind a clue.
///
/// `Exact` matches concepts holding the `(relation, property)` pair;
/// `Relaxed` matches concepts holding the property under any relation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum AttributePredicate {
    Exact { relation: RelationKind, property: String },
    Relaxed { property: String },
}

impl AttributePredicate {
    pub fn exact(relation: RelationKind, property: &str) -> Self {
        AttributePredicate::Exact { relation, property: normalize_token(property) }
    }

    pub fn relaxed(property: &str) -> Self {
        AttributePredicate::Relaxed { property: normalize_token(property) }
    }

    pub fn property(&self) -> &str {
        match self {
            AttributePredicate::Exact { property, .. } | AttributePredicate::Relaxed { property } => property,
        }
    }

    pub fn relation(&self) -> Option<RelationKind> {
        match self {
            AttributePredicate::Exact { relation, .. } => Some(*relation),
            AttributePredicate::Relaxed { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AttributePredicate::Exact { .. })
    }

    /// The same predicate with its relation dropped.
    pub fn relax(&self) -> Self {
        AttributePredicate::Relaxed { property: self.property().to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Clue {
    pub surface: String,
    pub predicate: AttributePredicate,
    pub source: SemanticAttribute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Riddle {
    pub id: String,
    pub intended: ConceptId,
    pub genre: Genre,
    pub seed: u64,
    pub clues: Vec<Clue>,
}

impl Riddle {
    pub fn predicates(&self) -> impl Iterator<Item = &AttributePredicate> {
        self.clues.iter().map(|c| &c.predicate)
    }

    /// Pretty JSON followed by a newline; the on-disk riddle format.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("riddle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Structural invariants that hold for every generator-produced riddle.
    pub fn well_formed(&self) -> Result<(), String> {
        if self.clues.is_empty() {
            return Err("riddle has no clues".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for clue in &self.clues {
            if !seen.insert(&clue.source) {
                return Err(format!("duplicate source attribute {}", clue.source));
            }
            if clue.predicate.property() != clue.source.property() {
                return Err(format!("predicate property differs from source {}", clue.source));
            }
            if let Some(r) = clue.predicate.relation() {
                if r != clue.source.relation() {
                    return Err(format!("predicate relation differs from source {}", clue.source));
                }
            }
            if names_concept(&clue.surface, self.intended.as_str()) {
                return Err(format!("clue names the answer: {:?}", clue.surface));
            }
        }
        Ok(())
    }
}

/// Non-negative integer sampling weights per category, in
/// [`AttributeCategory::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryWeights(pub [u32; 4]);

impl CategoryWeights {
    pub fn get(&self, category: AttributeCategory) -> u32 {
        self.0[category.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|w| u64::from(*w)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub clue_count: usize,
    pub weights: BTreeMap<Genre, CategoryWeights>,
    pub lexicon: StyleLexicon,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self { clue_count: 3, weights: default_weights(), lexicon: crate::data::lexicon() }
    }
}

/// Descriptive riddles lean on function and appearance; metaphorical and
/// poetic ones on relations and behaviour.
pub fn default_weights() -> BTreeMap<Genre, CategoryWeights> {
    BTreeMap::from([
        (Genre::Descriptive, CategoryWeights([4, 4, 1, 1])),
        (Genre::Metaphorical, CategoryWeights([1, 1, 4, 4])),
        (Genre::Poetic, CategoryWeights([1, 2, 3, 4])),
        (Genre::Humorous, CategoryWeights([2, 3, 2, 3])),
        (Genre::Situational, CategoryWeights([3, 1, 3, 3])),
    ])
}

impl GeneratorConfig {
    pub fn with_clue_count(mut self, clue_count: usize) -> Self {
        self.clue_count = clue_count;
        self
    }

    pub fn with_lexicon(mut self, lexicon: StyleLexicon) -> Self {
        self.lexicon = lexicon;
        self
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        if self.clue_count == 0 {
            return Err(GeneratorError::InvalidConfig("clue_count must be positive".into()));
        }
        for genre in Genre::ALL {
            match self.weights.get(&genre) {
                Some(w) if w.total() > 0 => {}
                _ => {
                    return Err(GeneratorError::InvalidConfig(format!(
                        "weights for {genre} must sum to a positive value"
                    )))
                }
            }
        }
        Ok(())
    }

    fn weights_for(&self, genre: Genre) -> CategoryWeights {
        self.weights.get(&genre).copied().unwrap_or(CategoryWeights([1, 1, 1, 1]))
    }
}

/// True when the words of `name` occur contiguously among the words of `text`.
pub fn names_concept(text: &str, name: &str) -> bool {
    let words = |s: &str| -> Vec<String> {
        s.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
    };
    let needle = words(name);
    let hay = words(text);
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle.as_slice())
}

/// Picks up to `clue_count` distinct attributes.
///
/// Each draw samples a category in proportion to the genre weight (among
/// categories that still have attributes), then takes that category's most
/// distinctive remaining attribute, ties going to lexicographic order. If
/// every remaining category has zero weight the first one in category order
/// is used.
pub fn select_attributes(
    kb: &KnowledgeBase,
    profile: &SemanticProfile,
    genre: Genre,
    config: &GeneratorConfig,
    rng: &mut RiddleRng,
) -> Result<Vec<SemanticAttribute>, GeneratorError> {
    if profile.is_empty() {
        return Err(GeneratorError::EmptyProfile(profile.concept.to_string()));
    }
    if config.clue_count == 0 {
        return Err(GeneratorError::InvalidConfig("clue_count must be positive".into()));
    }
    let weights = config.weights_for(genre);
    let mut queues: Vec<(AttributeCategory, std::collections::VecDeque<SemanticAttribute>)> = profile
        .categories()
        .map(|(category, attrs)| {
            let mut ordered: Vec<_> = attrs.iter().cloned().collect();
            // Fewer holders means more distinctive.
            ordered.sort_by_cached_key(|a| {
                let holders = kb.holders(a.relation(), a.property()).len();
                (if holders == 0 { usize::MAX } else { holders }, a.clone())
            });
            (category, ordered.into())
        })
        .collect();

    let wanted = config.clue_count.min(profile.len());
    let mut picked = Vec::with_capacity(wanted);
    while picked.len() < wanted {
        let available: Vec<usize> = (0..queues.len()).filter(|&i| !queues[i].1.is_empty()).collect();
        let total: u64 = available.iter().map(|&i| u64::from(weights.get(queues[i].0))).sum();
        let chosen = if total == 0 {
            available[0]
        } else {
            let mut ticket = rng.below(total);
            let mut chosen = available[0];
            for &i in &available {
                let w = u64::from(weights.get(queues[i].0));
                if ticket < w {
                    chosen = i;
                    break;
                }
                ticket -= w;
            }
            chosen
        };
        picked.push(queues[chosen].1.pop_front().expect("available queue is non-empty"));
    }
    Ok(picked)
}

/// Descriptive clues are exact, metaphorical and poetic ones relaxed;
/// humorous and situational riddles open with one exact clue.
pub fn make_predicate(attribute: &SemanticAttribute, genre: Genre, position: usize) -> AttributePredicate {
    let exact = match genre {
        Genre::Descriptive => true,
        Genre::Metaphorical | Genre::Poetic => false,
        Genre::Humorous | Genre::Situational => position == 0,
    };
    if exact {
        AttributePredicate::exact(attribute.relation(), attribute.property())
    } else {
        AttributePredicate::relaxed(attribute.property())
    }
}

pub fn realize_clue(
    attribute: &SemanticAttribute,
    genre: Genre,
    lexicon: &StyleLexicon,
    rng: &mut RiddleRng,
) -> Result<String, GeneratorError> {
    realize_avoiding(attribute, genre, lexicon, rng, None)
}

fn realize_avoiding(
    attribute: &SemanticAttribute,
    genre: Genre,
    lexicon: &StyleLexicon,
    rng: &mut RiddleRng,
    forbidden: Option<&str>,
) -> Result<String, GeneratorError> {
    let category = attribute.category();
    let missing = || GeneratorError::MissingTemplate(genre, category);
    let candidates: Vec<String> = lexicon
        .templates(genre, category)
        .ok_or_else(missing)?
        .iter()
        .map(|t| fill_template(t, attribute))
        .filter(|s| forbidden.is_none_or(|name| !names_concept(s, name)))
        .collect();
    if candidates.is_empty() {
        return Err(missing());
    }
    let idx = rng.below(candidates.len() as u64) as usize;
    Ok(candidates[idx].clone())
}

fn riddle_id(concept: &ConceptId, genre: Genre, seed: u64, clues: &[Clue]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(concept.as_str().as_bytes());
    hasher.update([0]);
    hasher.update(genre.as_str().as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.update(serde_json::to_vec(clues).expect("clues serialize"));
    format!("r-{}", &hex_string(&hasher.finalize())[..16])
}

pub fn generate_riddle(
    kb: &KnowledgeBase,
    concept: &ConceptId,
    genre: Genre,
    config: &GeneratorConfig,
    seed: u64,
) -> Result<Riddle, GeneratorError> {
    config.validate()?;
    let profile = build_profile(kb, concept)?;
    // Attributes that spell out the answer would leak it.
    let usable = profile.filtered(|a| !names_concept(a.property(), concept.as_str()));
    if usable.is_empty() {
        return Err(GeneratorError::EmptyProfile(concept.to_string()));
    }
    let mut rng = RiddleRng::seeded(seed);
    let attributes = select_attributes(kb, &usable, genre, config, &mut rng)?;
    let clues = attributes
        .into_iter()
        .enumerate()
        .map(|(position, source)| {
            let surface = realize_avoiding(&source, genre, &config.lexicon, &mut rng, Some(concept.as_str()))?;
            let predicate = make_predicate(&source, genre, position);
            Ok(Clue { surface, predicate, source })
        })
        .collect::<Result<Vec<_>, GeneratorError>>()?;
    Ok(Riddle { id: riddle_id(concept, genre, seed, &clues), intended: concept.clone(), genre, seed, clues })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedPair {
    pub concept: String,
    pub genre: Genre,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Batch {
    pub riddles: Vec<Riddle>,
    pub skipped: Vec<SkippedPair>,
}

/// One riddle per `(concept, genre)` pair, concept-major. Each pair's seed is
/// derived from the batch seed, the concept name and the genre, so a pair's
/// riddle does not depend on what else is in the batch.
pub fn generate_batch<S: AsRef<str>>(
    kb: &KnowledgeBase,
    concepts: &[S],
    genres: &[Genre],
    config: &GeneratorConfig,
    seed: u64,
) -> Batch {
    let mut batch = Batch::default();
    for raw in concepts {
        let raw = raw.as_ref();
        for &genre in genres {
            let name = normalize_token(raw);
            let pair_seed = derive_seed(seed, &[&name, genre.as_str()]);
            let outcome = kb
                .concept(raw)
                .map_err(|e| GeneratorError::UnknownConcept(e.to_string()))
                .and_then(|c| generate_riddle(kb, &c, genre, config, pair_seed));
            match outcome {
                Ok(r) => batch.riddles.push(r),
                Err(e) => batch.skipped.push(SkippedPair { concept: name, genre, reason: e.to_string() }),
            }
        }
    }
    batch
}
