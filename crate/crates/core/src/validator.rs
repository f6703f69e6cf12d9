//! Answer extraction: every concept consistent with a riddle's clues.
//!
//! The validator reads the structured predicates carried by each clue, never
//! the surface text. It does not grade riddles; it only enumerates answers,
//! classifies guesses against them and summarizes answer-set sizes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{AnswerNormalizer, NormalizeError};
use crate::generator::{AttributePredicate, Genre, Riddle};
use crate::knowledge::{ConceptId, KnowledgeBase};
use crate::Fraction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidatorError {
    #[error("riddle has no clues")]
    NoClues,
    #[error("guess is empty")]
    EmptyGuess,
    #[error("no riddles to summarize")]
    EmptyInput,
    #[error("{riddles} riddles but {answer_sets} answer sets")]
    Misaligned { riddles: usize, answer_sets: usize },
}

impl From<NormalizeError> for ValidatorError {
    fn from(_: NormalizeError) -> Self {
        ValidatorError::EmptyGuess
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSet {
    pub riddle_id: String,
    pub answers: BTreeSet<ConceptId>,
    pub intended: ConceptId,
}

impl AnswerSet {
    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    /// Answers joined with `", "` in lexicographic order.
    pub fn sorted_list(&self) -> String {
        self.answers.iter().map(ConceptId::as_str).collect::<Vec<_>>().join(", ")
    }
}

pub fn satisfies(kb: &KnowledgeBase, concept: &ConceptId, predicate: &AttributePredicate) -> bool {
    match predicate {
        AttributePredicate::Exact { relation, property } => kb.holds(concept, *relation, property),
        AttributePredicate::Relaxed { property } => {
            kb.attributes_of(concept).is_some_and(|attrs| attrs.iter().any(|(_, p)| p == property))
        }
    }
}

/// Intersection of the index lookups for each predicate, smallest first.
pub fn answers_for(
    kb: &KnowledgeBase,
    predicates: &[AttributePredicate],
) -> Result<BTreeSet<ConceptId>, ValidatorError> {
    let mut lookups: Vec<&BTreeSet<ConceptId>> = predicates
        .iter()
        .map(|p| match p {
            AttributePredicate::Exact { relation, property } => kb.holders(*relation, property),
            AttributePredicate::Relaxed { property } => kb.property_holders(property),
        })
        .collect();
    lookups.sort_by_key(|s| s.len());
    let (first, rest) = lookups.split_first().ok_or(ValidatorError::NoClues)?;
    Ok(first.iter().filter(|c| rest.iter().all(|s| s.contains(*c))).cloned().collect())
}

/// Reference enumeration: test every concept against every predicate.
pub fn answers_for_naive(
    kb: &KnowledgeBase,
    predicates: &[AttributePredicate],
) -> Result<BTreeSet<ConceptId>, ValidatorError> {
    if predicates.is_empty() {
        return Err(ValidatorError::NoClues);
    }
    Ok(kb.concepts().filter(|c| predicates.iter().all(|p| satisfies(kb, c, p))).cloned().collect())
}

pub fn answer_set(kb: &KnowledgeBase, riddle: &Riddle) -> Result<AnswerSet, ValidatorError> {
    let predicates: Vec<_> = riddle.predicates().cloned().collect();
    Ok(AnswerSet {
        riddle_id: riddle.id.clone(),
        answers: answers_for(kb, &predicates)?,
        intended: riddle.intended.clone(),
    })
}

pub fn answer_set_naive(kb: &KnowledgeBase, riddle: &Riddle) -> Result<AnswerSet, ValidatorError> {
    let predicates: Vec<_> = riddle.predicates().cloned().collect();
    Ok(AnswerSet {
        riddle_id: riddle.id.clone(),
        answers: answers_for_naive(kb, &predicates)?,
        intended: riddle.intended.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuessVerdict {
    Intended,
    AlternativeValid,
    AbstractionMerge,
    Invalid,
}

impl GuessVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            GuessVerdict::Intended => "intended",
            GuessVerdict::AlternativeValid => "alternative-valid",
            GuessVerdict::AbstractionMerge => "abstraction-merge",
            GuessVerdict::Invalid => "invalid",
        }
    }

    pub fn is_correct(self) -> bool {
        matches!(self, GuessVerdict::Intended | GuessVerdict::AlternativeValid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessPolicy {
    /// How many answers a guess must generalize before it counts as an
    /// abstraction merge.
    pub merge_min_members: usize,
}

impl Default for GuessPolicy {
    fn default() -> Self {
        Self { merge_min_members: 1 }
    }
}

/// Number of answers whose hypernym closure contains `token` (already
/// normalized). Closure labels are compared after normalization.
pub fn abstraction_members(
    kb: &KnowledgeBase,
    answers: &BTreeSet<ConceptId>,
    token: &str,
    normalizer: &AnswerNormalizer,
) -> usize {
    answers
        .iter()
        .filter(|member| {
            kb.hypernym_closure(member)
                .is_ok_and(|labels| labels.iter().any(|l| normalizer.normalize(l).is_ok_and(|n| n == token)))
        })
        .count()
}

pub(crate) fn matches_member(normalizer: &AnswerNormalizer, token: &str, member: &ConceptId) -> bool {
    normalizer.normalize(member.as_str()).is_ok_and(|n| n == token)
}

pub fn check_guess(
    kb: &KnowledgeBase,
    answers: &AnswerSet,
    guess: &str,
    normalizer: &AnswerNormalizer,
    policy: GuessPolicy,
) -> Result<GuessVerdict, ValidatorError> {
    let token = normalizer.normalize(guess)?;
    if matches_member(normalizer, &token, &answers.intended) {
        return Ok(GuessVerdict::Intended);
    }
    if answers.answers.iter().any(|m| matches_member(normalizer, &token, m)) {
        return Ok(GuessVerdict::AlternativeValid);
    }
    if abstraction_members(kb, &answers.answers, &token, normalizer) >= policy.merge_min_members.max(1) {
        return Ok(GuessVerdict::AbstractionMerge);
    }
    Ok(GuessVerdict::Invalid)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguityRow {
    /// Genre name, or `overall`.
    pub genre: String,
    pub count: usize,
    pub median: usize,
    #[serde(with = "crate::fraction_serde")]
    pub mean: Fraction,
    pub min: usize,
    pub max: usize,
}

impl AmbiguityRow {
    fn from_sizes(genre: String, mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable();
        let count = sizes.len();
        let total: usize = sizes.iter().sum();
        Self {
            genre,
            count,
            median: lower_median(&sizes),
            mean: Fraction::new(total as u128, count as u128),
            min: sizes[0],
            max: sizes[count - 1],
        }
    }
}

/// Lower of the two central values for even counts. `sorted` must be
/// non-empty and ascending.
pub fn lower_median(sorted: &[usize]) -> usize {
    sorted[(sorted.len() - 1) / 2]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguityStats {
    pub per_genre: Vec<AmbiguityRow>,
    pub overall: AmbiguityRow,
}

impl AmbiguityStats {
    pub fn genre(&self, genre: Genre) -> Option<&AmbiguityRow> {
        self.per_genre.iter().find(|r| r.genre == genre.as_str())
    }

    /// Fixed column order: genre, count, median, mean, min, max.
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<14}{:>7}{:>8}{:>8}{:>6}{:>6}\n", "genre", "count", "median", "mean", "min", "max");
        for row in self.per_genre.iter().chain(std::iter::once(&self.overall)) {
            out.push_str(&format!(
                "{:<14}{:>7}{:>8}{:>8.2}{:>6}{:>6}\n",
                row.genre,
                row.count,
                row.median,
                crate::fraction_to_f64(row.mean),
                row.min,
                row.max
            ));
        }
        out
    }
}

pub fn ambiguity_stats(riddles: &[Riddle], answer_sets: &[AnswerSet]) -> Result<AmbiguityStats, ValidatorError> {
    if riddles.is_empty() {
        return Err(ValidatorError::EmptyInput);
    }
    if riddles.len() != answer_sets.len() {
        return Err(ValidatorError::Misaligned { riddles: riddles.len(), answer_sets: answer_sets.len() });
    }
    let mut by_genre: BTreeMap<Genre, Vec<usize>> = BTreeMap::new();
    for (riddle, answers) in riddles.iter().zip(answer_sets) {
        by_genre.entry(riddle.genre).or_default().push(answers.len());
    }
    let all: Vec<usize> = answer_sets.iter().map(AnswerSet::len).collect();
    Ok(AmbiguityStats {
        per_genre: by_genre
            .into_iter()
            .map(|(g, sizes)| AmbiguityRow::from_sizes(g.as_str().to_string(), sizes))
            .collect(),
        overall: AmbiguityRow::from_sizes("overall".into(), all),
    })
}
