//! Solver evaluation: can an external solver recover a riddle's full
//! answer set?
//!
//! Each riddle is put to the solver with a neutral prompt, the response is
//! split into individual answers, and those are matched against the
//! validator's answer set after normalization. Answers that name a broader
//! category of a valid answer are counted as abstraction merges rather than
//! misses or extras.

mod client;
mod normalize;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use client::{transcript_to_jsonl, MockClient, RecordedClient, SolverClient, SolverError, TranscriptRecord};
#[cfg(feature = "live")]
pub use client::{LiveClient, KEY_VAR, URL_VAR};
pub use normalize::{canonical_form, AnswerNormalizer, NormalizeError};

use crate::generator::{Genre, Riddle};
use crate::knowledge::{ConceptId, KnowledgeBase};
use crate::validator::{abstraction_members, answer_set, matches_member, AnswerSet, ValidatorError};
use crate::Fraction;

/// The request sentence every prompt ends with.
pub const ANSWER_REQUEST: &str = "all possible answers that fit the clues";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("riddle {0} has no clues")]
    NoClues(String),
    #[error("no riddles to evaluate")]
    EmptyInput,
    #[error("{cause} ({} riddles completed)", partial.riddles.len())]
    SolverUnavailable { cause: SolverError, partial: Box<EvalReport> },
}

pub fn build_prompt(riddle: &Riddle) -> Result<String, EvalError> {
    if riddle.clues.is_empty() {
        return Err(EvalError::NoClues(riddle.id.clone()));
    }
    let mut prompt = String::from("Here is a riddle.\n\n");
    for (i, clue) in riddle.clues.iter().enumerate() {
        prompt.push_str(&format!("{}. {}\n", i + 1, clue.surface));
    }
    prompt.push_str(&format!("\nList {ANSWER_REQUEST}.\n"));
    Ok(prompt)
}

fn strip_list_marker(item: &str) -> &str {
    let item = item.trim();
    let item = item.trim_start_matches(['-', '*', '•', '–']).trim_start();
    // "1." / "2)" / "(3)"
    let unparen = item.strip_prefix('(').unwrap_or(item);
    let digits = unparen.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &unparen[digits..];
        if let Some(rest) = rest.strip_prefix(['.', ')', ':']) {
            return rest.trim();
        }
    }
    item
}

/// Splits a free-text response into individual answers: one per line, list
/// bullets and numbering removed, comma-separated items split apart.
pub fn parse_solver_response(text: &str) -> Vec<String> {
    text.lines()
        .map(strip_list_marker)
        .flat_map(|line| line.split(','))
        .map(|piece| piece.trim().trim_end_matches(['.', ';', '!']).trim())
        .filter(|piece| !piece.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub riddle_id: String,
    pub retrieved: BTreeSet<ConceptId>,
    pub missed: BTreeSet<ConceptId>,
    pub extras: Vec<String>,
    pub abstraction_merges: usize,
    pub single_guess: bool,
    #[serde(with = "crate::fraction_serde")]
    pub coverage: Fraction,
}

/// Classifies each solver answer against the answer set. Duplicate answers
/// (after normalization) count once; answers that normalize to nothing are
/// ignored. An empty answer set has full coverage.
pub fn match_answers(
    kb: &KnowledgeBase,
    answers: &AnswerSet,
    solver_answers: &[String],
    normalizer: &AnswerNormalizer,
) -> MatchReport {
    let mut seen = BTreeSet::new();
    let mut retrieved = BTreeSet::new();
    let mut extras = Vec::new();
    let mut merges = 0;
    for raw in solver_answers {
        let Ok(token) = normalizer.normalize(raw) else { continue };
        if !seen.insert(token.clone()) {
            continue;
        }
        if let Some(member) = answers.answers.iter().find(|m| matches_member(normalizer, &token, m)) {
            retrieved.insert(member.clone());
        } else if abstraction_members(kb, &answers.answers, &token, normalizer) > 0 {
            merges += 1;
        } else {
            extras.push(token);
        }
    }
    let missed: BTreeSet<ConceptId> = answers.answers.difference(&retrieved).cloned().collect();
    let coverage = if answers.answers.is_empty() {
        Fraction::new(1, 1)
    } else {
        Fraction::new(retrieved.len() as u128, answers.answers.len() as u128)
    };
    MatchReport {
        riddle_id: answers.riddle_id.clone(),
        retrieved,
        missed,
        extras,
        abstraction_merges: merges,
        single_guess: solver_answers.len() == 1,
        coverage,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiddleOutcome {
    pub riddle_id: String,
    pub genre: Genre,
    pub intended: ConceptId,
    pub answers: BTreeSet<ConceptId>,
    pub report: MatchReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenreCoverage {
    pub genre: Genre,
    pub n: usize,
    #[serde(with = "crate::fraction_serde")]
    pub mean_coverage: Fraction,
    pub extras: usize,
    pub merges: usize,
    #[serde(with = "crate::fraction_serde")]
    pub overcommitment: Fraction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_genre: Vec<GenreCoverage>,
    #[serde(with = "crate::fraction_serde")]
    pub overall_mean_coverage: Fraction,
    pub total_extras: usize,
    pub total_merges: usize,
    #[serde(with = "crate::fraction_serde")]
    pub overcommitment_rate: Fraction,
    /// Per-riddle results, ordered by riddle id.
    pub riddles: Vec<RiddleOutcome>,
    /// Every prompt/response pair, ordered by riddle id.
    pub transcript: Vec<TranscriptRecord>,
}

fn mean(values: impl Iterator<Item = Fraction>, n: usize) -> Fraction {
    if n == 0 {
        return Fraction::new(0, 1);
    }
    values.fold(Fraction::new(0, 1), |acc, v| acc + v) / Fraction::from_integer(n as u128)
}

fn rate(hits: usize, n: usize) -> Fraction {
    if n == 0 {
        Fraction::new(0, 1)
    } else {
        Fraction::new(hits as u128, n as u128)
    }
}

impl EvalReport {
    /// Aggregates per-riddle outcomes; input order does not matter.
    pub fn from_outcomes(mut outcomes: Vec<RiddleOutcome>, mut transcript: Vec<TranscriptRecord>) -> Self {
        outcomes.sort_by(|a, b| a.riddle_id.cmp(&b.riddle_id));
        transcript.sort_by(|a, b| a.riddle_id.cmp(&b.riddle_id));
        let mut by_genre: BTreeMap<Genre, Vec<&RiddleOutcome>> = BTreeMap::new();
        for o in &outcomes {
            by_genre.entry(o.genre).or_default().push(o);
        }
        let per_genre = by_genre
            .into_iter()
            .map(|(genre, rows)| GenreCoverage {
                genre,
                n: rows.len(),
                mean_coverage: mean(rows.iter().map(|o| o.report.coverage), rows.len()),
                extras: rows.iter().map(|o| o.report.extras.len()).sum(),
                merges: rows.iter().map(|o| o.report.abstraction_merges).sum(),
                overcommitment: rate(rows.iter().filter(|o| o.report.single_guess).count(), rows.len()),
            })
            .collect();
        let n = outcomes.len();
        Self {
            per_genre,
            overall_mean_coverage: mean(outcomes.iter().map(|o| o.report.coverage), n),
            total_extras: outcomes.iter().map(|o| o.report.extras.len()).sum(),
            total_merges: outcomes.iter().map(|o| o.report.abstraction_merges).sum(),
            overcommitment_rate: rate(outcomes.iter().filter(|o| o.report.single_guess).count(), n),
            riddles: outcomes,
            transcript,
        }
    }

    pub fn genre(&self, genre: Genre) -> Option<&GenreCoverage> {
        self.per_genre.iter().find(|g| g.genre == genre)
    }

    /// Columns: genre, n, mean coverage, extras, merges, overcommitment.
    pub fn render_table(&self) -> String {
        let f = crate::fraction_to_f64;
        let mut out = format!(
            "{:<14}{:>4}{:>15}{:>8}{:>8}{:>16}\n",
            "genre", "n", "mean_coverage", "extras", "merges", "overcommitment"
        );
        for g in &self.per_genre {
            out.push_str(&format!(
                "{:<14}{:>4}{:>15.3}{:>8}{:>8}{:>16.3}\n",
                g.genre.as_str(),
                g.n,
                f(g.mean_coverage),
                g.extras,
                g.merges,
                f(g.overcommitment)
            ));
        }
        out.push_str(&format!(
            "{:<14}{:>4}{:>15.3}{:>8}{:>8}{:>16.3}\n",
            "overall",
            self.riddles.len(),
            f(self.overall_mean_coverage),
            self.total_extras,
            self.total_merges,
            f(self.overcommitment_rate)
        ));
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct CaseStudyOptions {
    /// Upper bound on concurrent solver calls.
    pub concurrency: usize,
    pub normalizer: AnswerNormalizer,
}

impl Default for CaseStudyOptions {
    fn default() -> Self {
        Self { concurrency: 4, normalizer: AnswerNormalizer::bundled() }
    }
}

/// Prompts `client` with every riddle and aggregates the matches.
///
/// On a solver failure the error carries a report over the riddles that did
/// complete, including their transcript.
pub fn run_case_study(
    kb: &KnowledgeBase,
    riddles: &[Riddle],
    client: &dyn SolverClient,
    options: &CaseStudyOptions,
) -> Result<EvalReport, EvalError> {
    if riddles.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let prepared = riddles
        .iter()
        .map(|r| {
            let answers = answer_set(kb, r).map_err(|e| match e {
                ValidatorError::NoClues => EvalError::NoClues(r.id.clone()),
                _ => unreachable!("answer_set only fails on missing clues"),
            })?;
            Ok((r, answers, build_prompt(r)?))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(options.concurrency.max(1)).build().expect("thread pool builds");
    let results: Vec<Result<(RiddleOutcome, TranscriptRecord), SolverError>> = pool.install(|| {
        prepared
            .par_iter()
            .map(|(riddle, answers, prompt)| {
                let response = client.complete(&riddle.id, prompt)?;
                let parsed = parse_solver_response(&response);
                let report = match_answers(kb, answers, &parsed, &options.normalizer);
                Ok((
                    RiddleOutcome {
                        riddle_id: riddle.id.clone(),
                        genre: riddle.genre,
                        intended: riddle.intended.clone(),
                        answers: answers.answers.clone(),
                        report,
                    },
                    TranscriptRecord { riddle_id: riddle.id.clone(), prompt: prompt.clone(), response },
                ))
            })
            .collect()
    });

    let mut outcomes = Vec::new();
    let mut transcript = Vec::new();
    let mut failure = None;
    for result in results {
        match result {
            Ok((o, t)) => {
                outcomes.push(o);
                transcript.push(t);
            }
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    let report = EvalReport::from_outcomes(outcomes, transcript);
    match failure {
        None => Ok(report),
        Some(cause) => Err(EvalError::SolverUnavailable { cause, partial: Box::new(report) }),
    }
}
