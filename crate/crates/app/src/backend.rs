//! Solver backend selection shared by the CLI and the service.

use std::path::Path;
use std::str::FromStr;

use riddler::eval::{LiveClient, MockClient, RecordedClient, SolverClient, SolverError};
use riddler::validator::AnswerSet;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Recorded,
    Live,
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(Self::Mock),
            "recorded" => Ok(Self::Recorded),
            "live" => Ok(Self::Live),
            other => Err(format!("unknown backend {other:?} (expected mock, recorded or live)")),
        }
    }
}

/// What the mock backend answers with.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MockMode {
    /// The validator's full answer set.
    #[default]
    Echo,
    /// Only the intended concept.
    Intended,
    /// Nothing at all.
    Empty,
}

impl FromStr for MockMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "echo" => Ok(Self::Echo),
            "intended" => Ok(Self::Intended),
            "empty" => Ok(Self::Empty),
            other => Err(format!("unknown mock mode {other:?} (expected echo, intended or empty)")),
        }
    }
}

pub fn build_client(
    kind: BackendKind,
    mock_mode: MockMode,
    fixture: Option<&Path>,
    answer_sets: &[AnswerSet],
) -> Result<Box<dyn SolverClient>, SolverError> {
    Ok(match kind {
        BackendKind::Mock => Box::new(match mock_mode {
            MockMode::Echo => MockClient::echo_answers(answer_sets),
            MockMode::Intended => MockClient::intended_only(answer_sets),
            MockMode::Empty => MockClient::empty(),
        }),
        BackendKind::Recorded => {
            let path =
                fixture.ok_or_else(|| SolverError::InvalidFixture("the recorded backend needs a fixture".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| SolverError::InvalidFixture(format!("{}: {e}", path.display())))?;
            Box::new(RecordedClient::from_jsonl(&text)?)
        }
        BackendKind::Live => Box::new(LiveClient::from_env()?),
    })
}
