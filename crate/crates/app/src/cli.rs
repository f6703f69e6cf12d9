//! Command-line entry point. Exit status: 0 on success, 1 on a domain
//! error, 2 on a usage error.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use riddler::eval::{run_case_study, transcript_to_jsonl, CaseStudyOptions, EvalError, EvalReport};
use riddler::generator::{generate_riddle, GeneratorConfig, Genre, Riddle, StyleLexicon};
use riddler::knowledge::{ingest, KnowledgeBase};
use riddler::semantics::build_profile;
use riddler::validator::{ambiguity_stats, answer_set};

use crate::backend::{build_client, BackendKind, MockMode};
use crate::service::{router, AppState, ServiceConfig};
use crate::store::RiddleStore;

#[derive(Debug, Parser)]
#[command(name = "riddler", version, about = "Generate, validate and evaluate knowledge-grounded riddles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct KbArg {
    /// Triple file to use instead of the bundled 60-concept knowledge base.
    #[arg(long, value_name = "PATH")]
    kb: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a triple file and report what was accepted.
    Ingest {
        #[arg(long, value_name = "PATH")]
        triples: PathBuf,
        /// Also write the ingest report as JSON.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Print a concept's attributes grouped by category.
    Profile {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long)]
        concept: String,
    },
    /// Generate one riddle and write it as JSON.
    Generate {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long)]
        concept: String,
        #[arg(long)]
        genre: Genre,
        #[arg(long)]
        seed: u64,
        /// Number of clues.
        #[arg(long, default_value_t = 3)]
        clues: usize,
        /// Template file to use instead of the bundled lexicon.
        #[arg(long, value_name = "PATH")]
        lexicon: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Print every concept that fits a riddle's clues.
    Validate {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long, value_name = "PATH")]
        riddle: PathBuf,
    },
    /// Print answer-set size statistics for a directory of riddles.
    Stats {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long, value_name = "DIR")]
        riddles: PathBuf,
    },
    /// Ask a solver for every riddle in a directory and score its answers.
    Eval {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long, value_name = "DIR")]
        riddles: PathBuf,
        /// mock, recorded or live.
        #[arg(long)]
        backend: BackendKind,
        /// Recorded prompt/response pairs (JSON lines) for the recorded backend.
        #[arg(long, value_name = "PATH")]
        fixture: Option<PathBuf>,
        /// What the mock backend answers: echo, intended or empty.
        #[arg(long, default_value = "echo")]
        mock_mode: MockMode,
        /// Where to write the prompt/response transcript (JSON lines).
        #[arg(long, value_name = "PATH")]
        transcript: Option<PathBuf>,
        /// Maximum concurrent solver calls.
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        /// Where to write the full report as JSON.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Run the HTTP play service.
    Serve {
        #[command(flatten)]
        kb: KbArg,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, value_name = "DIR")]
        store: PathBuf,
        /// Wrong guesses before the answers are revealed.
        #[arg(long, default_value_t = 5)]
        max_guesses: usize,
        /// Allow full riddles (with predicates) via `?debug=true`.
        #[arg(long)]
        debug: bool,
    },
}

pub fn main() -> ExitCode {
    // clap exits with status 2 on usage errors and 0 for --help/--version.
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_kb(arg: &KbArg) -> Result<KnowledgeBase> {
    let Some(path) = &arg.kb else {
        return Ok(riddler::data::kb60());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading knowledge base {}", path.display()))?;
    let (kb, report) = KnowledgeBase::from_text(&text).with_context(|| format!("ingesting {}", path.display()))?;
    if !report.rejected.is_empty() {
        eprintln!("warning: {} malformed line(s) in {} were skipped", report.rejected.len(), path.display());
    }
    Ok(kb)
}

fn read_riddle(path: &Path) -> Result<Riddle> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Riddle::from_json(&text).with_context(|| format!("parsing riddle {}", path.display()))
}

/// Every `*.json` riddle in `dir`, in file-name order.
fn read_riddle_dir(dir: &Path) -> Result<Vec<Riddle>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no riddle files (*.json) in {}", dir.display());
    }
    paths.iter().map(|p| read_riddle(p)).collect()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { triples, report } => {
            let text = fs::read_to_string(&triples).with_context(|| format!("reading {}", triples.display()))?;
            let (kb, summary) = ingest(text.lines())?;
            println!(
                "{} concepts, {} triples ({} duplicates, {} comment/blank lines, {} rejected)",
                kb.concept_count(),
                kb.triple_count(),
                summary.duplicates,
                summary.comments,
                summary.rejected.len()
            );
            println!("digest {}", kb.digest());
            for r in &summary.rejected {
                eprintln!("line {}: {}", r.line, r.reason);
            }
            if let Some(path) = report {
                let body = serde_json::json!({
                    "concepts": kb.concept_count(),
                    "triples": kb.triple_count(),
                    "digest": kb.digest(),
                    "report": summary,
                });
                write(&path, &(serde_json::to_string_pretty(&body)? + "\n"))?;
            }
        }
        Command::Profile { kb, concept } => {
            let kb = load_kb(&kb)?;
            let profile = build_profile(&kb, &kb.concept(&concept)?)?;
            for (category, attrs) in profile.categories() {
                for a in attrs {
                    println!("{}\t{}\t{}", category.as_str(), a.relation().as_str(), a.property());
                }
            }
        }
        Command::Generate { kb, concept, genre, seed, clues, lexicon, out } => {
            let kb = load_kb(&kb)?;
            let mut config = GeneratorConfig::default().with_clue_count(clues);
            if let Some(path) = lexicon {
                let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                config = config.with_lexicon(StyleLexicon::from_jsonl(&text)?);
            }
            let riddle = generate_riddle(&kb, &kb.concept(&concept)?, genre, &config, seed)?;
            write(&out, &riddle.to_json())?;
            println!("{}", riddle.id);
        }
        Command::Validate { kb, riddle } => {
            let kb = load_kb(&kb)?;
            let set = answer_set(&kb, &read_riddle(&riddle)?)?;
            println!("{}", set.sorted_list());
        }
        Command::Stats { kb, riddles } => {
            let kb = load_kb(&kb)?;
            let riddles = read_riddle_dir(&riddles)?;
            let sets = riddles.iter().map(|r| answer_set(&kb, r)).collect::<Result<Vec<_>, _>>()?;
            print!("{}", ambiguity_stats(&riddles, &sets)?.render_table());
        }
        Command::Eval { kb, riddles, backend, fixture, mock_mode, transcript, concurrency, out } => {
            let kb = load_kb(&kb)?;
            let riddles = read_riddle_dir(&riddles)?;
            let sets = riddles.iter().map(|r| answer_set(&kb, r)).collect::<Result<Vec<_>, _>>()?;
            let client = build_client(backend, mock_mode, fixture.as_deref(), &sets)?;
            let options = CaseStudyOptions { concurrency, ..CaseStudyOptions::default() };
            let save = |report: &EvalReport| -> Result<()> {
                write(&out, &report.to_json())?;
                if let Some(path) = &transcript {
                    write(path, &transcript_to_jsonl(&report.transcript))?;
                }
                Ok(())
            };
            match run_case_study(&kb, &riddles, client.as_ref(), &options) {
                Ok(report) => {
                    save(&report)?;
                    print!("{}", report.render_table());
                }
                Err(EvalError::SolverUnavailable { cause, partial }) => {
                    save(&partial)?;
                    bail!(
                        "{cause}; partial report over {} riddle(s) written to {}",
                        partial.riddles.len(),
                        out.display()
                    );
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Serve { kb, port, host, store, max_guesses, debug } => {
            let kb = load_kb(&kb)?;
            let store = RiddleStore::open(&store, &kb.digest())?;
            let config = ServiceConfig { max_guesses, debug, ..ServiceConfig::default() };
            let state = Arc::new(AppState::new(kb, store, config)?);
            let addr: SocketAddr =
                format!("{host}:{port}").parse().with_context(|| format!("bad address {host}:{port}"))?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
                println!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                Ok::<_, anyhow::Error>(())
            })?;
        }
    }
    Ok(())
}
