//! The `argaudit` command line: `audit`, `solve` and `topics`.
//!
//! Exit codes: 0 success, 2 policy or APX syntax error, 3 data error,
//! 4 configuration error, 5 internal error, 6 too many extensions.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::af::{emit_apx, emit_dot, parse_apx, AfError, Extension, Semantics, Solver};
use crate::catalog::load_catalog;
use crate::config::AuditConfig;
use crate::dialogue::transcript_json;
use crate::investigation::{interrogate, InvestigatorAgent, NonMonotonicityReport, Status, SuspectAgent, Verdict};
use crate::policy::{parse_policy, Atom, Program};
use crate::recommender::{DescriptionMap, ToyRecommender, VarietyDescriber};
use crate::system::SuspectSystem;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SYNTAX: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;
pub const EXIT_OVERFLOW: i32 = 6;

#[derive(Debug, Parser)]
#[command(
    name = "argaudit",
    about = "Audit an opaque recommender against a policy with argumentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interrogate the recommender on every topic of a policy.
    Audit {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        movies: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured semantics.
        #[arg(long)]
        semantics: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the extensions of an argumentation framework in APX format.
    Solve {
        #[arg(long)]
        af: PathBuf,
        #[arg(long, default_value = "stable")]
        semantics: String,
        /// Also write the graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// List the topics the investigator derives from a policy.
    Topics {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
}

/// A failure with its exit code and one-line diagnostic.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn af_code(e: &AfError) -> i32 {
    match e {
        AfError::Syntax { .. } => EXIT_SYNTAX,
        AfError::ExtensionOverflow(_) => EXIT_OVERFLOW,
        AfError::UnknownSemantics(_) => EXIT_CONFIG,
        AfError::UndeclaredArgument(..) | AfError::TooLarge { .. } => EXIT_INTERNAL,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Syntax(_) => EXIT_SYNTAX,
            Error::Data(_) => EXIT_DATA,
            Error::Config(_) | Error::Topic(_) => EXIT_CONFIG,
            Error::Af(af) => af_code(af),
            _ => EXIT_INTERNAL,
        };
        Failure::new(code, e.to_string())
    }
}

fn read(path: &Path, code: i32) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(code, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::new(EXIT_INTERNAL, format!("{}: {e}", path.display())))
}

fn load_policy(path: &Path) -> Result<Program, Failure> {
    let text = read(path, EXIT_SYNTAX)?;
    parse_policy(&text).map_err(|e| Failure::new(EXIT_SYNTAX, format!("{}: {e}", path.display())))
}

fn load_config(path: &Path, policy: &Program) -> Result<AuditConfig, Failure> {
    let text = read(path, EXIT_CONFIG)?;
    let config =
        AuditConfig::parse(&text).map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
    config
        .validate(policy)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {}", path.display(), e.message)))?;
    Ok(config)
}

fn parse_semantics(name: &str) -> Result<Semantics, Failure> {
    name.parse()
        .map_err(|e: AfError| Failure::new(EXIT_CONFIG, e.to_string()))
}

/// Runs the command line on `args` (including the program name) and returns
/// the exit code. Diagnostics go to `err`, everything else to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SYNTAX } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Audit {
            policy,
            movies,
            ratings,
            config,
            semantics,
            out: dir,
        } => cmd_audit(&policy, &movies, &ratings, &config, semantics.as_deref(), &dir, out),
        Command::Solve { af, semantics, dot } => cmd_solve(&af, &semantics, dot.as_deref(), out),
        Command::Topics { policy, config } => cmd_topics(&policy, &config, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn cmd_audit(
    policy_path: &Path,
    movies_path: &Path,
    ratings_path: &Path,
    config_path: &Path,
    semantics: Option<&str>,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let policy = load_policy(policy_path)?;
    let config = load_config(config_path, &policy)?;
    let mut settings = config.settings();
    if let Some(name) = semantics {
        settings.semantics = parse_semantics(name)?;
    }

    let movies = read(movies_path, EXIT_DATA)?;
    let ratings = read(ratings_path, EXIT_DATA)?;
    let (catalog, ratings) = load_catalog(&movies, &ratings).map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
    let catalog = Arc::new(catalog);
    let describer = VarietyDescriber::new(Arc::clone(&catalog), config.thresholds);
    let range = describer.range();
    if let Some(unknown) = config.descriptor_groups.keys().find(|d| !range.contains(*d)) {
        return Err(Failure::new(
            EXIT_CONFIG,
            format!(
                "{}: descriptor '{unknown}' is never produced by the description map",
                config_path.display()
            ),
        ));
    }

    let system = Arc::new(SuspectSystem::new(ToyRecommender::new(
        Arc::clone(&catalog),
        Arc::new(ratings),
    )));
    let investigator = InvestigatorAgent::new(policy.clone(), config.topic_strategy());
    let suspect = SuspectAgent::new(policy, system, Arc::new(describer), catalog, config.sampling);
    let verdict = interrogate(&investigator, &suspect, &settings)?;

    fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_INTERNAL, format!("{}: {e}", dir.display())))?;
    let mut files = Vec::with_capacity(verdict.topics.len());
    for (i, topic) in verdict.topics.iter().enumerate() {
        let stem = format!("topic_{:02}", i + 1);
        let names = TopicFiles {
            transcript: format!("{stem}.transcript.json"),
            af: format!("{stem}.apx"),
            dot: format!("{stem}.dot"),
        };
        let outcome = &topic.outcome;
        let accepted = sceptically_accepted(&outcome.extensions);
        write_file(&dir.join(&names.transcript), &transcript_json(&outcome.dialogue))?;
        write_file(&dir.join(&names.af), &emit_apx(&outcome.af.graph))?;
        write_file(&dir.join(&names.dot), &emit_dot(&outcome.af.graph, accepted.as_ref()))?;
        files.push(names);
    }
    write_file(&dir.join("report.json"), &report_json(&verdict, &files))?;

    let count = |s: Status| verdict.topics.iter().filter(|t| t.outcome.status.value == s).count();
    writeln!(
        out,
        "verdict: {} ({} topics: {} sceptical, {} credulous, {} rejected; {} semantics)",
        verdict.value,
        verdict.topics.len(),
        count(Status::Sceptical),
        count(Status::Credulous),
        count(Status::Rejected),
        verdict.semantics,
    )
    .map_err(|e| Failure::new(EXIT_INTERNAL, e.to_string()))
}

/// Arguments in every extension, if there is any extension.
fn sceptically_accepted(extensions: &[Extension]) -> Option<Extension> {
    let (first, rest) = extensions.split_first()?;
    Some(
        first
            .members()
            .iter()
            .filter(|id| rest.iter().all(|e| e.contains(id)))
            .cloned()
            .collect(),
    )
}

struct TopicFiles {
    transcript: String,
    af: String,
    dot: String,
}

#[derive(Serialize)]
struct ReportWire<'a> {
    verdict: &'static str,
    semantics: &'static str,
    topics: Vec<TopicWire<'a>>,
    non_monotonicity: &'a NonMonotonicityReport,
}

#[derive(Serialize)]
struct TopicWire<'a> {
    label: &'a str,
    input_class: Vec<String>,
    descriptors: &'a BTreeSet<Atom>,
    status: Status,
    consistent: bool,
    num_arguments: usize,
    num_attacks: usize,
    num_extensions: usize,
    concluded_in_every_extension: &'a BTreeSet<Atom>,
    concluded_in_some_extension: &'a BTreeSet<Atom>,
    coverage: Coverage,
    transcript: &'a str,
    af: &'a str,
    dot: &'a str,
}

#[derive(Serialize)]
struct Coverage {
    sampled: usize,
    matching: usize,
}

/// The verdict as pretty-printed JSON; file paths are relative to the
/// report's own directory.
fn report_json(verdict: &Verdict, files: &[TopicFiles]) -> String {
    let wire = ReportWire {
        verdict: verdict.value.name(),
        semantics: verdict.semantics.name(),
        topics: verdict
            .topics
            .iter()
            .zip(files)
            .map(|(t, f)| {
                let o = &t.outcome;
                TopicWire {
                    label: &o.topic.label,
                    input_class: o
                        .topic
                        .input_class
                        .predicates()
                        .iter()
                        .map(ToString::to_string)
                        .collect(),
                    descriptors: &o.topic.descriptors,
                    status: o.status.value,
                    consistent: t.consistent,
                    num_arguments: o.af.arguments.len(),
                    num_attacks: o.af.graph.num_attacks(),
                    num_extensions: o.status.num_extensions,
                    concluded_in_every_extension: &o.status.intersection,
                    concluded_in_some_extension: &o.status.union,
                    coverage: Coverage {
                        sampled: o.sample.inputs.len(),
                        matching: o.sample.matching,
                    },
                    transcript: &f.transcript,
                    af: &f.af,
                    dot: &f.dot,
                }
            })
            .collect(),
        non_monotonicity: &verdict.non_monotonicity,
    };
    let mut text = serde_json::to_string_pretty(&wire).expect("report serialises");
    text.push('\n');
    text
}

fn cmd_solve(af_path: &Path, semantics: &str, dot: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let semantics = parse_semantics(semantics)?;
    let text = read(af_path, EXIT_SYNTAX)?;
    let graph = parse_apx(&text).map_err(|e| Failure::new(af_code(&e), format!("{}: {e}", af_path.display())))?;
    let extensions = Solver::default()
        .extensions(&graph, semantics)
        .map_err(|e| Failure::new(af_code(&e), e.to_string()))?;
    if let Some(path) = dot {
        write_file(path, &emit_dot(&graph, None))?;
    }
    for e in extensions {
        writeln!(out, "{e}").map_err(|e| Failure::new(EXIT_INTERNAL, e.to_string()))?;
    }
    Ok(())
}

fn cmd_topics(policy_path: &Path, config_path: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let policy = load_policy(policy_path)?;
    let config = load_config(config_path, &policy)?;
    let topics = InvestigatorAgent::new(policy, config.topic_strategy())
        .topics()
        .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    let io = |e: std::io::Error| Failure::new(EXIT_INTERNAL, e.to_string());
    for (i, t) in topics.iter().enumerate() {
        let descriptors: Vec<String> = t.descriptors.iter().map(ToString::to_string).collect();
        writeln!(out, "topic {}: {}", i + 1, t.label).map_err(io)?;
        writeln!(out, "  class: {}", t.input_class).map_err(io)?;
        writeln!(out, "  descriptors: {}", descriptors.join(", ")).map_err(io)?;
    }
    writeln!(out, "{} topics", topics.len()).map_err(io)
}
