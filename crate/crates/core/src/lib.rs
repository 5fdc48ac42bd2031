//! Auditing opaque learning systems with argumentation.
//!
//! An investigator derives topics from a declared policy and questions the
//! suspect system on each one. The suspect answers with black-box arguments
//! (an input together with a descriptor of the system's output on it), the
//! arguments are arranged into an abstract argumentation framework, and the
//! framework's extensions decide whether the suspect's behaviour supports,
//! credulously supports or contradicts the policy.
//!
//! ```
//! use argaudit::af::{ArgGraph, Semantics, Solver};
//!
//! let g = ArgGraph::new(["a", "b", "c"], [("a", "b"), ("b", "c")]).unwrap();
//! let exts = Solver::default().extensions(&g, Semantics::Stable).unwrap();
//! assert_eq!(exts.len(), 1);
//! assert_eq!(exts[0].to_string(), "[a,c]");
//! ```

pub mod af;
pub mod argument;
pub mod catalog;
pub mod cli;
pub mod config;
pub mod dialogue;
pub mod investigation;
pub mod policy;
pub mod recommender;
pub mod system;

use thiserror::Error;

/// Everything that can stop an audit.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] policy::SyntaxError),
    #[error(transparent)]
    Data(#[from] catalog::DataError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Af(#[from] af::AfError),
    #[error(transparent)]
    Evaluation(#[from] system::EvaluationError),
    #[error(transparent)]
    UnknownInput(#[from] system::UnknownInput),
    #[error(transparent)]
    Topic(#[from] investigation::TopicError),
    #[error(transparent)]
    Dialogue(#[from] dialogue::DialogueError),
    #[error("description of the output on {input} failed: {message}")]
    Description { input: system::InputPoint, message: String },
    #[error("generated dialogue is malformed: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    MalformedDialogue(Vec<dialogue::Violation>),
}
