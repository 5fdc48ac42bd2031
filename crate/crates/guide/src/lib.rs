//! The chapters of the `argaudit` book, compiled so that `cargo test` runs
//! every code listing in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/policies.md")]
pub mod policies {}

#[doc = include_str!("../../../book/src/frameworks.md")]
pub mod frameworks {}

#[doc = include_str!("../../../book/src/arguments.md")]
pub mod arguments {}

#[doc = include_str!("../../../book/src/dialogues.md")]
pub mod dialogues {}

#[doc = include_str!("../../../book/src/investigation.md")]
pub mod investigation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
