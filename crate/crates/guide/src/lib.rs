//! Compiles the chapters of the `book/` guide so their code listings run as
//! doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/simulator.md")]
pub mod simulator {}

#[doc = include_str!("../../../book/src/behaviors.md")]
pub mod behaviors {}

#[doc = include_str!("../../../book/src/environment.md")]
pub mod environment {}

#[doc = include_str!("../../../book/src/learners.md")]
pub mod learners {}

#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/reproducibility.md")]
pub mod reproducibility {}
