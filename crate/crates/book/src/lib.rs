//! Compiles the guide's code listings as doctests, one module per chapter so
//! a failure points at its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/knowledge.md")]
pub mod knowledge {}
#[doc = include_str!("../../../book/src/semantics.md")]
pub mod semantics {}
#[doc = include_str!("../../../book/src/generation.md")]
pub mod generation {}
#[doc = include_str!("../../../book/src/validation.md")]
pub mod validation {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/service.md")]
pub mod service {}
