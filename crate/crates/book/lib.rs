//! Code listings from the guide under `book/src`, compiled and run as doctests.

#[doc = include_str!("../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../book/src/pooling.md")]
pub mod pooling {}

#[doc = include_str!("../../book/src/entailment.md")]
pub mod entailment {}

#[doc = include_str!("../../book/src/weighted.md")]
pub mod weighted {}

#[doc = include_str!("../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../README.md")]
pub mod readme {}
