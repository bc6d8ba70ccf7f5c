//! Guide chapters, compiled as doctests.
//!
//! mdbook cannot build listings against a local crate, so each chapter is
//! pulled in here as the docs of an empty module and `cargo test` runs its
//! code blocks. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/actions-and-rewards.md")]
pub mod actions_and_rewards {}

#[doc = include_str!("../../../book/src/tile-coding.md")]
pub mod tile_coding {}

#[doc = include_str!("../../../book/src/learning.md")]
pub mod learning {}

#[doc = include_str!("../../../book/src/allocation.md")]
pub mod allocation {}

#[doc = include_str!("../../../book/src/environment.md")]
pub mod environment {}

#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
