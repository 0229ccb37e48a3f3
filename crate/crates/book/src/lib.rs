//! The guide's chapters, included as module docs so `cargo test --doc`
//! runs every Rust listing in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/corpus.md")]
pub mod corpus {}
#[doc = include_str!("../../../book/src/vocabulary.md")]
pub mod vocabulary {}
#[doc = include_str!("../../../book/src/sgns.md")]
pub mod sgns {}
#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}
#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}
#[doc = include_str!("../../../book/src/clustering.md")]
pub mod clustering {}
#[doc = include_str!("../../../book/src/classification.md")]
pub mod classification {}
#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
