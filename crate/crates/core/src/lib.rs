pub mod analysis;
pub mod baselines;
pub mod classify;
pub mod cluster;
pub mod corpus;
pub mod embfile;
pub mod error;
pub mod projection;
pub mod sgns;
pub mod trainer;
pub mod vocab;

pub use error::{Error, Result};
