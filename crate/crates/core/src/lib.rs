pub mod candidates;
pub mod cli;
pub mod constraints;
pub mod coreset;
pub mod error;
pub mod meta;
pub mod flowlp;
pub mod model;
pub mod oracle;
mod rng;

pub use error::{Error, Result};
