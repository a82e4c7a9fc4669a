pub mod corpus;
pub mod ctxstats;
pub mod data;
pub mod error;
pub mod featstruct;
pub mod learner;
pub mod pipeline;
pub mod rules;
pub mod synth;
mod text;
pub mod unknown;

pub use error::{Error, Location, Result};
