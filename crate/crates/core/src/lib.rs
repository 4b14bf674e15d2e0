pub mod analysis;
pub mod error;
pub mod experiment;
mod float_repr;
pub mod gap;
pub mod germ;
pub mod montecarlo;
pub mod oracle;
pub mod problem;
pub mod rademacher;
pub mod rng;
pub mod scenarios;

pub use error::{GermError, Result};
