//! Schelling segregation dynamics on graphs.

pub mod bench;
pub mod count_first;
pub mod error;
pub mod indexed_set;
pub mod markov;
pub mod model;
pub mod oracle;
pub mod qubo;
pub mod rng;
pub mod stats;
pub mod topology;
pub mod trace;
pub mod traditional;
pub mod walks;

pub use error::{Error, Result};
