pub mod analysis;
pub mod cli;
pub mod encoding;
pub mod error;
pub mod markov;
pub mod netsim;
pub mod rates;
pub mod rng;

pub use error::{Error, Result};
