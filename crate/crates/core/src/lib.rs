pub mod direction;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod harness;
pub mod merit;
pub mod objective;
pub mod plot;
pub mod problems;

pub use error::{Error, Result};
