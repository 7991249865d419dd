pub mod circuit;
pub mod error;
pub mod models;
pub mod nn;
pub mod rng;
pub mod sim;
pub mod spectrum;
pub mod tasks;
pub mod verify;

pub use error::{Error, Result};
