pub mod circuits;
pub mod costs;
pub mod error;
pub mod haar;
pub mod harness;
pub mod landscape;
pub mod linalg;
pub mod random;
pub mod seed;

pub use error::{Error, Result};
