pub mod bounds;
pub mod config;
pub mod dist;
pub mod entropy;
pub mod error;
pub mod sim;
pub mod specfun;

pub use error::{Error, Result};
