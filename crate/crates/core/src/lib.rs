pub mod error;
pub mod tensor;

pub use error::{Error, Result};
pub mod text;
pub mod model;
pub mod data;
pub mod train;
pub mod checks;
pub mod cli;
