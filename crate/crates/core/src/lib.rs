pub mod causal;
pub mod cli;
pub mod comparison;
pub mod curvature;
pub mod error;
pub mod friedrichs;
pub mod grid;
pub mod metric;
pub mod mollify;

pub use error::{Error, Result};
