//! Partial-exclusion repair for Reed-Solomon codes over binary extension fields.

pub mod error;
pub mod factor;
mod factor_table;
pub mod field;

pub use error::{Error, Result};
pub mod io;
pub mod rs;
pub mod constructions;
pub mod fixtures;
pub mod repair;
pub mod bounds;
pub mod sim;
