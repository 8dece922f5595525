//! Exact symbolic-numeric workbench for generalized functions.

pub mod colombeau;
pub mod error;
pub mod expr;
pub mod formal;
pub mod gauge;
pub mod poly;
pub mod rational;
pub mod sample;
pub mod sheaf;
pub mod universal;

pub use error::{GfError, Result};
