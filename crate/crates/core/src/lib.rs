pub mod cyclotomic;
pub mod error;
pub mod gcd;
pub mod groups;
pub mod hsp;
pub mod json;
pub mod lattice;
pub mod state;

pub use error::{Error, Result};
