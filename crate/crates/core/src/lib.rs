pub mod backlund;
pub mod cli;
pub mod error;
pub mod exterior;
pub mod frameverify;
pub mod ma_invariants;
pub mod symexpr;
pub mod variational;

pub use error::{Error, Result};
