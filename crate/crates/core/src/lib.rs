//! Exact computation with modules over finite-spectrum rings and presheaves
//! on their specialization posets.

pub mod arith;
pub mod assoc;
pub mod equivalence;
pub mod error;
pub mod limits;
pub mod linalg;
pub mod localization;
pub mod module;
pub mod presheaf;
mod par;
pub mod ring;
pub mod spectrum;

pub use error::{Error, Result};
