//! Finite models of tunnel frame-spaces and proliferative frame-spaces.
//!
//! Frames are finite set-lattices, points are completely prime filters, and
//! distances are exact extended rationals closed under min-plus composition.
//! The crate builds both kinds of space from raw interference or cost data,
//! translates between them, and checks the translation on concrete instances:
//! strict round trips, morphism transport, and conjugacy of the two Laplacians.

pub mod composition;
pub mod equivalence;
pub mod error;
pub mod frame;
pub mod io;
pub mod metric;
pub mod models;
pub mod prolif;
pub mod random;
pub mod space;
pub mod spectral;
pub mod subset;
pub mod tunnel;
pub mod weight;

pub use error::{Error, Result};
