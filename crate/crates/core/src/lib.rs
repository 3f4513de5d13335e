//! Simulator of objective-collapse quantum dynamics on small tensor-product
//! Hilbert spaces.
//!
//! The crate provides dense state/operator algebra ([`hilbert`]), integrated
//! information of pure states ([`phi`]), continuous and discrete collapse
//! trajectories with seeded ensembles ([`dynamics`]), outcome statistics
//! ([`stats`]), and the named measurement setups that exercise them
//! ([`scenarios`]).

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod phi;
pub mod scenarios;
pub mod stats;

pub use error::{Error, Result};
