//! Simulation library for conformal reflecting surfaces on vehicles.
//!
//! The pipeline runs in layers: [`geometry`] builds cylindrical element
//! layouts, [`phase_design`] assigns per-element reflection phases,
//! [`em_field`] sums the scattered field in the far and radiating
//! near field, [`channel`] turns hops into rank-one MIMO channels,
//! [`scenario`] drops highway traffic around a Tx-Rx pair,
//! [`beam_select`] picks the best beam pair from steering codebooks, and
//! [`experiment`] sweeps it all Monte Carlo style. [`config`] maps a JSON
//! study document onto the typed configs.
//!
//! Everything is deterministic: a study is a pure function of its config
//! and seed, independent of thread count.

pub mod beam_select;
pub mod channel;
pub mod config;
pub mod em_field;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod phase_design;
pub mod scenario;

pub use error::{Error, Result};

/// Exact speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Crate version, stamped into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
