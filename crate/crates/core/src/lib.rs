//! Interacting quantum kicked rotors at quantum resonance.
//!
//! A split-operator engine for `N` rotors on truncated momentum grids,
//! Schmidt-spectrum entanglement measures, the Bessel-function closed form
//! of the linear entropy, and fits for the growth laws and late-time
//! oscillations of the entanglement entropy.

pub mod analysis;
pub mod analytics;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod hilbert;
pub mod model;

pub use error::{Error, Result};
pub use model::{
    effective_planck, EdgeGuard, InteractionKind, InteractionSpec, ResonanceSpec, RotorParams,
    SystemConfig,
};
