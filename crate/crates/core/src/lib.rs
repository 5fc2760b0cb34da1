//! Generalized optomechanics: a cavity mode coupled to a mechanical mode by
//! radiation pressure and cross-Kerr interaction.
//!
//! The crate covers the closed-form spectrum, weak-drive photon statistics,
//! Lindblad dynamics and steady states, and mechanical cat-state generation
//! with its phase-space diagnostics. Frequencies and rates are in units of
//! the mechanical frequency.

pub mod analysis;
pub mod blockade;
pub mod catstate;
pub mod checks;
pub mod error;
pub mod lindblad;
pub mod model;
pub mod operators;
pub mod quasiprob;
pub mod scalar;
pub mod specfun;
mod sparse;
pub mod sweep;

pub use blockade::{PhotonStats, StatsMethod};
pub use catstate::{Branch, CatSnapshot};
pub use error::{Error, Result};
pub use lindblad::{DensityMatrix, LindbladSpec};
pub use model::{Frame, Resonance, SpectralPoint, SystemParams};
pub use operators::{HilbertSpec, Operator};
pub use quasiprob::{Axis, GridKind, PhaseSpaceGrid};
pub use scalar::Scalar;

/// Default real type.
pub type Real = f64;
/// Default complex type.
pub type Complex = num_complex::Complex<Real>;
