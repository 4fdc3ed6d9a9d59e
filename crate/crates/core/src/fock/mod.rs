//! Sparse multi-mode bosonic Fock states and linear mode transformations.
//!
//! A [`FockState`] stores amplitudes keyed by occupation vectors over a
//! [`ModeRegister`]. Circuit elements are [`ModeTransform`]s acting on
//! creation operators; applying one substitutes each input `a†` by its image
//! and re-expands the resulting polynomial on the vacuum, so the cost scales
//! with the number of stored terms rather than the full Hilbert space.

mod mode;
mod state;
mod transform;

pub use mode::{Arm, ModeId, ModeRegister, Path, Pol, Side};
pub use state::{FockState, Occupation, AMP_PRUNE_TOL, DEFAULT_MAX_PHOTONS};
pub use transform::{ModeTransform, ISOMETRY_TOL};
