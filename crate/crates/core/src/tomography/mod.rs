//! Simulated two-qubit tomography: Pauli-pair counts, maximum-likelihood
//! reconstruction and Metropolis-Hastings fidelity uncertainty.

pub mod counts;
pub mod mh;
pub mod mle;

pub use counts::{outcome_probabilities, simulate_counts, Pauli, Setting, TomographyCounts};
pub use mh::{mh_fidelity_distribution, mh_with_options, FidelitySamples, MhOptions};
pub use mle::{mle_exact, mle_from_probabilities, mle_reconstruct, mle_with_options, MleOptions, MleReport};
