//! Spectral analysis of Lindblad open quantum systems: Liouvillian spectra,
//! decay-rate stripes, superoperator eigenstate statistics, and spectral
//! dynamics.

pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod eth;
pub mod lindblad;
pub mod matrix;
pub mod spectral;
pub mod stats;
pub mod stripes;
