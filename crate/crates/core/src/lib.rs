//! Exact two-channel Green's functions for curve crossing with a coupling
//! discretized into delta sites, and the absorption and resonance Raman
//! spectra built from them.
//!
//! The library works in atomic units (ħ = m_e = 1, energies in hartree,
//! lengths in bohr). [`units`] converts from cm⁻¹, Å and amu.

pub mod cli;
pub mod config;
pub mod coupled;
pub mod green0;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod spectra;
pub mod units;
pub mod validation;
