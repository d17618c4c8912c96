//! Brute-force references for testing and validation: a sinc-DVR grid
//! resolvent, displaced-oscillator overlaps, and closed-form uncoupled spectra.
//!
//! Nothing here depends on the production solvers; only unit conversions are
//! shared, so agreement between the two is meaningful.

mod dvr;
mod franck_condon;
mod reference;

pub use dvr::{grid_resolvent, CouplingMode, DvrOracle, GridSpec};
pub use franck_condon::{displaced_level_overlap, displaced_overlaps, fc_overlap_analytic};
pub use reference::{uncoupled_spectrum_reference, UncoupledCurves, UncoupledParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid spacing {spacing:e} does not resolve wavelength {wavelength:e}")]
    UnderResolved { spacing: f64, wavelength: f64 },
    #[error("eigensolver failed")]
    Eigensolver,
    #[error("singular grid system")]
    Singular,
    #[error("closed-form reference needs equal ground and excited frequencies")]
    UnequalFrequencies,
}

/// Harmonic diabatic channel V(x) = ε + ½mω²(x − x_min)² (internal units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleChannel {
    pub mass: f64,
    pub omega: f64,
    pub x_min: f64,
    pub origin: f64,
}

impl OracleChannel {
    pub fn potential(&self, x: f64) -> f64 {
        self.origin + 0.5 * self.mass * self.omega * self.omega * (x - self.x_min).powi(2)
    }
}
