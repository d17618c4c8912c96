//! JSON run configuration in spectroscopic units and its resolution into a
//! [`SpectroscopyConfig`].

use serde::{Deserialize, Serialize};

use crate::coupled::SiteClosure;
use crate::green0::{Backend, Tolerances};
use crate::model::{
    discretize_coupling, DeltaCoupling, GaussianCoupling, HarmonicChannel, ModelError, QuadratureKind,
    QuadratureScheme,
};
use crate::spectra::{
    EnergyGrid, GroundState, Normalization, SpectroscopyConfig, DEFAULT_MAX_LEVEL, DEFAULT_OVERLAP_TOLERANCE,
};
use crate::units::{amu, angstrom, cm1};

/// The bundled reproduction config for the three-curve model.
pub const PAPER_CONFIG: &str = include_str!("../configs/paper_fig2_fig3.json");

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config does not match the schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid config value: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSection {
    pub mass_amu: f64,
    pub omega_cm1: f64,
    #[serde(default)]
    pub initial_level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub omega_cm1: f64,
    pub shift_angstrom: f64,
    pub origin_cm1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingType {
    /// Gaussian profile discretized by the quadrature rule.
    Gaussian,
    /// One delta at x_c carrying the Gaussian's integral K₀√(π/α).
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub kind: QuadratureKind,
    #[serde(rename = "N")]
    pub n: usize,
    /// Explicit [lo, hi] in Å; null selects the automatic Gaussian support.
    #[serde(default)]
    pub support_angstrom: Option<[f64; 2]>,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self { kind: QuadratureKind::GaussLegendre, n: 48, support_angstrom: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    #[serde(rename = "type")]
    pub kind: CouplingType,
    #[serde(rename = "K0_cm1")]
    pub k0_cm1: f64,
    pub alpha_per_angstrom2: f64,
    pub xc_angstrom: f64,
    #[serde(default)]
    pub quadrature: QuadratureSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min_cm1: f64,
    pub max_cm1: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    #[serde(default)]
    pub green0: Backend,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub closure: SiteClosure,
    #[serde(default = "default_overlap_tolerance")]
    pub overlap_tolerance: f64,
    #[serde(default = "default_max_level")]
    pub max_level: usize,
}

impl Default for BackendSection {
    fn default() -> Self {
        Self {
            green0: Backend::default(),
            tolerances: Tolerances::default(),
            closure: SiteClosure::default(),
            overlap_tolerance: DEFAULT_OVERLAP_TOLERANCE,
            max_level: DEFAULT_MAX_LEVEL,
        }
    }
}

fn default_overlap_tolerance() -> f64 {
    DEFAULT_OVERLAP_TOLERANCE
}

fn default_max_level() -> usize {
    DEFAULT_MAX_LEVEL
}

fn default_final_level() -> usize {
    1
}

/// Top-level run configuration. Unknown keys are rejected; serializing a
/// parsed config writes every default explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ground: GroundSection,
    pub allowed: ChannelSection,
    pub forbidden: ChannelSection,
    pub coupling: CouplingSection,
    pub damping_cm1: f64,
    pub grid: GridSection,
    #[serde(default = "default_final_level")]
    pub raman_final_level: usize,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub backend: BackendSection,
    #[serde(default)]
    pub global_energy_offset_cm1: f64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn paper() -> Self {
        Self::from_json(PAPER_CONFIG).expect("bundled config is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let positive = [
            ("ground.mass_amu", self.ground.mass_amu),
            ("ground.omega_cm1", self.ground.omega_cm1),
            ("allowed.omega_cm1", self.allowed.omega_cm1),
            ("forbidden.omega_cm1", self.forbidden.omega_cm1),
            ("coupling.alpha_per_angstrom2", self.coupling.alpha_per_angstrom2),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let finite = [
            ("allowed.shift_angstrom", self.allowed.shift_angstrom),
            ("allowed.origin_cm1", self.allowed.origin_cm1),
            ("forbidden.shift_angstrom", self.forbidden.shift_angstrom),
            ("forbidden.origin_cm1", self.forbidden.origin_cm1),
            ("coupling.K0_cm1", self.coupling.k0_cm1),
            ("coupling.xc_angstrom", self.coupling.xc_angstrom),
            ("global_energy_offset_cm1", self.global_energy_offset_cm1),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(self.damping_cm1.is_finite() && self.damping_cm1 >= 0.0) {
            return bad(format!("damping_cm1 must be finite and non-negative, got {}", self.damping_cm1));
        }
        let g = &self.grid;
        if g.points < 2 {
            return bad(format!("grid.points must be at least 2, got {}", g.points));
        }
        if !(g.min_cm1.is_finite() && g.max_cm1.is_finite() && g.max_cm1 > g.min_cm1) {
            return bad("grid needs finite min_cm1 < max_cm1".into());
        }
        let q = &self.coupling.quadrature;
        if q.n == 0 {
            return bad("coupling.quadrature.N must be at least 1".into());
        }
        if let Some([lo, hi]) = q.support_angstrom {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad("coupling.quadrature.support_angstrom must be a finite [lo, hi] with lo < hi".into());
            }
        }
        let b = &self.backend;
        if !(b.overlap_tolerance > 0.0 && b.overlap_tolerance < 1e-3) {
            return bad("backend.overlap_tolerance must lie in (0, 1e-3)".into());
        }
        let t = &b.tolerances;
        let tols = [
            ("wronskian_drift", t.wronskian_drift),
            ("spectral_rtol", t.spectral_rtol),
            ("pole_guard", t.pole_guard),
            ("matrix_element_rtol", t.matrix_element_rtol),
        ];
        for (name, v) in tols {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("backend.tolerances.{name} must be positive"));
            }
        }
        Ok(())
    }

    pub fn gaussian(&self) -> Result<GaussianCoupling, ConfigError> {
        let c = &self.coupling;
        Ok(GaussianCoupling::from_spectroscopic(c.k0_cm1, c.alpha_per_angstrom2, c.xc_angstrom)?)
    }

    /// Delta sites for the configured coupling, with `points` overriding the
    /// quadrature size when given.
    pub fn delta_coupling(&self, points: Option<usize>) -> Result<DeltaCoupling, ConfigError> {
        let gauss = self.gaussian()?;
        match self.coupling.kind {
            CouplingType::Delta => Ok(DeltaCoupling::single(gauss.center(), gauss.integral())?),
            CouplingType::Gaussian => {
                let q = &self.coupling.quadrature;
                let n = points.unwrap_or(q.n);
                let scheme = match q.support_angstrom {
                    Some([lo, hi]) => QuadratureScheme::new(q.kind, n, angstrom(lo), angstrom(hi))?,
                    None => QuadratureScheme::for_gaussian(&gauss, q.kind, n)?,
                };
                Ok(discretize_coupling(&gauss, &scheme)?)
            }
        }
    }

    pub fn ground_state(&self) -> Result<GroundState, ConfigError> {
        Ok(GroundState::new(amu(self.ground.mass_amu), cm1(self.ground.omega_cm1))?
            .with_levels(self.ground.initial_level, self.raman_final_level))
    }

    fn channel(&self, c: &ChannelSection) -> Result<HarmonicChannel, ConfigError> {
        Ok(HarmonicChannel::from_spectroscopic(
            self.ground.mass_amu,
            c.omega_cm1,
            c.shift_angstrom,
            c.origin_cm1,
        )?)
    }

    pub fn allowed_channel(&self) -> Result<HarmonicChannel, ConfigError> {
        self.channel(&self.allowed)
    }

    pub fn forbidden_channel(&self) -> Result<HarmonicChannel, ConfigError> {
        self.channel(&self.forbidden)
    }

    pub fn energy_grid(&self) -> EnergyGrid {
        EnergyGrid { min: cm1(self.grid.min_cm1), max: cm1(self.grid.max_cm1), points: self.grid.points }
    }

    /// Internal-unit spectroscopy config with the given coupling.
    pub fn spectroscopy_with(&self, coupling: DeltaCoupling) -> Result<SpectroscopyConfig, ConfigError> {
        let mut s = SpectroscopyConfig::new(
            self.ground_state()?,
            self.allowed_channel()?,
            self.forbidden_channel()?,
            coupling,
            cm1(self.damping_cm1),
            self.energy_grid(),
        );
        s.closure = self.backend.closure;
        s.energy_offset = cm1(self.global_energy_offset_cm1);
        s.normalization = self.normalization;
        s.backend = self.backend.green0;
        s.tolerances = self.backend.tolerances;
        s.overlap_tolerance = self.backend.overlap_tolerance;
        s.max_level = self.backend.max_level;
        Ok(s)
    }

    pub fn spectroscopy(&self) -> Result<SpectroscopyConfig, ConfigError> {
        self.spectroscopy_with(self.delta_coupling(None)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_round_trips() {
        let cfg = RunConfig::paper();
        assert_eq!(cfg.grid.points, 500);
        assert_eq!(cfg.coupling.quadrature.n, 48);
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(PAPER_CONFIG).unwrap();
        v["grid"]["step"] = serde_json::json!(1.0);
        assert!(matches!(RunConfig::from_json(&v.to_string()), Err(ConfigError::Schema(_))));
        let mut w: serde_json::Value = serde_json::from_str(PAPER_CONFIG).unwrap();
        w["colour"] = serde_json::json!("red");
        assert!(matches!(RunConfig::from_json(&w.to_string()), Err(ConfigError::Schema(_))));
    }

    #[test]
    fn defaults_are_filled() {
        let mut v: serde_json::Value = serde_json::from_str(PAPER_CONFIG).unwrap();
        let obj = v.as_object_mut().unwrap();
        obj.remove("backend");
        obj.remove("normalization");
        obj.remove("raman_final_level");
        let cfg = RunConfig::from_json(&v.to_string()).unwrap();
        assert_eq!(cfg.raman_final_level, 1);
        assert_eq!(cfg.normalization, Normalization::Raw);
        assert_eq!(cfg.backend, BackendSection::default());
    }

    #[test]
    fn bad_values_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(PAPER_CONFIG).unwrap();
        v["grid"]["points"] = serde_json::json!(1);
        assert!(matches!(RunConfig::from_json(&v.to_string()), Err(ConfigError::Invalid(_))));
        let mut w: serde_json::Value = serde_json::from_str(PAPER_CONFIG).unwrap();
        w["damping_cm1"] = serde_json::json!(-1.0);
        assert!(matches!(RunConfig::from_json(&w.to_string()), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn delta_type_carries_the_gaussian_integral() {
        let mut cfg = RunConfig::paper();
        cfg.coupling.kind = CouplingType::Delta;
        let d = cfg.delta_coupling(None).unwrap();
        assert_eq!(d.len(), 1);
        let g = cfg.gaussian().unwrap();
        assert!((d.total_strength() - g.integral()).abs() < 1e-15 * g.integral());
        assert_eq!(d.positions()[0], g.center());
    }

    #[test]
    fn gaussian_sites_sum_to_the_integral() {
        let cfg = RunConfig::paper();
        let d = cfg.delta_coupling(None).unwrap();
        assert_eq!(d.len(), 48);
        let g = cfg.gaussian().unwrap();
        assert!((d.total_strength() - g.integral()).abs() < 1e-7 * g.integral());
    }
}
