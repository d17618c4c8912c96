//! Absorption spectra and resonance Raman excitation profiles for a ground
//! oscillator excited onto an allowed channel coupled to a forbidden one.
//!
//! The resolvent argument is z = E + E₀(i + ½) + offset + iΓ, where E is the
//! photon energy measured from the ground electronic minimum and E₀(i + ½) is
//! the energy of the initial ground level.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupled::{CoupledError, CoupledSystem, SiteClosure};
use crate::green0::{eigenfunctions, Backend, ChannelPropagator, ComplexEnergy, GreenError, Tolerances};
use crate::model::{DeltaCoupling, HarmonicChannel, ModelError};

pub const DEFAULT_OVERLAP_TOLERANCE: f64 = 1e-13;
pub const DEFAULT_MAX_LEVEL: usize = 600;
/// Allowed excess of Σₙ cₙ² over one, and allowed missing weight at truncation.
pub const PARSEVAL_TOLERANCE: f64 = 1e-8;
/// Largest fraction of grid points that may be skipped before a sweep fails.
pub const MAX_SKIPPED_FRACTION: f64 = 0.1;

const RUN_LENGTH: usize = 5;
const PANEL_ORDER: usize = 24;
const MIN_PANELS: usize = 8;
const MAX_PANELS: usize = 4096;
const SUPPORT_WIDTHS: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum SpectraError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Coupled(#[from] CoupledError),
    #[error("overlap quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("coupled system is singular at photon energy {energy:e}")]
    SingularPoint { energy: f64 },
    #[error("{skipped} of {total} grid points were skipped as singular")]
    TooManySkipped { skipped: usize, total: usize },
}

/// Ground electronic state: an oscillator with minimum and origin at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundState {
    channel: HarmonicChannel,
    initial_level: usize,
    final_level: usize,
}

impl GroundState {
    /// Initial level 0 and final level 1.
    pub fn new(mass: f64, omega: f64) -> Result<Self, ModelError> {
        Ok(Self { channel: HarmonicChannel::new(mass, omega, 0.0, 0.0)?, initial_level: 0, final_level: 1 })
    }

    pub fn with_levels(mut self, initial: usize, final_level: usize) -> Self {
        self.initial_level = initial;
        self.final_level = final_level;
        self
    }

    pub fn channel(&self) -> &HarmonicChannel {
        &self.channel
    }

    pub fn initial_level(&self) -> usize {
        self.initial_level
    }

    pub fn final_level(&self) -> usize {
        self.final_level
    }

    /// Vibrational energy of the initial level.
    pub fn initial_energy(&self) -> f64 {
        self.channel.eigenvalue(self.initial_level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Raw,
    /// Each curve divided by its own maximum over the ok points.
    Max,
}

/// Evenly spaced photon energies, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl EnergyGrid {
    pub fn energies(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        let last = (self.points - 1) as f64;
        (0..self.points).map(|k| self.min + span * k as f64 / last).collect()
    }
}

/// Everything a sweep needs, in internal units.
#[derive(Debug, Clone)]
pub struct SpectroscopyConfig {
    pub ground: GroundState,
    pub allowed: HarmonicChannel,
    pub forbidden: HarmonicChannel,
    pub coupling: DeltaCoupling,
    pub closure: SiteClosure,
    pub damping: f64,
    pub grid: EnergyGrid,
    pub energy_offset: f64,
    pub normalization: Normalization,
    pub backend: Backend,
    pub tolerances: Tolerances,
    pub overlap_tolerance: f64,
    pub max_level: usize,
}

impl SpectroscopyConfig {
    pub fn new(
        ground: GroundState,
        allowed: HarmonicChannel,
        forbidden: HarmonicChannel,
        coupling: DeltaCoupling,
        damping: f64,
        grid: EnergyGrid,
    ) -> Self {
        Self {
            ground,
            allowed,
            forbidden,
            coupling,
            closure: SiteClosure::default(),
            damping,
            grid,
            energy_offset: 0.0,
            normalization: Normalization::default(),
            backend: Backend::default(),
            tolerances: Tolerances::default(),
            overlap_tolerance: DEFAULT_OVERLAP_TOLERANCE,
            max_level: DEFAULT_MAX_LEVEL,
        }
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        let bad = |m: &str| Err(SpectraError::Config(m.to_string()));
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return bad("damping must be finite and non-negative");
        }
        let g = &self.grid;
        if g.points == 0 {
            return bad("grid needs at least one point");
        }
        if !(g.min.is_finite() && g.max.is_finite()) || (g.points > 1 && g.max <= g.min) {
            return bad("grid bounds must be finite with max > min");
        }
        if !self.energy_offset.is_finite() {
            return bad("energy offset must be finite");
        }
        if !(self.overlap_tolerance > 0.0 && self.overlap_tolerance < 1e-3) {
            return bad("overlap tolerance must lie in (0, 1e-3)");
        }
        if self.max_level < RUN_LENGTH {
            return bad("max level too small");
        }
        let masses = [self.ground.channel.mass(), self.allowed.mass(), self.forbidden.mass()];
        if masses.iter().any(|&m| (m - masses[0]).abs() > 1e-12 * masses[0]) {
            return bad("all channels must share one mass");
        }
        Ok(())
    }
}

/// ⟨ψₙ^excited|χ_level^ground⟩ for n = 0, 1, … by composite Gauss–Legendre
/// quadrature over the ground level's support, with panel doubling until the
/// coefficients settle.
///
/// The sequence ends before the first run of five coefficients below
/// `tolerance` at which the accumulated weight Σ cₙ² is within
/// [`PARSEVAL_TOLERANCE`] of one.
pub fn overlap_coefficients(
    ground: &HarmonicChannel,
    level: usize,
    excited: &HarmonicChannel,
    max_level: usize,
    tolerance: f64,
) -> Result<Vec<f64>, SpectraError> {
    let reach = ((2 * level + 1) as f64).sqrt() + SUPPORT_WIDTHS;
    let lo = ground.x_min() - reach / ground.inverse_width();
    let hi = ground.x_min() + reach / ground.inverse_width();
    let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_ORDER).expect("nonzero order"));
    let mut nodes: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));

    let integrate = |panels: usize| -> Vec<f64> {
        let width = (hi - lo) / panels as f64;
        let mut c = vec![0.0; max_level + 1];
        for p in 0..panels {
            let mid = lo + width * (p as f64 + 0.5);
            for &(t, w) in &nodes {
                let x = mid + 0.5 * width * t;
                let chi = eigenfunctions(ground, x, level)[level];
                let psi = eigenfunctions(excited, x, max_level);
                let weight = 0.5 * width * w * chi;
                c.iter_mut().zip(&psi).for_each(|(ci, pi)| *ci += weight * pi);
            }
        }
        c
    };

    let target = (0.1 * tolerance).max(8.0 * f64::EPSILON);
    let mut panels = MIN_PANELS;
    let mut previous = integrate(panels);
    let coefficients = loop {
        if panels >= MAX_PANELS {
            return Err(SpectraError::Quadrature(format!("no agreement after {panels} panels")));
        }
        panels *= 2;
        let current = integrate(panels);
        let change = current.iter().zip(&previous).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if change <= target {
            break current;
        }
        previous = current;
    };

    let mut weight = 0.0;
    let mut run = 0;
    for (n, c) in coefficients.iter().enumerate() {
        if c.abs() < tolerance {
            run += 1;
            if run == RUN_LENGTH && 1.0 - weight <= PARSEVAL_TOLERANCE {
                let end = n + 1 - RUN_LENGTH;
                let mut out = coefficients;
                out.truncate(end);
                if weight > 1.0 + PARSEVAL_TOLERANCE {
                    return Err(SpectraError::Quadrature(format!("Σ c² = {weight} exceeds one")));
                }
                return Ok(out);
            }
        } else {
            run = 0;
        }
        weight += c * c;
    }
    Err(SpectraError::Quadrature(format!(
        "coefficients still above {tolerance:e} at level {max_level} (weight {weight})"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    SkippedSingular,
}

impl PointStatus {
    pub fn tag(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::SkippedSingular => "skipped-singular",
        }
    }
}

/// Raw matrix elements and intensities at one photon energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub energy: f64,
    pub status: PointStatus,
    /// ⟨χᵢ|G₁₁|χᵢ⟩ with coupling; NaN when skipped.
    pub absorption_amplitude: C64,
    /// ⟨χ_f|G₁₁|χᵢ⟩ with coupling; NaN when skipped.
    pub raman_amplitude: C64,
    pub uncoupled_absorption_amplitude: C64,
    pub uncoupled_raman_amplitude: C64,
}

impl PointResult {
    pub fn abs_coupled(&self) -> f64 {
        absorption_from_amplitude(self.absorption_amplitude)
    }

    pub fn abs_uncoupled(&self) -> f64 {
        absorption_from_amplitude(self.uncoupled_absorption_amplitude)
    }

    pub fn raman_coupled(&self) -> f64 {
        self.raman_amplitude.norm_sqr()
    }

    pub fn raman_uncoupled(&self) -> f64 {
        self.uncoupled_raman_amplitude.norm_sqr()
    }
}

/// Re[i M] = −Im M.
pub fn absorption_from_amplitude(m: C64) -> f64 {
    (C64::i() * m).re
}

/// Prepared per-config state shared by all grid points.
#[derive(Debug, Clone)]
pub struct Spectrometer {
    config: SpectroscopyConfig,
    system: CoupledSystem,
    initial: Vec<f64>,
    final_state: Vec<f64>,
}

impl Spectrometer {
    pub fn new(config: SpectroscopyConfig) -> Result<Self, SpectraError> {
        config.validate()?;
        let g = &config.ground;
        let initial =
            overlap_coefficients(&g.channel, g.initial_level, &config.allowed, config.max_level, config.overlap_tolerance)?;
        let final_state = if g.final_level == g.initial_level {
            initial.clone()
        } else {
            overlap_coefficients(&g.channel, g.final_level, &config.allowed, config.max_level, config.overlap_tolerance)?
        };
        let propagator = |ch: HarmonicChannel| ChannelPropagator::with_backend(ch, config.backend, config.tolerances);
        let system =
            CoupledSystem::new(propagator(config.allowed), propagator(config.forbidden), config.coupling.clone())
                .with_closure(config.closure);
        Ok(Self { config, system, initial, final_state })
    }

    pub fn config(&self) -> &SpectroscopyConfig {
        &self.config
    }

    pub fn system(&self) -> &CoupledSystem {
        &self.system
    }

    /// Overlaps of the initial ground level with the allowed channel's levels.
    pub fn initial_coefficients(&self) -> &[f64] {
        &self.initial
    }

    pub fn final_coefficients(&self) -> &[f64] {
        &self.final_state
    }

    /// Resolvent argument for photon energy E.
    pub fn resolvent_energy(&self, photon_energy: f64) -> Result<ComplexEnergy, SpectraError> {
        let c = &self.config;
        Ok(ComplexEnergy::new(photon_energy + c.ground.initial_energy() + c.energy_offset, c.damping)?)
    }

    pub fn point(&self, photon_energy: f64) -> Result<PointResult, SpectraError> {
        let z = self.resolvent_energy(photon_energy)?;
        let same = self.config.ground.final_level == self.config.ground.initial_level;
        let allowed = self.system.channel(0);
        let ua = allowed.matrix_element(&self.initial, &self.initial, z)?.value;
        let ur = if same { ua } else { allowed.matrix_element(&self.final_state, &self.initial, z)?.value };
        let mut out = PointResult {
            energy: photon_energy,
            status: PointStatus::Ok,
            absorption_amplitude: ua,
            raman_amplitude: ur,
            uncoupled_absorption_amplitude: ua,
            uncoupled_raman_amplitude: ur,
        };
        if self.config.coupling.is_zero() {
            return Ok(out);
        }
        let nan = C64::new(f64::NAN, f64::NAN);
        let coupled = self.system.factorize(z).and_then(|f| {
            let a = f.matrix_element_g11(&self.initial, &self.initial)?;
            let r = if same { a } else { f.matrix_element_g11(&self.final_state, &self.initial)? };
            Ok((a, r))
        });
        match coupled {
            Ok((a, r)) => {
                out.absorption_amplitude = a;
                out.raman_amplitude = r;
            }
            Err(CoupledError::Singular { .. } | CoupledError::Residual { .. }) => {
                out.status = PointStatus::SkippedSingular;
                out.absorption_amplitude = nan;
                out.raman_amplitude = nan;
            }
            Err(e) => return Err(e.into()),
        }
        Ok(out)
    }

    /// Re[i⟨χᵢ|G₁₁(z)|χᵢ⟩].
    pub fn absorption_intensity(&self, photon_energy: f64) -> Result<f64, SpectraError> {
        self.checked(photon_energy).map(|p| p.abs_coupled())
    }

    /// |⟨χ_f|G₁₁(z)|χᵢ⟩|².
    pub fn raman_intensity(&self, photon_energy: f64) -> Result<f64, SpectraError> {
        self.checked(photon_energy).map(|p| p.raman_coupled())
    }

    fn checked(&self, photon_energy: f64) -> Result<PointResult, SpectraError> {
        let p = self.point(photon_energy)?;
        if p.status != PointStatus::Ok {
            return Err(SpectraError::SingularPoint { energy: photon_energy });
        }
        Ok(p)
    }

    /// All grid points, evaluated on at most `threads` workers and merged in
    /// grid order.
    pub fn sweep(&self, threads: Option<usize>) -> Result<SpectrumResult, SpectraError> {
        let energies = self.config.grid.energies();
        let run = || energies.par_iter().map(|&e| self.point(e)).collect::<Result<Vec<_>, _>>();
        let points = match threads {
            Some(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| SpectraError::Config(e.to_string()))?
                .install(run)?,
            None => run()?,
        };
        let skipped = points.iter().filter(|p| p.status != PointStatus::Ok).count();
        if skipped as f64 > MAX_SKIPPED_FRACTION * points.len() as f64 {
            return Err(SpectraError::TooManySkipped { skipped, total: points.len() });
        }
        Ok(SpectrumResult::assemble(&self.config, points))
    }
}

/// Integrated absolute coupled-minus-uncoupled difference relative to the
/// integrated uncoupled curve, by trapezoid over the ok points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationMetrics {
    pub absorption: f64,
    pub raman: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    pub abs_coupled: Vec<f64>,
    pub abs_uncoupled: Vec<f64>,
    pub raman_coupled: Vec<f64>,
    pub raman_uncoupled: Vec<f64>,
    pub status: Vec<PointStatus>,
    pub normalization: Normalization,
    /// Computed from raw intensities, before normalization.
    pub deviation: DeviationMetrics,
    pub sites: usize,
    pub tolerances: Tolerances,
    pub points: Vec<PointResult>,
}

impl SpectrumResult {
    fn assemble(config: &SpectroscopyConfig, points: Vec<PointResult>) -> Self {
        let ok: Vec<&PointResult> = points.iter().filter(|p| p.status == PointStatus::Ok).collect();
        let e: Vec<f64> = ok.iter().map(|p| p.energy).collect();
        let metric = |c: fn(&PointResult) -> f64, u: fn(&PointResult) -> f64| {
            let diff: Vec<f64> = ok.iter().map(|p| (c(p) - u(p)).abs()).collect();
            let base: Vec<f64> = ok.iter().map(|p| u(p)).collect();
            trapezoid(&e, &diff) / trapezoid(&e, &base)
        };
        let deviation = DeviationMetrics {
            absorption: metric(PointResult::abs_coupled, PointResult::abs_uncoupled),
            raman: metric(PointResult::raman_coupled, PointResult::raman_uncoupled),
        };
        let curve = |f: fn(&PointResult) -> f64| -> Vec<f64> {
            let raw: Vec<f64> = points.iter().map(f).collect();
            match config.normalization {
                Normalization::Raw => raw,
                Normalization::Max => {
                    let peak = points
                        .iter()
                        .zip(&raw)
                        .filter(|(p, _)| p.status == PointStatus::Ok)
                        .map(|(_, v)| *v)
                        .fold(0.0, f64::max);
                    if peak > 0.0 {
                        raw.iter().map(|v| v / peak).collect()
                    } else {
                        raw
                    }
                }
            }
        };
        Self {
            energies: points.iter().map(|p| p.energy).collect(),
            abs_coupled: curve(PointResult::abs_coupled),
            abs_uncoupled: curve(PointResult::abs_uncoupled),
            raman_coupled: curve(PointResult::raman_coupled),
            raman_uncoupled: curve(PointResult::raman_uncoupled),
            status: points.iter().map(|p| p.status).collect(),
            normalization: config.normalization,
            deviation,
            sites: config.coupling.len(),
            tolerances: config.tolerances,
            points,
        }
    }

    pub fn skipped(&self) -> usize {
        self.status.iter().filter(|s| **s != PointStatus::Ok).count()
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    if x.len() < 2 {
        return y.first().copied().unwrap_or(0.0);
    }
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

/// Convenience: prepare and sweep in one call.
pub fn sweep(config: &SpectroscopyConfig, threads: Option<usize>) -> Result<SpectrumResult, SpectraError> {
    Spectrometer::new(config.clone())?.sweep(threads)
}
