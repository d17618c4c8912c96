//! Oracle-equivalence checks for a run configuration: production solvers
//! against the sinc-DVR grid resolvent and the closed-form uncoupled spectra.

use num_complex::Complex64 as C64;

use crate::config::{ConfigError, CouplingType, RunConfig};
use crate::coupled::{CoupledError, CoupledSystem};
use crate::green0::{ChannelPropagator, ComplexEnergy, GreenError};
use crate::model::{DeltaCoupling, HarmonicChannel};
use crate::oracle::{
    uncoupled_spectrum_reference, CouplingMode, DvrOracle, GridSpec, OracleChannel, OracleError, UncoupledParams,
};
use crate::spectra::{SpectraError, Spectrometer};
use crate::units::{angstrom, cm1};

pub const GREEN0_TOLERANCE: f64 = 1e-6;
pub const GAUSSIAN_EXACT_TOLERANCE: f64 = 5e-3;
pub const DELTA_SET_TOLERANCE: f64 = 1e-3;
pub const UNCOUPLED_TOLERANCE: f64 = 1e-8;
pub const LADDER: [usize; 4] = [8, 16, 32, 48];
pub const LADDER_REFERENCE: usize = 96;

#[derive(Debug, thiserror::Error)]
pub enum ValidationError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Coupled(#[from] CoupledError),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
}

/// Where and at which energies the kernels are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPlan {
    /// Point pairs in Å, measured from the allowed channel's minimum.
    pub pairs_angstrom: Vec<(f64, f64)>,
    /// Photon energies in cm⁻¹; empty selects five interior grid energies.
    pub energies_cm1: Vec<f64>,
    pub dvr_points: usize,
    /// Finer grid for the uncoupled check, whose tolerance is far tighter.
    pub green0_dvr_points: usize,
    /// Domain padding beyond the outermost channel minimum, in Å.
    pub dvr_margin_angstrom: f64,
}

impl Default for ValidationPlan {
    fn default() -> Self {
        Self {
            pairs_angstrom: vec![(0.0, 0.0), (-0.05, -0.05), (0.05, 0.05), (-0.02, 0.02), (-0.1, -0.08)],
            energies_cm1: Vec::new(),
            dvr_points: 2001,
            green0_dvr_points: 4001,
            dvr_margin_angstrom: 1.2,
        }
    }
}

impl ValidationPlan {
    pub fn energies(&self, cfg: &RunConfig) -> Vec<f64> {
        if !self.energies_cm1.is_empty() {
            return self.energies_cm1.clone();
        }
        let (lo, hi) = (cfg.grid.min_cm1, cfg.grid.max_cm1);
        (1..=5).map(|k| lo + (hi - lo) * k as f64 / 6.0).collect()
    }

    pub fn pairs(&self, allowed: &HarmonicChannel) -> Vec<(f64, f64)> {
        self.pairs_angstrom
            .iter()
            .map(|&(a, b)| (allowed.x_min() + angstrom(a), allowed.x_min() + angstrom(b)))
            .collect()
    }

    /// Grid spanning every channel minimum (the ground one included) with padding.
    pub fn grid(&self, cfg: &RunConfig, mode: CouplingMode) -> Result<GridSpec, ConfigError> {
        let minima = [0.0, cfg.allowed_channel()?.x_min(), cfg.forbidden_channel()?.x_min()];
        let lo = minima.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = minima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = angstrom(self.dvr_margin_angstrom);
        Ok(GridSpec { x_lo: lo - pad, x_hi: hi + pad, points: self.dvr_points, mode })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Reported but not required unless validation is strict.
    pub informational: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, observed: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            observed,
            tolerance,
            passed: observed <= tolerance,
            informational: false,
            detail: String::new(),
        }
    }

    fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn counts(&self, strict: bool) -> bool {
        strict || !self.informational
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self, strict: bool) -> bool {
        self.checks.iter().all(|c| c.passed || !c.counts(strict))
    }

    pub fn table(&self, strict: bool) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  {:>10}  {:>10}  {:<6}  detail\n", "check", "observed", "tolerance", "result");
        for c in &self.checks {
            let verdict = match (c.passed, c.counts(strict)) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "info",
            };
            out += &format!(
                "{:<width$}  {:>10.3e}  {:>10.3e}  {:<6}  {}\n",
                c.name, c.observed, c.tolerance, verdict, c.detail
            );
        }
        out
    }
}

fn oracle_channel(ch: &HarmonicChannel) -> OracleChannel {
    OracleChannel { mass: ch.mass(), omega: ch.omega(), x_min: ch.x_min(), origin: ch.origin() }
}

fn relative(value: C64, reference: C64) -> f64 {
    (value - reference).norm() / reference.norm()
}

struct Setup {
    spectrometer_energy: Vec<ComplexEnergy>,
    allowed: HarmonicChannel,
    forbidden: HarmonicChannel,
    pairs: Vec<(f64, f64)>,
}

fn setup(cfg: &RunConfig, plan: &ValidationPlan) -> Result<Setup, ValidationError> {
    let spectroscopy = cfg.spectroscopy_with(cfg.delta_coupling(None)?.scaled(0.0))?;
    let spectrometer = Spectrometer::new(spectroscopy)?;
    let spectrometer_energy = plan
        .energies(cfg)
        .into_iter()
        .map(|e| spectrometer.resolvent_energy(cm1(e)))
        .collect::<Result<_, _>>()?;
    let allowed = cfg.allowed_channel()?;
    let forbidden = cfg.forbidden_channel()?;
    let pairs = plan.pairs(&allowed);
    Ok(Setup { spectrometer_energy, allowed, forbidden, pairs })
}

fn propagator(cfg: &RunConfig, ch: HarmonicChannel) -> ChannelPropagator {
    ChannelPropagator::with_backend(ch, cfg.backend.green0, cfg.backend.tolerances)
}

/// Uncoupled allowed-channel kernel against the grid resolvent.
pub fn green0_vs_dvr(cfg: &RunConfig, plan: &ValidationPlan) -> Result<Check, ValidationError> {
    let s = setup(cfg, plan)?;
    let oracle = DvrOracle::new(
        [oracle_channel(&s.allowed), oracle_channel(&s.forbidden)],
        GridSpec { points: plan.green0_dvr_points, ..plan.grid(cfg, CouplingMode::None)? },
    )?;
    let p = propagator(cfg, s.allowed);
    let mut worst = 0.0f64;
    for z in &s.spectrometer_energy {
        oracle.check_resolution(z.value())?;
        for &(x, x0) in &s.pairs {
            let g = p.green(x, x0, *z)?.value;
            worst = worst.max(relative(g, oracle.kernel(0, 0, x, x0, z.value())?));
        }
    }
    Ok(Check::new("green0 vs grid resolvent", worst, GREEN0_TOLERANCE)
        .detail(format!(
        "{} pairs x {} energies, M = {}",
        s.pairs.len(),
        s.spectrometer_energy.len(),
        plan.green0_dvr_points
    )))
}

/// Largest relative difference of g11 from the production solver and the
/// grid resolvent in `mode`.
pub fn coupled_g11_error(
    cfg: &RunConfig,
    plan: &ValidationPlan,
    mode: CouplingMode,
    coupling: &DeltaCoupling,
) -> Result<(f64, usize), ValidationError> {
    let s = setup(cfg, plan)?;
    let oracle =
        DvrOracle::new([oracle_channel(&s.allowed), oracle_channel(&s.forbidden)], plan.grid(cfg, mode)?)?;
    let system =
        CoupledSystem::new(propagator(cfg, s.allowed), propagator(cfg, s.forbidden), coupling.clone())
            .with_closure(cfg.backend.closure);
    let mut worst = 0.0f64;
    for z in &s.spectrometer_energy {
        oracle.check_resolution(z.value())?;
        let f = system.factorize(*z)?;
        for &(x, x0) in &s.pairs {
            worst = worst.max(relative(f.g11(x, x0)?, oracle.kernel(0, 0, x, x0, z.value())?));
        }
    }
    Ok((worst, oracle.dropped_sites()))
}

/// Production g11 against the grid resolvent with the smooth Gaussian coupling.
pub fn coupled_vs_gaussian_exact(cfg: &RunConfig, plan: &ValidationPlan) -> Result<Check, ValidationError> {
    let g = cfg.gaussian()?;
    let mode = CouplingMode::GaussianExact { strength: g.strength(), alpha: g.alpha(), center: g.center() };
    let coupling = cfg.delta_coupling(None)?;
    let (worst, _) = coupled_g11_error(cfg, plan, mode, &coupling)?;
    let check = Check::new("coupled g11 vs grid (gaussian_exact)", worst, GAUSSIAN_EXACT_TOLERANCE)
        .detail(format!("N = {}", coupling.len()));
    Ok(match cfg.coupling.kind {
        CouplingType::Gaussian => check,
        CouplingType::Delta => check.informational().detail("single-delta coupling; compared for reference"),
    })
}

/// Production g11 against the grid resolvent carrying the same delta sites.
pub fn coupled_vs_delta_set(cfg: &RunConfig, plan: &ValidationPlan) -> Result<Check, ValidationError> {
    let coupling = cfg.delta_coupling(None)?;
    let mode = CouplingMode::DeltaSet { positions: coupling.positions(), strengths: coupling.strengths() };
    let (worst, dropped) = coupled_g11_error(cfg, plan, mode, &coupling)?;
    Ok(Check::new("coupled g11 vs grid (delta_set)", worst, DELTA_SET_TOLERANCE)
        .detail(format!("N = {}, {dropped} sites outside the grid", coupling.len())))
}

/// |ME(N) − ME(96)| for the absorption matrix element ⟨χᵢ|G₁₁|χᵢ⟩ at each
/// validation energy, one row per energy and one column per ladder rung.
pub fn ladder_gaps(cfg: &RunConfig, plan: &ValidationPlan, rungs: &[usize]) -> Result<Vec<Vec<f64>>, ValidationError> {
    let energies: Vec<f64> = plan.energies(cfg).into_iter().map(cm1).collect();
    let element = |n: usize| -> Result<Vec<C64>, ValidationError> {
        let sp = Spectrometer::new(cfg.spectroscopy_with(cfg.delta_coupling(Some(n))?)?)?;
        energies.iter().map(|&e| Ok(sp.point(e)?.absorption_amplitude)).collect()
    };
    let reference = element(LADDER_REFERENCE)?;
    let columns: Vec<Vec<C64>> = rungs.iter().map(|&n| element(n)).collect::<Result<_, _>>()?;
    Ok((0..energies.len())
        .map(|k| columns.iter().map(|col| (col[k] - reference[k]).norm()).collect())
        .collect())
}

/// Monotone decrease of the ladder gaps at every validation energy. The
/// observed value is the largest ratio of consecutive gaps (must stay below 1).
pub fn convergence_ladder(cfg: &RunConfig, plan: &ValidationPlan) -> Result<Check, ValidationError> {
    if cfg.coupling.kind == CouplingType::Delta {
        return Ok(Check::new("discretization ladder", f64::NAN, 1.0)
            .informational()
            .detail("not applicable to single-delta coupling"));
    }
    let gaps = ladder_gaps(cfg, plan, &LADDER)?;
    let ratio = gaps
        .iter()
        .flat_map(|row| row.windows(2).map(|w| w[1] / w[0]))
        .fold(0.0f64, |a, r| if r.is_nan() { f64::INFINITY } else { a.max(r) });
    let mut check = Check {
        passed: ratio < 1.0,
        ..Check::new("discretization ladder (max gap ratio)", ratio, 1.0)
    };
    let summary: Vec<String> = gaps
        .iter()
        .map(|row| row.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>().join(">"))
        .collect();
    let n = cfg.coupling.quadrature.n;
    let mut detail = format!("N = {LADDER:?} vs {LADDER_REFERENCE}: {}", summary.join("; "));
    if n < LADDER[0] {
        let own = ladder_gaps(cfg, plan, &[n])?;
        let worst = own.iter().map(|r| r[0]).fold(0.0f64, f64::max);
        detail += &format!("; configured N = {n} gap {worst:.2e}");
        check = check.informational();
    }
    Ok(check.detail(detail))
}

/// Uncoupled spectra over the config grid against the closed form.
pub fn uncoupled_vs_closed_form(cfg: &RunConfig) -> Result<Check, ValidationError> {
    let name = "uncoupled spectra vs closed form";
    if (cfg.ground.omega_cm1 - cfg.allowed.omega_cm1).abs() > 1e-12 * cfg.ground.omega_cm1 {
        return Ok(Check::new(name, f64::NAN, UNCOUPLED_TOLERANCE)
            .informational()
            .detail("closed form needs equal ground and allowed frequencies"));
    }
    let spectroscopy = cfg.spectroscopy_with(cfg.delta_coupling(None)?.scaled(0.0))?;
    let result = Spectrometer::new(spectroscopy.clone())?.sweep(None)?;
    let ground = spectroscopy.ground;
    let params = UncoupledParams {
        mass: spectroscopy.allowed.mass(),
        ground_omega: ground.channel().omega(),
        excited_omega: spectroscopy.allowed.omega(),
        shift: spectroscopy.allowed.x_min(),
        excited_origin: spectroscopy.allowed.origin(),
        damping: spectroscopy.damping,
        energy_offset: spectroscopy.energy_offset,
        initial_level: ground.initial_level(),
        final_level: ground.final_level(),
    };
    let reference = uncoupled_spectrum_reference(&params, &result.energies)?;
    let mut worst = 0.0f64;
    for (k, p) in result.points.iter().enumerate() {
        worst = worst.max((p.abs_uncoupled() - reference.absorption[k]).abs() / reference.absorption[k]);
        worst = worst.max((p.raman_uncoupled() - reference.raman[k]).abs() / reference.raman[k]);
    }
    Ok(Check::new(name, worst, UNCOUPLED_TOLERANCE).detail(format!("{} grid points", result.energies.len())))
}

/// The full suite; the grid oracles are built one at a time.
pub fn validate(cfg: &RunConfig, plan: &ValidationPlan) -> Result<ValidationReport, ValidationError> {
    let checks = vec![
        green0_vs_dvr(cfg, plan)?,
        coupled_vs_gaussian_exact(cfg, plan)?,
        coupled_vs_delta_set(cfg, plan)?,
        uncoupled_vs_closed_form(cfg)?,
        convergence_ladder(cfg, plan)?,
    ];
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn informational_failures_only_count_when_strict() {
        let report = ValidationReport {
            checks: vec![Check::new("a", 0.5, 1.0), Check::new("b", 2.0, 1.0).informational()],
        };
        assert!(report.passed(false));
        assert!(!report.passed(true));
        let table = report.table(false);
        assert!(table.contains("info") && table.contains("pass"));
    }

    #[test]
    fn default_plan_reproduces_the_standard_grid() {
        let cfg = RunConfig::paper();
        let g = ValidationPlan::default().grid(&cfg, CouplingMode::None).unwrap();
        assert!((g.x_lo - angstrom(-1.2)).abs() < 1e-12);
        assert!((g.x_hi - angstrom(1.4)).abs() < 1e-12);
        assert_eq!(g.points, 2001);
    }
}
