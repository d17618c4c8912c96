//! Uncoupled single-channel Green's function G⁰(x, x₀; z) = ⟨x|(z − H)⁻¹|x₀⟩.
//!
//! Two backends are provided. The default integrates the two decaying
//! homogeneous solutions and divides by their Wronskian, giving
//! G = 2m·u_L(x<)u_R(x>)/W with W = u_L u_R′ − u_L′ u_R. The spectral backend sums
//! over eigenstates after subtracting a closed-form reference and is used as a
//! cross-check.

mod hermite;
mod spectral;
mod wronskian;

pub use hermite::{eigenfunction, eigenfunctions, hermite_functions};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::model::HarmonicChannel;
use crate::units;
use wronskian::WronskianKernel;

/// Turning-point padding (in ground-state widths) of the default kernel cover.
const COVER_PADDING: f64 = 8.0;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum GreenError {
    #[error("energy sits on eigenvalue {eigenvalue} (level {level}) with zero damping")]
    Pole { level: usize, eigenvalue: f64 },
    #[error("{what}: estimate {estimate:e} above tolerance {tolerance:e}")]
    NonConvergence { what: String, estimate: f64, tolerance: f64 },
    #[error("invalid energy: {0}")]
    InvalidEnergy(String),
    #[error("overlap coefficients are not finite or do not decay")]
    NonDecaying,
}

/// z = E + iΓ in internal units, with Γ ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    re: f64,
    im: f64,
}

impl ComplexEnergy {
    pub fn new(re: f64, im: f64) -> Result<Self, GreenError> {
        if !re.is_finite() || !im.is_finite() {
            return Err(GreenError::InvalidEnergy(format!("non-finite value {re} + {im}i")));
        }
        if im < 0.0 {
            return Err(GreenError::InvalidEnergy(format!("negative damping {im}")));
        }
        Ok(Self { re, im })
    }

    pub fn from_cm1(energy_cm1: f64, damping_cm1: f64) -> Result<Self, GreenError> {
        Self::new(units::cm1(energy_cm1), units::cm1(damping_cm1))
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Wronskian,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest relative change of the Wronskian along a sweep.
    pub wronskian_drift: f64,
    /// Relative tail tolerance of the spectral sum.
    pub spectral_rtol: f64,
    pub spectral_max_levels: usize,
    /// With Γ = 0, distance to an eigenvalue (in units of ω) treated as a pole.
    pub pole_guard: f64,
    /// Relative tail tolerance of coefficient-space matrix elements.
    pub matrix_element_rtol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            wronskian_drift: 1e-8,
            spectral_rtol: 1e-6,
            spectral_max_levels: 1 << 20,
            pole_guard: 1e-12,
            matrix_element_rtol: 1e-14,
        }
    }
}

/// Value with a nonnegative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub value: C64,
    pub error: f64,
}

/// Immutable evaluator of G⁰ for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPropagator {
    channel: HarmonicChannel,
    backend: Backend,
    tolerances: Tolerances,
}

impl ChannelPropagator {
    pub fn new(channel: HarmonicChannel) -> Self {
        Self::with_backend(channel, Backend::default(), Tolerances::default())
    }

    pub fn with_backend(channel: HarmonicChannel, backend: Backend, tolerances: Tolerances) -> Self {
        Self { channel, backend, tolerances }
    }

    pub fn channel(&self) -> &HarmonicChannel {
        &self.channel
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// Rejects Γ = 0 energies that coincide with an eigenvalue.
    pub fn check_pole(&self, z: ComplexEnergy) -> Result<(), GreenError> {
        if z.im > 0.0 {
            return Ok(());
        }
        let ch = &self.channel;
        let level = ((z.re - ch.origin()) / ch.omega() - 0.5).round();
        if level >= 0.0 {
            let n = level as usize;
            let e = ch.eigenvalue(n);
            if (z.re - e).abs() <= self.tolerances.pole_guard * ch.omega() {
                return Err(GreenError::Pole { level: n, eigenvalue: e });
            }
        }
        Ok(())
    }

    /// Default cover: the channel's classically allowed region at Re z, padded.
    pub fn default_cover(&self, z: ComplexEnergy) -> (f64, f64) {
        let ch = &self.channel;
        let c = 2.0 * (z.re - ch.origin()) / ch.omega();
        let reach = (c.max(0.0).sqrt() + COVER_PADDING) / ch.inverse_width();
        (ch.x_min() - reach, ch.x_min() + reach)
    }

    /// Prepares the Green's function at one energy for many point evaluations
    /// inside [x_lo, x_hi]; points outside are still evaluated, at extra cost.
    pub fn at_energy(&self, z: ComplexEnergy, x_lo: f64, x_hi: f64) -> Result<KernelAtEnergy, GreenError> {
        self.check_pole(z)?;
        let kind = match self.backend {
            Backend::Wronskian => KernelKind::Wronskian(WronskianKernel::new(
                &self.channel,
                z.value(),
                x_lo,
                x_hi,
                &self.tolerances,
            )?),
            Backend::Spectral => KernelKind::Spectral,
        };
        Ok(KernelAtEnergy { propagator: self.clone(), z, kind })
    }

    pub fn green(&self, x: f64, x0: f64, z: ComplexEnergy) -> Result<GreenValue, GreenError> {
        self.at_energy(z, x.min(x0), x.max(x0))?.green(x, x0)
    }

    /// Σₙ bra_n ket_n / (z − εₙ) for coefficients in this channel's eigenbasis.
    ///
    /// Sequences are taken as exact with implicit zeros beyond their length.
    /// The sum stops once the remaining terms are bounded below the relative
    /// tolerance; the bound on what was dropped is reported as the error.
    pub fn matrix_element(&self, bra: &[f64], ket: &[f64], z: ComplexEnergy) -> Result<GreenValue, GreenError> {
        self.check_pole(z)?;
        if bra.iter().chain(ket).any(|v| !v.is_finite()) {
            return Err(GreenError::NonDecaying);
        }
        let zv = z.value();
        let terms: Vec<C64> = bra
            .iter()
            .zip(ket)
            .enumerate()
            .map(|(n, (b, k))| b * k / (zv - self.channel.eigenvalue(n)))
            .collect();
        let mut suffix = vec![0.0; terms.len() + 1];
        for n in (0..terms.len()).rev() {
            suffix[n] = suffix[n + 1] + terms[n].norm();
        }
        let mut sum = C64::new(0.0, 0.0);
        for (n, t) in terms.iter().enumerate() {
            sum += t;
            let rest = suffix[n + 1];
            if rest <= self.tolerances.matrix_element_rtol * sum.norm() {
                return Ok(GreenValue { value: sum, error: rest });
            }
        }
        if !sum.is_finite() {
            return Err(GreenError::NonDecaying);
        }
        Ok(GreenValue { value: sum, error: 0.0 })
    }
}

#[derive(Debug, Clone)]
enum KernelKind {
    Wronskian(WronskianKernel),
    Spectral,
}

/// Green's function of one channel frozen at one energy.
#[derive(Debug, Clone)]
pub struct KernelAtEnergy {
    propagator: ChannelPropagator,
    z: ComplexEnergy,
    kind: KernelKind,
}

impl KernelAtEnergy {
    pub fn energy(&self) -> ComplexEnergy {
        self.z
    }

    pub fn covers(&self, x: f64) -> bool {
        match &self.kind {
            KernelKind::Wronskian(k) => k.covers(x),
            KernelKind::Spectral => true,
        }
    }

    pub fn green(&self, x: f64, x0: f64) -> Result<GreenValue, GreenError> {
        let p = &self.propagator;
        match &self.kind {
            KernelKind::Wronskian(k) => {
                if k.covers(x) && k.covers(x0) {
                    let value = k.green(x, x0);
                    return Ok(GreenValue { value, error: value.norm() * k.drift().max(f64::EPSILON) });
                }
                let wide = WronskianKernel::new(
                    &p.channel,
                    self.z.value(),
                    x.min(x0),
                    x.max(x0),
                    &p.tolerances,
                )?;
                let value = wide.green(x, x0);
                Ok(GreenValue { value, error: value.norm() * wide.drift().max(f64::EPSILON) })
            }
            KernelKind::Spectral => spectral::green(&p.channel, x, x0, self.z.value(), &p.tolerances),
        }
    }
}

/// G⁰(x, x₀; z) for one channel.
pub fn green0(propagator: &ChannelPropagator, x: f64, x0: f64, z: ComplexEnergy) -> Result<GreenValue, GreenError> {
    propagator.green(x, x0, z)
}

/// ⟨bra|G⁰(z)|ket⟩ from overlap coefficients in the channel eigenbasis.
pub fn matrix_element_green0(
    propagator: &ChannelPropagator,
    bra: &[f64],
    ket: &[f64],
    z: ComplexEnergy,
) -> Result<GreenValue, GreenError> {
    propagator.matrix_element(bra, ket, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn unit_channel() -> HarmonicChannel {
        HarmonicChannel::new(1.0, 1.0, 0.0, 0.0).unwrap()
    }

    fn z(re: f64, im: f64) -> ComplexEnergy {
        ComplexEnergy::new(re, im).unwrap()
    }

    #[test]
    fn negative_damping_is_rejected() {
        assert!(ComplexEnergy::new(1.0, -1e-3).is_err());
    }

    #[test]
    fn symmetric_in_its_arguments() {
        let p = ChannelPropagator::new(unit_channel());
        let a = p.green(0.3, -0.2, z(1.3, 0.1)).unwrap().value;
        let b = p.green(-0.2, 0.3, z(1.3, 0.1)).unwrap().value;
        assert!((a - b).norm() <= 1e-13 * a.norm());
    }

    #[test]
    fn real_and_negative_below_the_ground_level() {
        for backend in [Backend::Wronskian, Backend::Spectral] {
            let p = ChannelPropagator::with_backend(unit_channel(), backend, Tolerances::default());
            let g = p.green(0.0, 0.0, z(-1.0, 0.0)).unwrap().value;
            assert!(g.re < 0.0 && g.im.abs() < 1e-14, "{backend:?}: {g}");
        }
    }

    #[test]
    fn reference_energy_matches_closed_form() {
        // at z = −½ both backends reduce to the erfc solution
        let p = ChannelPropagator::new(unit_channel());
        let g = p.green(0.4, -0.7, z(-0.5, 0.0)).unwrap().value;
        let exact = spectral::reference_green(&unit_channel(), 0.4, -0.7);
        assert!((g.re - exact).abs() < 1e-12 * exact.abs(), "{g} vs {exact}");
    }

    #[test]
    fn derivative_jumps_by_twice_the_mass() {
        let ch = HarmonicChannel::new(2.5, 0.8, 0.3, -0.2).unwrap();
        let p = ChannelPropagator::new(ch);
        let e = z(1.1, 0.05);
        let x0 = 0.45;
        let h = 1e-5;
        let g = |x: f64| p.green(x, x0, e).unwrap().value;
        let right = (-3.0 * g(x0) + 4.0 * g(x0 + h) - g(x0 + 2.0 * h)) / (2.0 * h);
        let left = (3.0 * g(x0) - 4.0 * g(x0 - h) + g(x0 - 2.0 * h)) / (2.0 * h);
        let jump = right - left;
        assert!((jump - 2.0 * ch.mass()).norm() < 1e-4 * 2.0 * ch.mass(), "{jump}");
    }

    #[test]
    fn backends_agree_within_their_error_estimates() {
        let ch = HarmonicChannel::new(1.7, 0.6, -0.2, 0.4).unwrap();
        let w = ChannelPropagator::new(ch);
        let s = ChannelPropagator::with_backend(ch, Backend::Spectral, Tolerances::default());
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let x = rng.random_range(-2.0..2.0);
            let x0 = rng.random_range(-2.0..2.0);
            let e = z(rng.random_range(-0.5..4.0), rng.random_range(0.01..0.3));
            let a = w.green(x, x0, e).unwrap();
            let b = s.green(x, x0, e).unwrap();
            let bound = a.error.max(b.error);
            assert!((a.value - b.value).norm() <= bound, "{x} {x0} {e:?}: {} vs {} ± {bound:e}", a.value, b.value);
        }
    }

    #[test]
    fn diagonal_peaks_near_eigenvalues() {
        let ch = unit_channel();
        let p = ChannelPropagator::new(ch);
        let gamma = 0.02;
        for n in 0..5 {
            let e = ch.eigenvalue(n);
            // odd levels vanish at the minimum, so probe off-center
            let x = 0.37;
            let grid: Vec<f64> = (0..=400).map(|k| e - 0.3 + 0.6 * k as f64 / 400.0).collect();
            let peak = grid
                .iter()
                .copied()
                .max_by(|a, b| {
                    let ga = p.green(x, x, z(*a, gamma)).unwrap().value.norm();
                    let gb = p.green(x, x, z(*b, gamma)).unwrap().value.norm();
                    ga.total_cmp(&gb)
                })
                .unwrap();
            assert!((peak - e).abs() <= gamma / 2.0, "level {n}: peak {peak} vs {e}");
        }
    }

    #[test]
    fn pole_is_rejected_without_damping() {
        let p = ChannelPropagator::new(unit_channel());
        assert_eq!(
            p.green(0.0, 0.0, z(2.5, 0.0)).unwrap_err(),
            GreenError::Pole { level: 2, eigenvalue: 2.5 }
        );
        assert!(p.green(0.0, 0.0, z(2.5, 1e-3)).is_ok());
    }

    #[test]
    fn matrix_element_on_a_single_level() {
        let ch = HarmonicChannel::new(1.0, 0.7, 0.0, 0.2).unwrap();
        let p = ChannelPropagator::new(ch);
        let e = z(1.0, 0.1);
        let unit = [0.0, 0.0, 0.0, 1.0];
        let g = p.matrix_element(&unit, &unit, e).unwrap().value;
        assert_eq!(g, C64::new(1.0, 0.0) / (e.value() - ch.eigenvalue(3)));
        let other = [1.0, 0.5, 0.0, 0.0];
        assert_eq!(p.matrix_element(&unit, &other, e).unwrap().value, C64::new(0.0, 0.0));
    }

    #[test]
    fn matrix_element_rejects_non_finite_coefficients() {
        let p = ChannelPropagator::new(unit_channel());
        assert_eq!(p.matrix_element(&[f64::NAN], &[1.0], z(0.1, 0.1)).unwrap_err(), GreenError::NonDecaying);
    }

    #[test]
    fn kernel_evaluates_outside_its_cover() {
        let p = ChannelPropagator::new(unit_channel());
        let e = z(0.9, 0.2);
        let k = p.at_energy(e, -1.0, 1.0).unwrap();
        assert!(!k.covers(4.0));
        let a = k.green(4.0, 0.5).unwrap().value;
        let b = p.green(4.0, 0.5, e).unwrap().value;
        assert!((a - b).norm() <= 1e-12 * b.norm());
    }
}
