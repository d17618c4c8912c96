//! Closed-form absorption and Raman curves without inter-channel coupling.

use num_complex::Complex64 as C64;

use super::franck_condon::displaced_overlaps;
use super::OracleError;

const FC_TAIL: f64 = 1e-14;

/// Ground and excited oscillators of equal frequency (internal units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncoupledParams {
    pub mass: f64,
    pub ground_omega: f64,
    pub excited_omega: f64,
    /// Excited minimum measured from the ground minimum.
    pub shift: f64,
    pub excited_origin: f64,
    pub damping: f64,
    pub energy_offset: f64,
    pub initial_level: usize,
    pub final_level: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncoupledCurves {
    pub absorption: Vec<f64>,
    pub raman: Vec<f64>,
}

/// Absorption Σₙ FCₙ Γ/((E_z − εₙ)² + Γ²) and Raman |Σₙ ⟨f|n⟩⟨n|i⟩/(z − εₙ)|² with
/// z = E + E₀(i + ½) + offset + iΓ, at each photon energy E.
pub fn uncoupled_spectrum_reference(p: &UncoupledParams, energies: &[f64]) -> Result<UncoupledCurves, OracleError> {
    if (p.ground_omega - p.excited_omega).abs() > 1e-12 * p.ground_omega {
        return Err(OracleError::UnequalFrequencies);
    }
    let omega = p.excited_omega;
    let alpha = -p.shift * (0.5 * p.mass * omega).sqrt();
    let s = alpha * alpha;
    let m_max = p.initial_level.max(p.final_level);
    // generous cut; trimmed below once the Poisson-like tail is negligible
    let n_cut = (s + 12.0 * s.sqrt() + 60.0 + 2.0 * m_max as f64) as usize;
    let d = displaced_overlaps(alpha, n_cut, m_max);
    let mut tail = 0.0;
    let mut n_used = d.len();
    for n in (0..d.len()).rev() {
        tail += d[n][p.initial_level].powi(2);
        if tail >= FC_TAIL {
            n_used = n + 1;
            break;
        }
    }
    let level = |n: usize| p.excited_origin + omega * (n as f64 + 0.5);
    let shift = p.ground_omega * (p.initial_level as f64 + 0.5) + p.energy_offset;

    let mut absorption = Vec::with_capacity(energies.len());
    let mut raman = Vec::with_capacity(energies.len());
    for &e in energies {
        let z = C64::new(e + shift, p.damping);
        let mut a = 0.0;
        let mut r = C64::new(0.0, 0.0);
        for (n, row) in d.iter().enumerate().take(n_used) {
            let ci = row[p.initial_level];
            let cf = row[p.final_level];
            let de = z.re - level(n);
            a += ci * ci * p.damping / (de * de + p.damping * p.damping);
            r += cf * ci / (z - level(n));
        }
        absorption.push(a);
        raman.push(r.norm_sqr());
    }
    Ok(UncoupledCurves { absorption, raman })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(shift: f64) -> UncoupledParams {
        UncoupledParams {
            mass: 1.0,
            ground_omega: 1.0,
            excited_omega: 1.0,
            shift,
            excited_origin: 10.0,
            damping: 0.1,
            energy_offset: 0.0,
            initial_level: 0,
            final_level: 1,
        }
    }

    #[test]
    fn undisplaced_absorption_is_one_lorentzian() {
        // peak at ε + ω/2 − E₀/2 = 10
        let e = [9.9, 10.0, 10.3];
        let c = uncoupled_spectrum_reference(&params(0.0), &e).unwrap();
        for (k, &x) in e.iter().enumerate() {
            let expected = 0.1 / ((x - 10.0).powi(2) + 0.01);
            assert!((c.absorption[k] - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn undisplaced_fundamental_raman_vanishes() {
        let c = uncoupled_spectrum_reference(&params(1e-9), &[10.0, 11.0]).unwrap();
        assert!(c.raman.iter().all(|&r| r < 1e-15));
    }

    #[test]
    fn unequal_frequencies_are_rejected() {
        let mut p = params(0.5);
        p.excited_omega = 1.1;
        assert_eq!(uncoupled_spectrum_reference(&p, &[1.0]), Err(OracleError::UnequalFrequencies));
    }
}
