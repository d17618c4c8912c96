//! Green's function as a sum over eigenstates, accelerated by subtracting a
//! closed-form reference Green's function at z_ref = ε − ω/2.
//!
//! At that energy the decaying solutions are g(±ξ) with g(t) = e^{t²/2} erfc(t),
//! so G(z_ref) is known exactly and the remaining sum
//! Σ ψₙψₙ (z_ref − z)/((z − εₙ)(z_ref − εₙ)) converges like the spectral sum of
//! the second derivative in energy.

use num_complex::Complex64 as C64;

use super::hermite::HermiteStream;
use super::{GreenError, GreenValue, Tolerances};
use crate::model::HarmonicChannel;

const FIRST_LEVEL_COUNT: usize = 64;
const LEVEL_MARGIN: f64 = 64.0;

/// ln(e^{t²} erfc(t)) for t ≥ 0.
fn ln_erfcx(t: f64) -> f64 {
    if t <= 5.0 {
        t * t + libm::erfc(t).ln()
    } else {
        // continued fraction erfcx(t) = (1/√π) / (t + ½/(t + 1/(t + 3/2/(t + …))))
        let mut f = t;
        for k in (1..=60).rev() {
            f = t + 0.5 * k as f64 / f;
        }
        -(std::f64::consts::PI.sqrt() * f).ln()
    }
}

/// ln g(t) with g(t) = e^{t²/2} erfc(t).
pub(crate) fn ln_g(t: f64) -> f64 {
    if t >= 0.0 {
        ln_erfcx(t) - 0.5 * t * t
    } else {
        libm::log1p(libm::erf(-t)) + 0.5 * t * t
    }
}

/// Closed-form G(x, x₀; ε − ω/2).
pub(crate) fn reference_green(channel: &HarmonicChannel, x: f64, x0: f64) -> f64 {
    let (a, b) = (channel.scaled(x), channel.scaled(x0));
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let pre = channel.mass() * std::f64::consts::PI.sqrt() / (2.0 * channel.inverse_width());
    -pre * (ln_g(-lo) + ln_g(hi)).exp()
}

pub(crate) fn reference_energy(channel: &HarmonicChannel) -> f64 {
    channel.origin() - 0.5 * channel.omega()
}

fn partial_sums(channel: &HarmonicChannel, x: f64, x0: f64, z: C64, counts: &[usize]) -> Vec<C64> {
    let z_ref = reference_energy(channel);
    let scale = channel.inverse_width();
    let mut a = HermiteStream::new(channel.scaled(x));
    let mut b = HermiteStream::new(channel.scaled(x0));
    let mut out = Vec::with_capacity(counts.len());
    let mut sum = C64::new(0.0, 0.0);
    let mut n = 0usize;
    for &count in counts {
        while n < count {
            let e = channel.eigenvalue(n);
            let w = a.next().expect("infinite") * b.next().expect("infinite");
            sum += (z_ref - z) * w / ((z - e) * (z_ref - e));
            n += 1;
        }
        out.push(sum * scale);
    }
    out
}

/// Bound on Σ_{n ≥ m} of the subtracted terms from the WKB envelope
/// |hₙ(ξ)| ≤ 1.2·√(2/π)·(2n + 1 − ξ²)^{-1/4}, valid once n is past ξ²/2.
fn tail_bound(channel: &HarmonicChannel, xi_max: f64, z: C64, m: usize) -> f64 {
    let omega = channel.omega();
    let z_ref = reference_energy(channel);
    let reach = (z - channel.origin()).norm().max((z_ref - channel.origin()).abs()) / omega;
    let b = (0.5 * xi_max * xi_max).max(reach) + 1.0;
    let gap = m as f64 - 1.0 - b;
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    let k = channel.inverse_width() * (2.0 / std::f64::consts::PI) * 1.44 * (z_ref - z).norm()
        / (std::f64::consts::SQRT_2 * omega * omega);
    2.0 * k / 3.0 * gap.powf(-1.5)
}

/// G(x, x₀; z) by the subtracted spectral sum with level doubling.
///
/// Convergence requires both the change between N and 2N levels and the
/// envelope bound on the remaining tail to fall below the tolerance; the
/// larger of the two is reported as the error.
pub(crate) fn green(
    channel: &HarmonicChannel,
    x: f64,
    x0: f64,
    z: C64,
    tol: &Tolerances,
) -> Result<GreenValue, GreenError> {
    let xi_max = channel.scaled(x).abs().max(channel.scaled(x0).abs());
    // levels below ξ²/2 are still classically forbidden at ξ and carry no tail information
    let needed = 0.5 * xi_max * xi_max + LEVEL_MARGIN;
    if needed > tol.spectral_max_levels as f64 {
        return Err(GreenError::NonConvergence {
            what: format!("spectral sum needs more than {} levels at ξ = {xi_max:.1}", tol.spectral_max_levels),
            estimate: f64::INFINITY,
            tolerance: tol.spectral_rtol,
        });
    }
    let mut n = FIRST_LEVEL_COUNT.max(needed.ceil() as usize);
    let base = C64::new(reference_green(channel, x, x0), 0.0);
    loop {
        let sums = partial_sums(channel, x, x0, z, &[n, 2 * n]);
        let value = base + sums[1];
        let error = (sums[1] - sums[0]).norm().max(tail_bound(channel, xi_max, z, 2 * n));
        if error <= tol.spectral_rtol * value.norm() {
            return Ok(GreenValue { value, error });
        }
        if 4 * n > tol.spectral_max_levels {
            return Err(GreenError::NonConvergence {
                what: "spectral sum tail".into(),
                estimate: error / value.norm(),
                tolerance: tol.spectral_rtol,
            });
        }
        n *= 2;
    }
}
