//! Green's function of a harmonic channel from two homogeneous solutions.
//!
//! In ξ = √(mω)(x − x_min) the homogeneous equation (z − H)u = 0 becomes
//! u'' = (ξ² − c)u with c = 2(z − ε)/ω. The solution decaying to the right is
//! seeded with its WKB form well inside the classically forbidden region and
//! carried inward by Taylor-series steps; the recurrence for the Taylor
//! coefficients is exact because the coefficient ξ² − c is a polynomial. The
//! left-decaying solution is the mirror image, since the equation is even in ξ.
//!
//! Inward integration follows the growing direction of the wanted solution,
//! so any admixture of the other solution introduced by the seed decays away.
//! Values are carried as (mantissa, log scale) pairs so that sweeps across
//! thousands of e-folds neither overflow nor underflow.

use num_complex::Complex64 as C64;

use super::{GreenError, Tolerances};
use crate::model::HarmonicChannel;

const MAX_STEP: f64 = 0.5;
const STEP_PHASE: f64 = 2.5;
const SERIES_CAP: usize = 400;
const SERIES_TOL: f64 = 1e-17;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Scaled {
    pub u: C64,
    pub du: C64,
    pub log_scale: f64,
}

fn l1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// One Taylor step of u'' = (ξ² − c)u from ξ₀ by h (h may be negative).
fn taylor_step(c: C64, xi0: f64, u: C64, du: C64, h: f64) -> (C64, C64) {
    let h2 = h * h;
    let a = (C64::new(xi0 * xi0, 0.0) - c) * h2;
    let b = 2.0 * xi0 * h2 * h;
    let d = h2 * h2;
    // scaled coefficients b_k = a_k h^k, window holds b_{k-3} .. b_k
    let zero = C64::new(0.0, 0.0);
    let mut w = [zero, zero, u, du * h];
    let mut sum = w[2] + w[3];
    let mut dsum = w[3];
    for k in 1..SERIES_CAP {
        let next = (a * w[2] + w[1] * b + w[0] * d) / ((k + 1) * k) as f64;
        w = [w[1], w[2], w[3], next];
        sum += next;
        dsum += next * (k + 1) as f64;
        let tail = l1(w[1]) + l1(w[2]) + l1(w[3]);
        if k > 3 && tail <= SERIES_TOL * (l1(sum) + l1(dsum)) {
            break;
        }
    }
    (sum, dsum / h)
}

/// Right-decaying solution tabulated at the end of every step of an inward sweep.
#[derive(Debug, Clone)]
pub(crate) struct DecayingBranch {
    c: C64,
    // strictly decreasing
    xi: Vec<f64>,
    u: Vec<C64>,
    du: Vec<C64>,
    log_scale: Vec<f64>,
}

/// Seed location: deep enough in the forbidden region for the seed's admixture
/// of the growing solution to be suppressed below round-off at `xi_hi`.
pub(crate) fn seed_position(c: C64, xi_hi: f64) -> f64 {
    let turning = c.re.max(0.0).sqrt();
    let forbidden = (c.re + (10.0 * c.im).max(16.0)).max(0.0).sqrt();
    let margin = 20.0 / (xi_hi * xi_hi - c.re).max(1.0).sqrt();
    forbidden.max(turning + 6.0).max(xi_hi + margin.max(0.5))
}

impl DecayingBranch {
    pub(crate) fn integrate(c: C64, xi_lo: f64, xi_hi: f64) -> Self {
        let seed = seed_position(c, xi_hi);
        let q = C64::new(seed * seed, 0.0) - c;
        let s = q.sqrt();
        let du = -s - C64::new(2.0 * seed, 0.0) / (4.0 * q);

        let mut branch = Self {
            c,
            xi: vec![seed],
            u: vec![C64::new(1.0, 0.0)],
            du: vec![du],
            log_scale: vec![0.0],
        };
        let (mut x, mut u, mut du, mut ls) = (seed, C64::new(1.0, 0.0), du, 0.0);
        while x > xi_lo {
            let q = C64::new(x * x, 0.0) - c;
            let h = (STEP_PHASE / (q.norm().sqrt() + 1.0)).min(MAX_STEP).min(x - xi_lo);
            let (nu, ndu) = taylor_step(c, x, u, du, -h);
            x = if x - h <= xi_lo { xi_lo } else { x - h };
            u = nu;
            du = ndu;
            let mag = l1(u).max(l1(du));
            if !(1e-50..=1e50).contains(&mag) {
                u /= mag;
                du /= mag;
                ls += mag.ln();
            }
            branch.xi.push(x);
            branch.u.push(u);
            branch.du.push(du);
            branch.log_scale.push(ls);
        }
        branch
    }

    pub(crate) fn covers(&self, xi: f64) -> bool {
        xi <= self.xi[0] && xi >= *self.xi.last().expect("non-empty")
    }

    pub(crate) fn eval(&self, xi: f64) -> Scaled {
        debug_assert!(self.covers(xi), "ξ = {xi} outside sweep");
        // last checkpoint at or beyond ξ on the seed side
        let i = self.xi.partition_point(|&x| x >= xi).max(1) - 1;
        let h = xi - self.xi[i];
        if h == 0.0 {
            return Scaled { u: self.u[i], du: self.du[i], log_scale: self.log_scale[i] };
        }
        let (u, du) = taylor_step(self.c, self.xi[i], self.u[i], self.du[i], h);
        Scaled { u, du, log_scale: self.log_scale[i] }
    }

    #[cfg(test)]
    pub(crate) fn steps(&self) -> usize {
        self.xi.len()
    }
}

/// Both homogeneous solutions of one channel at one complex energy.
#[derive(Debug, Clone)]
pub(crate) struct WronskianKernel {
    channel: HarmonicChannel,
    prefactor: f64,
    right: DecayingBranch,
    // mirror image: left(ξ) = right'(−ξ)
    left: DecayingBranch,
    w: C64,
    w_log: f64,
    drift: f64,
    xi_range: (f64, f64),
}

impl WronskianKernel {
    /// Prepares solutions covering [x_lo, x_hi] (and always the channel minimum).
    pub(crate) fn new(
        channel: &HarmonicChannel,
        z: C64,
        x_lo: f64,
        x_hi: f64,
        tol: &Tolerances,
    ) -> Result<Self, GreenError> {
        let xi_lo = channel.scaled(x_lo).min(0.0);
        let xi_hi = channel.scaled(x_hi).max(0.0);
        let c = (z - channel.origin()) * (2.0 / channel.omega());
        let right = DecayingBranch::integrate(c, xi_lo, xi_hi);
        let left = DecayingBranch::integrate(c, -xi_hi, -xi_lo);
        let mut kernel = Self {
            channel: *channel,
            prefactor: 2.0 * channel.mass() / channel.inverse_width(),
            right,
            left,
            w: C64::new(0.0, 0.0),
            w_log: 0.0,
            drift: 0.0,
            xi_range: (xi_lo, xi_hi),
        };
        let (w, w_log) = kernel.wronskian_at(0.0);
        if w == C64::new(0.0, 0.0) || !w.is_finite() {
            return Err(GreenError::NonConvergence {
                what: "vanishing Wronskian".into(),
                estimate: f64::INFINITY,
                tolerance: tol.wronskian_drift,
            });
        }
        kernel.w = w;
        kernel.w_log = w_log;

        let samples = 16;
        let mut drift = 0.0f64;
        for k in 0..=samples {
            let xi = (xi_lo + (xi_hi - xi_lo) * k as f64 / samples as f64).clamp(xi_lo, xi_hi);
            let (wi, li) = kernel.wronskian_at(xi);
            let ratio = wi / w * (li - w_log).exp();
            drift = drift.max((ratio - 1.0).norm());
        }
        if !(drift <= tol.wronskian_drift) {
            return Err(GreenError::NonConvergence {
                what: "Wronskian drift along the sweep".into(),
                estimate: drift,
                tolerance: tol.wronskian_drift,
            });
        }
        kernel.drift = drift;
        Ok(kernel)
    }

    fn left_at(&self, xi: f64) -> Scaled {
        let s = self.left.eval(-xi);
        Scaled { u: s.u, du: -s.du, log_scale: s.log_scale }
    }

    fn wronskian_at(&self, xi: f64) -> (C64, f64) {
        let l = self.left_at(xi);
        let r = self.right.eval(xi);
        (l.u * r.du - l.du * r.u, l.log_scale + r.log_scale)
    }

    pub(crate) fn covers(&self, x: f64) -> bool {
        let xi = self.channel.scaled(x);
        xi >= self.xi_range.0 && xi <= self.xi_range.1
    }

    pub(crate) fn drift(&self) -> f64 {
        self.drift
    }

    /// G(x, x₀) for covered points.
    pub(crate) fn green(&self, x: f64, x0: f64) -> C64 {
        let (a, b) = (self.channel.scaled(x), self.channel.scaled(x0));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let l = self.left_at(lo);
        let r = self.right.eval(hi);
        let mag = (l.log_scale + r.log_scale - self.w_log).exp();
        l.u * r.u / self.w * (self.prefactor * mag)
    }
}
