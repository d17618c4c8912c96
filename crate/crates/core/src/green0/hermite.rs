//! Normalized Hermite functions by the three-term recurrence, with a running
//! log scale so that the Gaussian factor never underflows mid-recurrence.

use crate::model::HarmonicChannel;

const RESCALE_ABOVE: f64 = 1e200;
const LN_RESCALE: f64 = 460.517_018_598_809_1; // ln(1e200)

/// h₀(ξ) … h_{n_max}(ξ) with ∫ hₙ hₘ dξ = δₙₘ.
pub fn hermite_functions(xi: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * xi * xi - 0.25 * std::f64::consts::PI.ln();
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    out.push(log_scale.exp());
    for k in 0..n_max {
        let kf = k as f64;
        let mut next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
        if next.abs() > RESCALE_ABOVE {
            next /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            log_scale += LN_RESCALE;
        }
        prev = cur;
        cur = next;
        out.push(cur * log_scale.exp());
    }
    out
}

/// Streaming form of [`hermite_functions`] for long spectral sums.
pub(crate) struct HermiteStream {
    xi: f64,
    k: usize,
    prev: f64,
    cur: f64,
    log_scale: f64,
}

impl HermiteStream {
    pub(crate) fn new(xi: f64) -> Self {
        Self {
            xi,
            k: 0,
            prev: 0.0,
            cur: 1.0,
            log_scale: -0.5 * xi * xi - 0.25 * std::f64::consts::PI.ln(),
        }
    }
}

impl Iterator for HermiteStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let value = self.cur * self.log_scale.exp();
        let kf = self.k as f64;
        let mut next =
            (2.0 / (kf + 1.0)).sqrt() * self.xi * self.cur - (kf / (kf + 1.0)).sqrt() * self.prev;
        if next.abs() > RESCALE_ABOVE {
            next /= RESCALE_ABOVE;
            self.cur /= RESCALE_ABOVE;
            self.log_scale += LN_RESCALE;
        }
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        Some(value)
    }
}

/// Normalized eigenfunctions ψ₀ … ψ_{n_max} of `channel` at x (internal units).
pub fn eigenfunctions(channel: &HarmonicChannel, x: f64, n_max: usize) -> Vec<f64> {
    let norm = channel.inverse_width().sqrt();
    let mut h = hermite_functions(channel.scaled(x), n_max);
    h.iter_mut().for_each(|v| *v *= norm);
    h
}

pub fn eigenfunction(channel: &HarmonicChannel, n: usize, x: f64) -> f64 {
    eigenfunctions(channel, x, n)[n]
}
