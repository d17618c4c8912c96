//! Diabatic channels, couplings and the delta-function discretization of a
//! smooth coupling profile.
//!
//! All stored quantities are in internal units (see [`crate::units`]); the
//! `from_spectroscopic` constructors take cm⁻¹ / Å / amu.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units;

/// Relative size of the truncated Gaussian tail when the coupling support is
/// derived automatically.
pub const DEFAULT_SUPPORT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("invalid quadrature scheme: {0}")]
    InvalidScheme(String),
    #[error("coupling profile is not finite at x = {x} (value {value})")]
    NonFiniteCoupling { x: f64, value: f64 },
    #[error("the two channels have identical potentials; every x is a crossing point")]
    DegeneratePotentials,
}

/// One diabatic harmonic curve, V(x) = origin + ½ m ω² (x − x_min)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicChannel {
    mass: f64,
    omega: f64,
    x_min: f64,
    origin: f64,
}

impl HarmonicChannel {
    pub fn new(mass: f64, omega: f64, x_min: f64, origin: f64) -> Result<Self, ModelError> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(ModelError::InvalidChannel(format!("mass must be positive, got {mass}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(ModelError::InvalidChannel(format!(
                "frequency must be positive, got {omega}"
            )));
        }
        if !x_min.is_finite() || !origin.is_finite() {
            return Err(ModelError::InvalidChannel(
                "minimum position and origin must be finite".into(),
            ));
        }
        Ok(Self { mass, omega, x_min, origin })
    }

    pub fn from_spectroscopic(
        mass_amu: f64,
        omega_cm1: f64,
        x_min_angstrom: f64,
        origin_cm1: f64,
    ) -> Result<Self, ModelError> {
        Self::new(
            units::amu(mass_amu),
            units::cm1(omega_cm1),
            units::angstrom(x_min_angstrom),
            units::cm1(origin_cm1),
        )
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Inverse of the ground-state length scale, √(mω).
    pub fn inverse_width(&self) -> f64 {
        (self.mass * self.omega).sqrt()
    }

    /// Dimensionless coordinate ξ = √(mω)(x − x_min).
    pub fn scaled(&self, x: f64) -> f64 {
        self.inverse_width() * (x - self.x_min)
    }

    pub fn unscaled(&self, xi: f64) -> f64 {
        self.x_min + xi / self.inverse_width()
    }

    pub fn potential(&self, x: f64) -> f64 {
        let d = x - self.x_min;
        self.origin + 0.5 * self.mass * self.omega * self.omega * d * d
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.origin + self.omega * (n as f64 + 0.5)
    }

    /// Quadratic coefficients (a, b, c) of V(x) = a x² + b x + c.
    fn quadratic(&self) -> [f64; 3] {
        let k = 0.5 * self.mass * self.omega * self.omega;
        [k, -2.0 * k * self.x_min, self.origin + k * self.x_min * self.x_min]
    }
}

/// Anything that can be sampled as a real coupling profile V(x).
pub trait CouplingProfile {
    fn value(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> CouplingProfile for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// V(x) = K₀ exp(−α (x − x_c)²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCoupling {
    strength: f64,
    alpha: f64,
    center: f64,
}

impl GaussianCoupling {
    pub fn new(strength: f64, alpha: f64, center: f64) -> Result<Self, ModelError> {
        if !strength.is_finite() {
            return Err(ModelError::InvalidCoupling("strength must be finite".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ModelError::InvalidCoupling(format!("width must be positive, got {alpha}")));
        }
        if !center.is_finite() {
            return Err(ModelError::InvalidCoupling("center must be finite".into()));
        }
        Ok(Self { strength, alpha, center })
    }

    /// `alpha_per_angstrom2` multiplies (x − x_c)² and therefore carries Å⁻².
    pub fn from_spectroscopic(
        strength_cm1: f64,
        alpha_per_angstrom2: f64,
        center_angstrom: f64,
    ) -> Result<Self, ModelError> {
        let a = units::angstrom(1.0);
        Self::new(
            units::cm1(strength_cm1),
            alpha_per_angstrom2 / (a * a),
            units::angstrom(center_angstrom),
        )
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// K₀ √(π/α).
    pub fn integral(&self) -> f64 {
        self.strength * (std::f64::consts::PI / self.alpha).sqrt()
    }

    /// Symmetric interval outside which the profile is below `rel_tol` of its peak.
    pub fn auto_support(&self, rel_tol: f64) -> (f64, f64) {
        let half = ((1.0 / rel_tol).ln() / self.alpha).sqrt();
        (self.center - half, self.center + half)
    }
}

impl CouplingProfile for GaussianCoupling {
    fn value(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.strength * (-self.alpha * d * d).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSite {
    pub position: f64,
    pub strength: f64,
}

/// V(x) = Σⱼ kⱼ δ(x − xⱼ); positions strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCoupling {
    sites: Vec<DeltaSite>,
}

impl DeltaCoupling {
    pub fn new(sites: Vec<DeltaSite>) -> Result<Self, ModelError> {
        if sites.is_empty() {
            return Err(ModelError::InvalidCoupling("at least one delta site is required".into()));
        }
        for s in &sites {
            if !s.position.is_finite() || !s.strength.is_finite() {
                return Err(ModelError::InvalidCoupling(format!(
                    "non-finite delta site ({}, {})",
                    s.position, s.strength
                )));
            }
        }
        if sites.windows(2).any(|w| w[1].position <= w[0].position) {
            return Err(ModelError::InvalidCoupling(
                "delta positions must be strictly increasing".into(),
            ));
        }
        Ok(Self { sites })
    }

    pub fn from_parts(positions: &[f64], strengths: &[f64]) -> Result<Self, ModelError> {
        if positions.len() != strengths.len() {
            return Err(ModelError::InvalidCoupling(format!(
                "{} positions but {} strengths",
                positions.len(),
                strengths.len()
            )));
        }
        Self::new(
            positions
                .iter()
                .zip(strengths)
                .map(|(&position, &strength)| DeltaSite { position, strength })
                .collect(),
        )
    }

    pub fn single(position: f64, strength: f64) -> Result<Self, ModelError> {
        Self::new(vec![DeltaSite { position, strength }])
    }

    pub fn sites(&self) -> &[DeltaSite] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.position).collect()
    }

    pub fn strengths(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.strength).collect()
    }

    /// True when every strength is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.sites.iter().all(|s| s.strength == 0.0)
    }

    pub fn total_strength(&self) -> f64 {
        self.sites.iter().map(|s| s.strength).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            sites: self
                .sites
                .iter()
                .map(|s| DeltaSite { position: s.position, strength: factor * s.strength })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    Midpoint,
    Trapezoid,
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureScheme {
    kind: QuadratureKind,
    points: usize,
    lo: f64,
    hi: f64,
}

impl QuadratureScheme {
    pub fn new(kind: QuadratureKind, points: usize, lo: f64, hi: f64) -> Result<Self, ModelError> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(ModelError::InvalidScheme(format!("empty or infinite support [{lo}, {hi}]")));
        }
        if points == 0 {
            return Err(ModelError::InvalidScheme("point count must be at least 1".into()));
        }
        if kind == QuadratureKind::Trapezoid && points < 2 {
            return Err(ModelError::InvalidScheme("trapezoid rule needs at least 2 points".into()));
        }
        Ok(Self { kind, points, lo, hi })
    }

    /// Scheme over the automatically derived support of a Gaussian profile.
    pub fn for_gaussian(
        coupling: &GaussianCoupling,
        kind: QuadratureKind,
        points: usize,
    ) -> Result<Self, ModelError> {
        let (lo, hi) = coupling.auto_support(DEFAULT_SUPPORT_TOLERANCE);
        Self::new(kind, points, lo, hi)
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Nodes in ascending order with their weights.
    pub fn nodes_and_weights(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi, n) = (self.lo, self.hi, self.points);
        match self.kind {
            QuadratureKind::Midpoint => {
                let h = (hi - lo) / n as f64;
                ((0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(), vec![h; n])
            }
            QuadratureKind::Trapezoid => {
                let h = (hi - lo) / (n - 1) as f64;
                let nodes = (0..n).map(|i| lo + i as f64 * h).collect();
                let mut weights = vec![h; n];
                weights[0] = 0.5 * h;
                weights[n - 1] = 0.5 * h;
                (nodes, weights)
            }
            QuadratureKind::GaussLegendre => {
                let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 1"));
                let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
                let mut pairs: Vec<(f64, f64)> =
                    rule.iter().map(|(x, w)| (mid + half * x, half * w)).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                pairs.into_iter().unzip()
            }
        }
    }
}

/// Replaces a smooth coupling by delta functions at the scheme's nodes with
/// strengths kⱼ = wⱼ V(xⱼ).
pub fn discretize_coupling(
    profile: &impl CouplingProfile,
    scheme: &QuadratureScheme,
) -> Result<DeltaCoupling, ModelError> {
    let (nodes, weights) = scheme.nodes_and_weights();
    let mut sites = Vec::with_capacity(nodes.len());
    for (x, w) in nodes.into_iter().zip(weights) {
        let value = profile.value(x);
        if !value.is_finite() {
            return Err(ModelError::NonFiniteCoupling { x, value });
        }
        sites.push(DeltaSite { position: x, strength: w * value });
    }
    DeltaCoupling::new(sites)
}

fn difference_quadratic(ch1: &HarmonicChannel, ch2: &HarmonicChannel) -> [f64; 3] {
    let (p, q) = (ch1.quadratic(), ch2.quadratic());
    [p[0] - q[0], p[1] - q[1], p[2] - q[2]]
}

/// Real roots of a x² + b x + c, ascending. `scale` sets what counts as a
/// vanishing leading coefficient.
fn quadratic_roots(a: f64, b: f64, c: f64, scale: f64) -> Vec<f64> {
    let eps = 1e-13 * scale;
    let mut roots = if a.abs() <= eps {
        if b.abs() <= eps {
            Vec::new()
        } else {
            vec![-c / b]
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            Vec::new()
        } else {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            if q == 0.0 {
                vec![0.0]
            } else {
                let (r1, r2) = (q / a, c / q);
                if r1 == r2 {
                    vec![r1]
                } else {
                    vec![r1, r2]
                }
            }
        }
    };
    // one Newton polish against cancellation in the closed form
    for r in roots.iter_mut() {
        let f = (a * *r + b) * *r + c;
        let df = 2.0 * a * *r + b;
        if df != 0.0 {
            *r -= f / df;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn coefficient_scale(ch1: &HarmonicChannel, ch2: &HarmonicChannel) -> f64 {
    let curv = ch1.quadratic()[0].max(ch2.quadratic()[0]);
    let energy = ch1.origin().abs().max(ch2.origin().abs()).max(ch1.omega()).max(ch2.omega());
    let reach = 1.0 + ch1.x_min().abs().max(ch2.x_min().abs());
    curv.max(energy / (reach * reach))
}

/// All real x with V₁(x) = V₂(x), ascending.
pub fn crossing_points(
    ch1: &HarmonicChannel,
    ch2: &HarmonicChannel,
) -> Result<Vec<f64>, ModelError> {
    let d = difference_quadratic(ch1, ch2);
    let scale = coefficient_scale(ch1, ch2);
    let reach = 1.0 + ch1.x_min().abs().max(ch2.x_min().abs());
    let tiny = 1e-13;
    if d[0].abs() <= tiny * scale
        && d[1].abs() <= tiny * scale * reach
        && d[2].abs() <= tiny * scale * reach * reach
    {
        return Err(ModelError::DegeneratePotentials);
    }
    Ok(quadratic_roots(d[0], d[1], d[2], scale))
}

/// Interval around each crossing point on which |V₁ − V₂| ≤ |V(x_c)|, with V
/// evaluated at that crossing point. Unbounded sides are reported as ±∞.
pub fn crossing_window(
    ch1: &HarmonicChannel,
    ch2: &HarmonicChannel,
    coupling: &impl CouplingProfile,
) -> Result<Vec<(f64, f64)>, ModelError> {
    let crossings = crossing_points(ch1, ch2)?;
    let d = difference_quadratic(ch1, ch2);
    let scale = coefficient_scale(ch1, ch2);
    Ok(crossings
        .into_iter()
        .map(|xc| {
            let level = coupling.value(xc).abs();
            if level == 0.0 {
                return (xc, xc);
            }
            let mut edges = quadratic_roots(d[0], d[1], d[2] - level, scale);
            edges.extend(quadratic_roots(d[0], d[1], d[2] + level, scale));
            let lo = edges.iter().copied().filter(|&r| r <= xc).fold(f64::NEG_INFINITY, f64::max);
            let hi = edges.iter().copied().filter(|&r| r >= xc).fold(f64::INFINITY, f64::min);
            (lo, hi)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bundled_channels() -> (HarmonicChannel, HarmonicChannel) {
        let allowed = HarmonicChannel::from_spectroscopic(35.4, 400.0, 0.2, 10700.0).unwrap();
        let forbidden = HarmonicChannel::from_spectroscopic(35.4, 400.0, 0.0, 11500.0).unwrap();
        (allowed, forbidden)
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn channel_rejects_bad_parameters() {
        assert!(HarmonicChannel::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(HarmonicChannel::new(1.0, -1.0, 0.0, 0.0).is_err());
        assert!(HarmonicChannel::new(1.0, 1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn eigenvalues_are_evenly_spaced() {
        let ch = HarmonicChannel::new(2.0, 0.5, 1.0, -3.0).unwrap();
        for n in 0..10 {
            assert_eq!(ch.eigenvalue(n), -3.0 + 0.5 * (n as f64 + 0.5));
        }
    }

    #[test]
    fn zero_profile_gives_zero_strengths() {
        for kind in [QuadratureKind::Midpoint, QuadratureKind::Trapezoid, QuadratureKind::GaussLegendre] {
            let scheme = QuadratureScheme::new(kind, 7, -2.0, 3.0).unwrap();
            let d = discretize_coupling(&|_x: f64| 0.0, &scheme).unwrap();
            assert!(d.is_zero());
            assert_eq!(d.len(), 7);
        }
    }

    #[test]
    fn trapezoid_three_nodes() {
        let g = GaussianCoupling::from_spectroscopic(1.0, 1.0, 0.0).unwrap();
        let a = units::angstrom(1.0);
        let scheme = QuadratureScheme::new(QuadratureKind::Trapezoid, 3, -a, a).unwrap();
        let d = discretize_coupling(&g, &scheme).unwrap();
        let unit = a * units::cm1(1.0);
        let e = (-1.0f64).exp();
        let expected = [0.5 * e, 1.0, 0.5 * e];
        for (site, want) in d.sites().iter().zip(expected) {
            assert!((site.strength / unit - want).abs() < 1e-14, "{} vs {want}", site.strength / unit);
        }
        assert_eq!(d.positions(), vec![-a, 0.0, a]);
    }

    #[test]
    fn gauss_legendre_reproduces_gaussian_integral() {
        let g = GaussianCoupling::from_spectroscopic(1200.0, 0.2594, -0.1991).unwrap();
        let scheme = QuadratureScheme::for_gaussian(&g, QuadratureKind::GaussLegendre, 48).unwrap();
        let d = discretize_coupling(&g, &scheme).unwrap();
        let exact = g.integral();
        let rel = (d.total_strength() - exact).abs() / exact;
        assert!(rel < 1e-7, "relative error {rel}");
        // truncation at 1e-8 of the peak dominates; against the truncated integral
        // the rule is converged far beyond that
        let (lo, hi) = scheme.support();
        let sa = g.alpha().sqrt();
        let truncated = exact
            * 0.5
            * (libm::erf(sa * (hi - g.center())) - libm::erf(sa * (lo - g.center())));
        let rel = (d.total_strength() - truncated).abs() / truncated;
        assert!(rel < 1e-10, "relative error {rel}");
    }

    #[test]
    fn trapezoid_converges_at_second_order() {
        let f = |x: f64| (x * x).cos() + x;
        let exact = 0.904524237900272 + 0.5; // ∫₀¹ cos(x²) dx + 1/2
        let err = |n| {
            let s = QuadratureScheme::new(QuadratureKind::Trapezoid, n, 0.0, 1.0).unwrap();
            (discretize_coupling(&f, &s).unwrap().total_strength() - exact).abs()
        };
        let (e1, e2) = (err(41), err(81));
        assert!((e1 / e2 - 4.0).abs() < 0.1, "ratio {}", e1 / e2);
    }

    #[test]
    fn scheme_validation() {
        assert!(QuadratureScheme::new(QuadratureKind::Midpoint, 4, 1.0, 1.0).is_err());
        assert!(QuadratureScheme::new(QuadratureKind::Midpoint, 0, 0.0, 1.0).is_err());
        assert!(QuadratureScheme::new(QuadratureKind::Trapezoid, 1, 0.0, 1.0).is_err());
        let s = QuadratureScheme::new(QuadratureKind::GaussLegendre, 1, 0.0, 1.0).unwrap();
        let (x, w) = s.nodes_and_weights();
        assert!((x[0] - 0.5).abs() < 1e-15 && (w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_profile_is_rejected() {
        let s = QuadratureScheme::new(QuadratureKind::Midpoint, 2, -1.0, 1.0).unwrap();
        assert!(discretize_coupling(&|x: f64| 1.0 / x, &s).is_ok());
        let s = QuadratureScheme::new(QuadratureKind::Trapezoid, 3, -1.0, 1.0).unwrap();
        assert!(matches!(
            discretize_coupling(&|x: f64| 1.0 / x, &s),
            Err(ModelError::NonFiniteCoupling { .. })
        ));
    }

    #[test]
    fn delta_coupling_validation() {
        assert!(DeltaCoupling::new(vec![]).is_err());
        assert!(DeltaCoupling::from_parts(&[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(DeltaCoupling::from_parts(&[1.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(DeltaCoupling::from_parts(&[0.0], &[1.0, 1.0]).is_err());
        assert!(DeltaCoupling::from_parts(&[0.0, 1.0], &[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn symmetric_crossing_at_midpoint() {
        let a = 0.7;
        let ch1 = HarmonicChannel::new(3.0, 2.0, 0.0, 1.0).unwrap();
        let ch2 = HarmonicChannel::new(3.0, 2.0, a, 1.0).unwrap();
        let x = crossing_points(&ch1, &ch2).unwrap();
        assert_eq!(x.len(), 1);
        assert!((x[0] - a / 2.0).abs() < 1e-15);
    }

    #[test]
    fn identical_channels_are_degenerate() {
        let ch = HarmonicChannel::new(3.0, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(crossing_points(&ch, &ch), Err(ModelError::DegeneratePotentials));
    }

    #[test]
    fn paper_crossing_matches_bisection() {
        let (allowed, forbidden) = bundled_channels();
        let x = crossing_points(&allowed, &forbidden).unwrap();
        assert_eq!(x.len(), 1);
        let oracle = bisect(
            |x| allowed.potential(x) - forbidden.potential(x),
            units::angstrom(-2.0),
            units::angstrom(2.0),
        );
        assert!((x[0] - oracle).abs() < 1e-12);
        // standard conversions put the crossing near +0.076 Å, not at −0.1991 Å
        let xa = units::to_angstrom(x[0]);
        assert!((xa - 0.0762).abs() < 1e-3, "{xa}");
    }

    #[test]
    fn window_collapses_without_coupling() {
        let (allowed, forbidden) = bundled_channels();
        let w = crossing_window(&allowed, &forbidden, &|_x: f64| 0.0).unwrap();
        let xc = crossing_points(&allowed, &forbidden).unwrap()[0];
        assert_eq!(w, vec![(xc, xc)]);
    }

    #[test]
    fn window_half_width_for_linear_difference() {
        let (allowed, forbidden) = bundled_channels();
        let xc = crossing_points(&allowed, &forbidden).unwrap()[0];
        let level = units::cm1(50.0);
        let w = crossing_window(&allowed, &forbidden, &|_x: f64| level).unwrap();
        let h = 1e-4;
        let slope = |ch: &HarmonicChannel| (ch.potential(xc + h) - ch.potential(xc - h)) / (2.0 * h);
        let half = level / (slope(&allowed) - slope(&forbidden)).abs();
        assert!(((w[0].1 - w[0].0) / 2.0 - half).abs() < 1e-9 * half);
    }

    #[test]
    fn paper_window_matches_scan_and_bisection() {
        let (allowed, forbidden) = bundled_channels();
        let g = GaussianCoupling::from_spectroscopic(1200.0, 0.2594, -0.1991).unwrap();
        let xc = crossing_points(&allowed, &forbidden).unwrap()[0];
        let level = g.value(xc).abs();
        let excess = |x: f64| (allowed.potential(x) - forbidden.potential(x)).abs() - level;
        // scan outward for the first sign change on each side, then bisect
        let step = units::angstrom(1e-3);
        let mut right = xc;
        while excess(right) <= 0.0 {
            right += step;
        }
        let mut left = xc;
        while excess(left) <= 0.0 {
            left -= step;
        }
        let hi = bisect(excess, right - step, right);
        let lo = bisect(excess, left, left + step);
        let w = crossing_window(&allowed, &forbidden, &g).unwrap();
        assert!((w[0].0 - lo).abs() < 1e-10 && (w[0].1 - hi).abs() < 1e-10, "{w:?} vs ({lo}, {hi})");
    }

    #[test]
    fn unequal_curvature_gives_two_crossings() {
        let ch1 = HarmonicChannel::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let ch2 = HarmonicChannel::new(1.0, 2.0, 0.0, -1.0).unwrap();
        let x = crossing_points(&ch1, &ch2).unwrap();
        assert_eq!(x.len(), 2);
        assert!(x[0] < x[1]);
    }

    proptest! {
        #[test]
        fn discretization_is_linear(c in -5.0f64..5.0, n in 1usize..40) {
            let g = GaussianCoupling::new(1.3, 0.8, 0.1).unwrap();
            let scaled = |x: f64| c * g.value(x);
            let s = QuadratureScheme::new(QuadratureKind::GaussLegendre, n, -3.0, 3.5).unwrap();
            let base = discretize_coupling(&g, &s).unwrap();
            let lin = discretize_coupling(&scaled, &s).unwrap();
            for (a, b) in base.sites().iter().zip(lin.sites()) {
                prop_assert_eq!(a.position, b.position);
                prop_assert!((c * a.strength - b.strength).abs() <= 1e-14 * a.strength.abs().max(1e-300) * 4.0);
            }
        }

        #[test]
        fn crossing_roots_satisfy_equality(
            m1 in 0.5f64..3.0, w1 in 0.5f64..3.0, a1 in -2.0f64..2.0, e1 in -5.0f64..5.0,
            m2 in 0.5f64..3.0, w2 in 0.5f64..3.0, a2 in -2.0f64..2.0, e2 in -5.0f64..5.0,
        ) {
            let ch1 = HarmonicChannel::new(m1, w1, a1, e1).unwrap();
            let ch2 = HarmonicChannel::new(m2, w2, a2, e2).unwrap();
            if let Ok(roots) = crossing_points(&ch1, &ch2) {
                for x in roots {
                    let (v1, v2) = (ch1.potential(x), ch2.potential(x));
                    prop_assert!((v1 - v2).abs() <= 1e-9 * v1.abs().max(v2.abs()).max(1.0));
                }
            }
        }
    }
}
