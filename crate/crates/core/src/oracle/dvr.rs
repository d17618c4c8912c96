//! Sinc-DVR resolvent of the two-channel Hamiltonian on a uniform grid.
//!
//! Basis functions θᵢ(x) = sinc(π(x − xᵢ)/Δx)/√Δx with the analytic kinetic
//! matrix Tᵢⱼ = (1/2mΔx²)·{π²/3 for i = j, 2(−1)^{i−j}/(i−j)² otherwise}. The
//! Hamiltonian is diagonalized once, so G(z) = Σₖ φₖφₖ/(z − λₖ) is cheap for
//! any number of energies. Off-grid points are reached by sinc interpolation.
//!
//! The basis is band-limited to |k| < K = π/Δx. The missing high-momentum part
//! of the resolvent is that of a free particle to leading order in 1/K²,
//! −(2m/π)∫_K^∞ cos(kr)/k² dk with r = |x − x₀|, and is added back to the
//! diagonal blocks. At r = 0 it is −2mΔx/π².

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use super::{OracleChannel, OracleError};
use crate::units;

/// Required points per local de Broglie wavelength.
const POINTS_PER_WAVELENGTH: f64 = 8.0;
const MIN_MARGIN_ANGSTROM: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingMode {
    /// No coupling: the two channels are independent.
    None,
    /// V(x) = K₀ exp(−α(x − x_c)²) sampled on the grid.
    GaussianExact { strength: f64, alpha: f64, center: f64 },
    /// Σⱼ kⱼ δ(x − xⱼ), projected onto the sinc basis.
    DeltaSet { positions: Vec<f64>, strengths: Vec<f64> },
}

/// Uniform grid [x_lo, x_hi] with `points` nodes (internal units).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub points: usize,
    pub mode: CouplingMode,
}

impl GridSpec {
    pub fn spacing(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.points - 1) as f64
    }

    fn node(&self, i: usize) -> f64 {
        self.x_lo + self.spacing() * i as f64
    }
}

#[derive(Debug)]
struct Eigen {
    values: Vec<f64>,
    vectors: Mat<f64>,
}

fn eigen(h: Mat<f64>) -> Result<Eigen, OracleError> {
    let e = h.self_adjoint_eigen(Side::Lower).map_err(|_| OracleError::Eigensolver)?;
    let values = (0..h.nrows()).map(|k| e.S()[k]).collect();
    Ok(Eigen { values, vectors: e.U().to_owned() })
}

#[derive(Debug)]
enum Spectrum {
    Joint(Eigen),
    Separate([Eigen; 2]),
}

/// Diagonalized grid Hamiltonian; evaluates all four blocks of G(x, x₀; z).
#[derive(Debug)]
pub struct DvrOracle {
    grid: GridSpec,
    channels: [OracleChannel; 2],
    spectrum: Spectrum,
    // delta sites inside the domain, with their projections per channel
    sites: Vec<(f64, f64)>,
    site_projections: [Vec<Vec<f64>>; 2],
    dropped_sites: usize,
}

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Sine integral Si(t) for t ≥ 0.
fn sine_integral(t: f64) -> f64 {
    if t <= 4.0 {
        let mut term = t;
        let mut sum = t;
        for n in 1..40 {
            let k = (2 * n) as f64;
            term *= -t * t / (k * (k + 1.0));
            sum += term / (k + 1.0);
        }
        sum
    } else {
        // E₁(it) = −Ci(t) + i(Si(t) − π/2), with
        // E₁(z) = e^{−z}/(z + 1 − 1²/(z + 3 − 2²/(z + 5 − …)))
        let z = C64::new(0.0, t);
        let mut f = z + 1.0 + 2.0 * 200.0;
        for n in (1..=200).rev() {
            f = z + 1.0 + 2.0 * (n - 1) as f64 - (n * n) as f64 / f;
        }
        let e1 = (-z).exp() / f;
        std::f64::consts::FRAC_PI_2 + e1.im
    }
}

/// −(2m/π)∫_K^∞ cos(kr)/k² dk with K = π/Δx.
fn band_tail(mass: f64, dx: f64, r: f64) -> f64 {
    let k = std::f64::consts::PI / dx;
    let t = k * r;
    let integral = (t.cos() - t * (std::f64::consts::FRAC_PI_2 - sine_integral(t))) / k;
    -2.0 * mass / std::f64::consts::PI * integral
}

/// Next term of the high-momentum expansion −2m/(k² − 2m(z − V)):
/// −((2m)²(z − V)/π)∫_K^∞ cos(kr)/k⁴ dk, with V taken locally.
fn band_tail_potential(mass: f64, dx: f64, r: f64, z_minus_v: C64) -> C64 {
    let k = std::f64::consts::PI / dx;
    let u = k * r;
    let (s, c) = u.sin_cos();
    let rest = std::f64::consts::FRAC_PI_2 - sine_integral(u);
    let integral = (c / 3.0 - u * s / 6.0 - u * u * c / 6.0 + u * u * u * rest / 6.0) / (k * k * k);
    -z_minus_v * (4.0 * mass * mass / std::f64::consts::PI * integral)
}

fn kinetic(mass: f64, dx: f64, i: usize, j: usize) -> f64 {
    let pre = 1.0 / (2.0 * mass * dx * dx);
    if i == j {
        pre * std::f64::consts::PI.powi(2) / 3.0
    } else {
        let d = i as f64 - j as f64;
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        pre * 2.0 * sign / (d * d)
    }
}

/// Builds and diagonalizes the grid Hamiltonian.
pub fn grid_resolvent(channels: [OracleChannel; 2], grid: GridSpec) -> Result<DvrOracle, OracleError> {
    DvrOracle::new(channels, grid)
}

impl DvrOracle {
    pub fn new(channels: [OracleChannel; 2], grid: GridSpec) -> Result<Self, OracleError> {
        if grid.points < 3 || !(grid.x_hi > grid.x_lo) {
            return Err(OracleError::InvalidGrid("need at least 3 points on a nonempty domain".into()));
        }
        let margin = units::angstrom(MIN_MARGIN_ANGSTROM);
        for ch in &channels {
            if ch.x_min - grid.x_lo < margin || grid.x_hi - ch.x_min < margin {
                return Err(OracleError::InvalidGrid(format!(
                    "channel minimum {:.4} Å lies within {MIN_MARGIN_ANGSTROM} Å of the domain edge",
                    units::to_angstrom(ch.x_min)
                )));
            }
        }
        let m = grid.points;
        let dx = grid.spacing();
        let single = |ch: &OracleChannel| {
            Mat::<f64>::from_fn(m, m, |i, j| {
                kinetic(ch.mass, dx, i, j) + if i == j { ch.potential(grid.node(i)) } else { 0.0 }
            })
        };

        let mut sites = Vec::new();
        let mut dropped_sites = 0;
        let spectrum = match &grid.mode {
            CouplingMode::GaussianExact { strength, alpha, center } => {
                let (h1, h2) = (single(&channels[0]), single(&channels[1]));
                let h = Mat::<f64>::from_fn(2 * m, 2 * m, |i, j| match (i < m, j < m) {
                    (true, true) => h1[(i, j)],
                    (false, false) => h2[(i - m, j - m)],
                    _ if i % m == j % m => {
                        let x = grid.node(i % m);
                        strength * (-alpha * (x - center).powi(2)).exp()
                    }
                    _ => 0.0,
                });
                Spectrum::Joint(eigen(h)?)
            }
            CouplingMode::DeltaSet { positions, strengths } => {
                if positions.len() != strengths.len() {
                    return Err(OracleError::InvalidGrid("site positions and strengths differ in length".into()));
                }
                for (&x, &k) in positions.iter().zip(strengths) {
                    if x >= grid.x_lo && x <= grid.x_hi {
                        sites.push((x, k));
                    } else {
                        dropped_sites += 1;
                    }
                }
                Spectrum::Separate([eigen(single(&channels[0]))?, eigen(single(&channels[1]))?])
            }
            CouplingMode::None => Spectrum::Separate([eigen(single(&channels[0]))?, eigen(single(&channels[1]))?]),
        };
        let mut oracle = Self {
            grid,
            channels,
            spectrum,
            sites,
            site_projections: [Vec::new(), Vec::new()],
            dropped_sites,
        };
        for a in 0..2 {
            oracle.site_projections[a] = oracle.sites.iter().map(|&(x, _)| oracle.projection(a, x)).collect();
        }
        Ok(oracle)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Delta sites outside the domain, which the grid cannot represent.
    pub fn dropped_sites(&self) -> usize {
        self.dropped_sites
    }

    /// Rejects energies whose local wavelength the grid cannot resolve.
    pub fn check_resolution(&self, z: C64) -> Result<(), OracleError> {
        let dx = self.grid.spacing();
        for ch in &self.channels {
            let v_min = [self.grid.x_lo, self.grid.x_hi, ch.x_min.clamp(self.grid.x_lo, self.grid.x_hi)]
                .into_iter()
                .map(|x| ch.potential(x))
                .fold(f64::INFINITY, f64::min);
            let kinetic_energy = z.re - v_min;
            if kinetic_energy > 0.0 {
                let wavelength = 2.0 * std::f64::consts::PI / (2.0 * ch.mass * kinetic_energy).sqrt();
                if dx > wavelength / POINTS_PER_WAVELENGTH {
                    return Err(OracleError::UnderResolved { spacing: dx, wavelength });
                }
            }
        }
        Ok(())
    }

    /// Eigenvector amplitudes of block `a` at x: Σᵢ U(a,i),k θᵢ(x).
    pub fn projection(&self, a: usize, x: f64) -> Vec<f64> {
        let m = self.grid.points;
        let dx = self.grid.spacing();
        let theta: Vec<f64> = (0..m)
            .map(|i| sinc(std::f64::consts::PI * (x - self.grid.node(i)) / dx) / dx.sqrt())
            .collect();
        let (u, offset) = match &self.spectrum {
            Spectrum::Joint(e) => (&e.vectors, a * m),
            Spectrum::Separate(es) => (&es[a].vectors, 0),
        };
        let mut out = vec![0.0; u.ncols()];
        for (i, t) in theta.iter().enumerate() {
            if t.abs() < 1e-300 {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                *o += u[(offset + i, k)] * t;
            }
        }
        out
    }

    fn values(&self, a: usize) -> &[f64] {
        match &self.spectrum {
            Spectrum::Joint(e) => &e.values,
            Spectrum::Separate(es) => &es[a].values,
        }
    }

    fn tail(&self, a: usize, x: f64, x0: f64, z: C64) -> C64 {
        let ch = &self.channels[a];
        let (dx, r) = (self.grid.spacing(), (x - x0).abs());
        let v = 0.5 * (ch.potential(x) + ch.potential(x0));
        band_tail(ch.mass, dx, r) + band_tail_potential(ch.mass, dx, r, z - v)
    }

    fn contract(values: &[f64], pa: &[f64], pb: &[f64], z: C64) -> C64 {
        values
            .iter()
            .zip(pa.iter().zip(pb))
            .map(|(&l, (&p, &q))| p * q / (z - l))
            .sum()
    }

    /// Uncoupled channel-`a` resolvent from precomputed projections.
    fn bare(&self, a: usize, pa: &[f64], pb: &[f64], x: f64, x0: f64, z: C64) -> C64 {
        Self::contract(self.values(a), pa, pb, z) + self.tail(a, x, x0, z)
    }

    /// G_ab(x, x₀; z) for blocks a, b ∈ {0, 1}.
    pub fn kernel(&self, a: usize, b: usize, x: f64, x0: f64, z: C64) -> Result<C64, OracleError> {
        assert!(a < 2 && b < 2, "block index out of range");
        let pa = self.projection(a, x);
        let pb = self.projection(b, x0);
        match &self.spectrum {
            Spectrum::Joint(e) => {
                let g = Self::contract(&e.values, &pa, &pb, z);
                Ok(if a == b { g + self.tail(a, x, x0, z) } else { g })
            }
            Spectrum::Separate(_) => {
                let base = if a == b { self.bare(a, &pa, &pb, x, x0, z) } else { C64::new(0.0, 0.0) };
                if self.sites.is_empty() {
                    return Ok(base);
                }
                Ok(base + self.site_correction(a, b, x, x0, &pa, &pb, z)?)
            }
        }
    }

    /// Rank-2N Dyson correction G⁰ B Vs (I − G⁰s Vs)⁻¹ Bᵀ G⁰ for the delta sites.
    #[allow(clippy::too_many_arguments)]
    fn site_correction(
        &self,
        a: usize,
        b: usize,
        x: f64,
        x0: f64,
        pa: &[f64],
        pb: &[f64],
        z: C64,
    ) -> Result<C64, OracleError> {
        let n = self.sites.len();
        // site-channel index s = c·n + j
        let g_sites = |c: usize, i: usize, j: usize| {
            let p = &self.site_projections[c];
            self.bare(c, &p[i], &p[j], self.sites[i].0, self.sites[j].0, z)
        };
        let mut system = Mat::<C64>::zeros(2 * n, 2 * n);
        for c in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    let g = g_sites(c, i, j);
                    // (G⁰s Vs) couples (c, i) to the other channel at site j
                    system[(c * n + i, (1 - c) * n + j)] = -g * self.sites[j].1;
                }
            }
        }
        for s in 0..2 * n {
            system[(s, s)] += C64::new(1.0, 0.0);
        }
        let mut rhs = Mat::<C64>::zeros(2 * n, 1);
        for j in 0..n {
            rhs[(b * n + j, 0)] = self.bare(b, &self.site_projections[b][j], pb, self.sites[j].0, x0, z);
        }
        let lu = system.partial_piv_lu();
        lu.solve_in_place(&mut rhs);
        if (0..2 * n).any(|s| !rhs[(s, 0)].is_finite()) {
            return Err(OracleError::Singular);
        }
        // w = Vs y lands on channel a at site j from channel 1 − a
        let mut out = C64::new(0.0, 0.0);
        for j in 0..n {
            let w = self.sites[j].1 * rhs[((1 - a) * n + j, 0)];
            out += self.bare(a, pa, &self.site_projections[a][j], x, self.sites[j].0, z) * w;
        }
        Ok(out)
    }
}
