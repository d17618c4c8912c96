//! Exact resolvent of two harmonic channels coupled through delta sites.
//!
//! With V = Σⱼ kⱼ|xⱼ⟩⟨xⱼ| coupling the channels both ways, block elimination
//! gives G₁₁ = g₁ + g₁ V g₂ V G₁₁. Evaluated at the sites this closes into the
//! N×N system A p = q with A = I − G₁ M, M = K G₂ K, where G₁ and G₂ are the
//! uncoupled kernels tabulated between sites and K = diag(kⱼ). The kernel at
//! arbitrary points then follows from G₁₁(x, x₀) = g₁(x, x₀) + Σₗ g₁(x, xₗ)(M p)ₗ.
//! The channel-swapped system gives G₂₂, and the off-diagonal blocks follow
//! from G₁₂ = G₁₁ V g₂ or equivalently G₁₂ = g₁ V G₂₂.

use num_complex::Complex64 as C64;

use crate::green0::{eigenfunctions, ChannelPropagator, ComplexEnergy, GreenError, KernelAtEnergy};
use crate::linalg::{LinalgError, Lu, Matrix};
use crate::model::DeltaCoupling;

/// Solves are rejected above this relative residual.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// A is treated as singular above this condition number, 1/(100·ε).
pub const MAX_CONDITION: f64 = 1.0 / (100.0 * f64::EPSILON);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoupledError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error("coupled system is singular at z = {energy} + {damping}i (condition number {condition:e})")]
    Singular { energy: f64, damping: f64, condition: f64 },
    #[error("solve residual {residual:e} above tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
}

/// How the second channel's kernel enters the site system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteClosure {
    /// M = K G₂ K with every site pair; exact for the delta-site Hamiltonian.
    #[default]
    Full,
    /// M = diag(kⱼ² G₂(xⱼ, xⱼ)); drops propagation between distinct sites on
    /// the second channel. Agrees with `Full` for one site.
    Diagonal,
}

/// Two channel propagators and the delta coupling between them.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    channels: [ChannelPropagator; 2],
    coupling: DeltaCoupling,
    closure: SiteClosure,
}

impl CoupledSystem {
    pub fn new(channel1: ChannelPropagator, channel2: ChannelPropagator, coupling: DeltaCoupling) -> Self {
        Self { channels: [channel1, channel2], coupling, closure: SiteClosure::default() }
    }

    pub fn with_closure(mut self, closure: SiteClosure) -> Self {
        self.closure = closure;
        self
    }

    pub fn channel(&self, c: usize) -> &ChannelPropagator {
        &self.channels[c]
    }

    pub fn coupling(&self) -> &DeltaCoupling {
        &self.coupling
    }

    pub fn closure(&self) -> SiteClosure {
        self.closure
    }

    /// The same system with the channel labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            channels: [self.channels[1].clone(), self.channels[0].clone()],
            coupling: self.coupling.clone(),
            closure: self.closure,
        }
    }

    /// Tabulates both uncoupled kernels at the sites and factorizes the site
    /// systems of both channels at energy z.
    pub fn factorize(&self, z: ComplexEnergy) -> Result<FactorizedSystem, CoupledError> {
        let x = self.coupling.positions();
        let k = self.coupling.strengths();
        let n = x.len();
        let site_lo = x.first().copied().unwrap_or(0.0);
        let site_hi = x.last().copied().unwrap_or(0.0);

        let mut kernels = Vec::with_capacity(2);
        let mut tables = Vec::with_capacity(2);
        for p in &self.channels {
            p.check_pole(z)?;
            let (lo, hi) = p.default_cover(z);
            let kernel = p.at_energy(z, lo.min(site_lo), hi.max(site_hi))?;
            let mut t = Matrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let g = kernel.green(x[i], x[j])?.value;
                    t[(i, j)] = g;
                    t[(j, i)] = g;
                }
            }
            kernels.push(kernel);
            tables.push(t);
        }
        let closure = |other: &Matrix| match self.closure {
            SiteClosure::Full => Matrix::from_fn(n, |i, j| k[i] * other[(i, j)] * k[j]),
            SiteClosure::Diagonal => {
                Matrix::from_fn(n, |i, j| if i == j { k[i] * k[i] * other[(i, i)] } else { C64::new(0.0, 0.0) })
            }
        };
        let m = [closure(&tables[1]), closure(&tables[0])];
        let factor = |own: &Matrix, m: &Matrix| -> Result<Lu, CoupledError> {
            let a = Matrix::from_fn(n, |i, j| {
                let gm: C64 = (0..n).map(|l| own[(i, l)] * m[(l, j)]).sum();
                if i == j {
                    C64::new(1.0, 0.0) - gm
                } else {
                    -gm
                }
            });
            Lu::new(a, MAX_CONDITION).map_err(|e| map_linalg(e, z))
        };
        let lu = [factor(&tables[0], &m[0])?, factor(&tables[1], &m[1])?];
        let [k1, k2]: [KernelAtEnergy; 2] = kernels.try_into().expect("two channels");
        let [t1, t2]: [Matrix; 2] = tables.try_into().expect("two channels");
        Ok(FactorizedSystem {
            z,
            sites: x,
            strengths: k,
            channels: self.channels.clone(),
            kernels: [k1, k2],
            tables: [t1, t2],
            m,
            lu,
        })
    }
}

fn map_linalg(e: LinalgError, z: ComplexEnergy) -> CoupledError {
    match e {
        LinalgError::Singular { condition } => CoupledError::Singular { energy: z.re(), damping: z.im(), condition },
        LinalgError::Residual { residual, tolerance } => CoupledError::Residual { residual, tolerance },
    }
}

/// The coupled resolvent at one energy, ready for any number of evaluations.
#[derive(Debug, Clone)]
pub struct FactorizedSystem {
    z: ComplexEnergy,
    sites: Vec<f64>,
    strengths: Vec<f64>,
    channels: [ChannelPropagator; 2],
    kernels: [KernelAtEnergy; 2],
    // uncoupled kernels between sites, per channel
    tables: [Matrix; 2],
    // m[c] closes channel c's system through the other channel
    m: [Matrix; 2],
    // lu[c] factorizes I − tables[c]·m[c]
    lu: [Lu; 2],
}

impl FactorizedSystem {
    pub fn energy(&self) -> ComplexEnergy {
        self.z
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    /// Site matrix A of channel c (0 or 1).
    pub fn site_matrix(&self, c: usize) -> &Matrix {
        self.lu[c].matrix()
    }

    /// cond₁ of the site matrix of channel c.
    pub fn condition(&self, c: usize) -> f64 {
        self.lu[c].condition()
    }

    /// Uncoupled kernel of channel c between sites i and j.
    pub fn site_green(&self, c: usize, i: usize, j: usize) -> C64 {
        self.tables[c][(i, j)]
    }

    fn bare(&self, c: usize, x: f64, x0: f64) -> Result<C64, CoupledError> {
        Ok(self.kernels[c].green(x, x0)?.value)
    }

    fn bare_to_sites(&self, c: usize, x: f64) -> Result<Vec<C64>, CoupledError> {
        self.sites.iter().map(|&s| self.bare(c, s, x)).collect()
    }

    fn solve(&self, c: usize, q: &[C64]) -> Result<Vec<C64>, CoupledError> {
        self.lu[c].solve(q, RESIDUAL_TOLERANCE).map_err(|e| map_linalg(e, self.z))
    }

    /// G_cc(x, x₀) from the site values of the column through x₀.
    fn diagonal_block(&self, c: usize, x: f64, x0: f64) -> Result<C64, CoupledError> {
        let mut g = self.bare(c, x, x0)?;
        if self.sites.is_empty() {
            return Ok(g);
        }
        let p = self.solve(c, &self.bare_to_sites(c, x0)?)?;
        let mp = self.m[c].mul_vec(&p);
        for (&s, w) in self.sites.iter().zip(&mp) {
            g += self.bare(c, x, s)? * w;
        }
        Ok(g)
    }

    /// Row of G_cc(x, xⱼ) over the sites, from one transposed solve.
    fn diagonal_block_row(&self, c: usize, x: f64) -> Result<Vec<C64>, CoupledError> {
        let g = self.bare_to_sites(c, x)?;
        let mg = self.m[c].transpose_mul_vec(&g);
        let y = self.lu[c].solve_transpose(&mg, RESIDUAL_TOLERANCE).map_err(|e| map_linalg(e, self.z))?;
        let yg = self.tables[c].transpose_mul_vec(&y);
        Ok(g.iter().zip(&yg).map(|(a, b)| a + b).collect())
    }

    /// G_c,c̄(x, x₀) = Σⱼ G_cc(x, xⱼ) kⱼ g_c̄(xⱼ, x₀).
    fn off_block_left(&self, c: usize, x: f64, x0: f64) -> Result<C64, CoupledError> {
        let row = self.diagonal_block_row(c, x)?;
        let other = self.bare_to_sites(1 - c, x0)?;
        Ok(row.iter().zip(&other).zip(&self.strengths).map(|((r, g), k)| r * g * *k).sum())
    }

    /// G_c,c̄(x, x₀) = Σⱼ g_c(x, xⱼ) kⱼ G_c̄c̄(xⱼ, x₀).
    fn off_block_right(&self, c: usize, x: f64, x0: f64) -> Result<C64, CoupledError> {
        let o = 1 - c;
        let mut column = self.bare_to_sites(o, x0)?;
        if !self.sites.is_empty() {
            let p = self.solve(o, &column)?;
            let mp = self.m[o].mul_vec(&p);
            let tm = self.tables[o].mul_vec(&mp);
            column.iter_mut().zip(&tm).for_each(|(a, b)| *a += b);
        }
        let own = self.bare_to_sites(c, x)?;
        Ok(own.iter().zip(&column).zip(&self.strengths).map(|((g, col), k)| g * col * *k).sum())
    }

    pub fn g11(&self, x: f64, x0: f64) -> Result<C64, CoupledError> {
        self.diagonal_block(0, x, x0)
    }

    pub fn g22(&self, x: f64, x0: f64) -> Result<C64, CoupledError> {
        self.diagonal_block(1, x, x0)
    }

    /// G₁₂ = G₁₁ V g₂.
    pub fn g12(&self, x: f64, x0: f64) -> Result<C64, CoupledError> {
        self.off_block_left(0, x, x0)
    }

    /// G₁₂ = g₁ V G₂₂, analytically equal to [`Self::g12`].
    pub fn g12_via_g22(&self, x: f64, x0: f64) -> Result<C64, CoupledError> {
        self.off_block_right(0, x, x0)
    }

    /// G₂₁ = G₂₂ V g₁.
    pub fn g21(&self, x: f64, x0: f64) -> Result<C64, CoupledError> {
        self.off_block_left(1, x, x0)
    }

    /// G₂₁ = g₂ V G₁₁, analytically equal to [`Self::g21`].
    pub fn g21_via_g11(&self, x: f64, x0: f64) -> Result<C64, CoupledError> {
        self.off_block_right(1, x, x0)
    }

    /// Block (a, b) of the 2×2 kernel, with a, b ∈ {0, 1}.
    pub fn kernel(&self, a: usize, b: usize, x: f64, x0: f64) -> Result<C64, CoupledError> {
        match (a, b) {
            (0, 0) => self.g11(x, x0),
            (1, 1) => self.g22(x, x0),
            (0, 1) => self.g12(x, x0),
            (1, 0) => self.g21(x, x0),
            _ => panic!("block index ({a}, {b}) out of range"),
        }
    }

    /// (g_c χ)(x) = Σₙ ψₙ(x) cₙ/(z − εₙ) at every site.
    fn applied_to_sites(&self, c: usize, coefficients: &[f64]) -> Vec<C64> {
        let ch = self.channels[c].channel();
        let z = self.z.value();
        let denominators: Vec<C64> =
            (0..coefficients.len()).map(|n| C64::new(1.0, 0.0) / (z - ch.eigenvalue(n))).collect();
        self.sites
            .iter()
            .map(|&s| {
                if coefficients.is_empty() {
                    return C64::new(0.0, 0.0);
                }
                let psi = eigenfunctions(ch, s, coefficients.len() - 1);
                psi.iter().zip(coefficients).zip(&denominators).map(|((p, cn), d)| d * (p * cn)).sum()
            })
            .collect()
    }

    /// ⟨bra|G₁₁|ket⟩ for states given by overlaps with channel-1 eigenfunctions.
    pub fn matrix_element_g11(&self, bra: &[f64], ket: &[f64]) -> Result<C64, CoupledError> {
        self.matrix_element(0, bra, ket)
    }

    /// ⟨bra|G₂₂|ket⟩ for states given by overlaps with channel-2 eigenfunctions.
    pub fn matrix_element_g22(&self, bra: &[f64], ket: &[f64]) -> Result<C64, CoupledError> {
        self.matrix_element(1, bra, ket)
    }

    fn matrix_element(&self, c: usize, bra: &[f64], ket: &[f64]) -> Result<C64, CoupledError> {
        let mut value = self.channels[c].matrix_element(bra, ket, self.z)?.value;
        if self.sites.is_empty() || self.strengths.iter().all(|&k| k == 0.0) {
            return Ok(value);
        }
        let u = self.solve(c, &self.applied_to_sites(c, ket))?;
        let mu = self.m[c].mul_vec(&u);
        let gb = self.applied_to_sites(c, bra);
        value += gb.iter().zip(&mu).map(|(a, b)| a * b).sum::<C64>();
        Ok(value)
    }
}
