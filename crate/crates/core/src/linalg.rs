//! Small dense complex LU with partial pivoting.

use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular (condition number {condition:e})")]
    Singular { condition: f64 },
    #[error("solve residual {residual:e} above tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(&self.data[i * self.n..(i + 1) * self.n]) {
                *o += a * xi;
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// PA = LU, with the original matrix kept for residual checks.
#[derive(Debug, Clone)]
pub struct Lu {
    a: Matrix,
    lu: Matrix,
    perm: Vec<usize>,
    condition: f64,
}

impl Lu {
    /// Factorizes `a`, rejecting it when cond₁(A) exceeds `max_condition`.
    pub fn new(a: Matrix, max_condition: f64) -> Result<Self, LinalgError> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
                .expect("nonempty range");
            if lu[(p, k)].norm() == 0.0 {
                return Err(LinalgError::Singular { condition: f64::INFINITY });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != C64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        let mut out = Self { a, lu, perm, condition: 0.0 };
        // exact cond₁ from the explicit inverse; N is small
        let mut inv_norm = 0.0f64;
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            let col = out.raw_solve(&e);
            inv_norm = inv_norm.max(col.iter().map(|x| x.norm()).sum());
        }
        out.condition = out.a.norm1() * inv_norm;
        if !(out.condition <= max_condition) {
            return Err(LinalgError::Singular { condition: out.condition });
        }
        Ok(out)
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    fn raw_solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.a.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    fn raw_solve_transpose(&self, b: &[C64]) -> Vec<C64> {
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ w = b, Lᵀ v = w, x = Pᵀ v
        let n = self.a.n;
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * w[j];
            }
            w[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)] * w[j];
            }
            w[i] = s;
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = w[k];
        }
        x
    }

    fn refine(
        &self,
        b: &[C64],
        apply: impl Fn(&Matrix, &[C64]) -> Vec<C64>,
        solve: impl Fn(&Self, &[C64]) -> Vec<C64>,
        tolerance: f64,
    ) -> Result<Vec<C64>, LinalgError> {
        let mut x = solve(self, b);
        let residual = |x: &[C64]| -> (Vec<C64>, f64) {
            let r: Vec<C64> = apply(&self.a, x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
            let scale = inf_norm(b);
            let rel = if scale == 0.0 { inf_norm(&r) } else { inf_norm(&r) / scale };
            (r, rel)
        };
        let (r, _) = residual(&x);
        let dx = solve(self, &r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        let (_, rel) = residual(&x);
        if !(rel <= tolerance) {
            return Err(LinalgError::Residual { residual: rel, tolerance });
        }
        Ok(x)
    }

    /// Solves A x = b with one step of iterative refinement and checks
    /// ‖Ax − b‖∞/‖b‖∞ against `tolerance`.
    pub fn solve(&self, b: &[C64], tolerance: f64) -> Result<Vec<C64>, LinalgError> {
        self.refine(b, Matrix::mul_vec, Self::raw_solve, tolerance)
    }

    /// Solves Aᵀ x = b likewise.
    pub fn solve_transpose(&self, b: &[C64], tolerance: f64) -> Result<Vec<C64>, LinalgError> {
        self.refine(b, Matrix::transpose_mul_vec, Self::raw_solve_transpose, tolerance)
    }
}
