//! Overlaps between levels of two equal-frequency oscillators displaced from
//! each other, from the displacement-operator algebra alone.

/// ⟨n|D(α)|m⟩ for real α, n ≤ n_max, m ≤ m_max, indexed `[n][m]`.
///
/// Built from the coherent state D(α)|0⟩ = e^{−α²/2} Σ αⁿ/√n! |n⟩ and
/// D·a† = (a† − α)·D, which gives √m·D_{n,m} = √n·D_{n−1,m−1} − α·D_{n,m−1}.
pub fn displaced_overlaps(alpha: f64, n_max: usize, m_max: usize) -> Vec<Vec<f64>> {
    let rows = n_max + 1;
    let mut d = vec![vec![0.0; m_max + 1]; rows];
    d[0][0] = (-0.5 * alpha * alpha).exp();
    for n in 1..rows {
        d[n][0] = alpha * d[n - 1][0] / (n as f64).sqrt();
    }
    for m in 1..=m_max {
        for n in 0..rows {
            let up = if n > 0 { (n as f64).sqrt() * d[n - 1][m - 1] } else { 0.0 };
            d[n][m] = (up - alpha * d[n][m - 1]) / (m as f64).sqrt();
        }
    }
    d
}

/// ⟨n_bra|m_ket⟩ for equal-frequency oscillators whose minima are x_bra and x_ket.
pub fn displaced_level_overlap(mass: f64, omega: f64, x_bra: f64, x_ket: f64, n: usize, m: usize) -> f64 {
    let alpha = (x_ket - x_bra) * (0.5 * mass * omega).sqrt();
    displaced_overlaps(alpha, n, m)[n][m]
}

/// ⟨n|0_displaced⟩ = e^{−S/2}(σ√S)ⁿ/√n! with S = mωd²/2.
///
/// `d` is the bra minimum minus the ket minimum and σ = −sign(d): a ground
/// state sitting to the right of the bra oscillator has positive overlaps.
pub fn fc_overlap_analytic(mass: f64, omega: f64, d: f64, n: usize) -> f64 {
    let s = 0.5 * mass * omega * d * d;
    let sigma: f64 = if d > 0.0 { -1.0 } else { 1.0 };
    if s == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let log_mag = -0.5 * s + 0.5 * n as f64 * s.ln() - 0.5 * ln_factorial(n);
    sigma.powi(n as i32) * log_mag.exp()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_displacement_is_the_identity() {
        let d = displaced_overlaps(0.0, 5, 5);
        for (n, row) in d.iter().enumerate() {
            for (m, v) in row.iter().enumerate() {
                assert_eq!(*v, if n == m { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(fc_overlap_analytic(1.0, 1.0, 0.0, 0), 1.0);
        assert_eq!(fc_overlap_analytic(1.0, 1.0, 0.0, 3), 0.0);
    }

    #[test]
    fn poisson_weights_sum_to_one() {
        let total: f64 = (0..200).map(|n| fc_overlap_analytic(2.0, 3.0, 1.1, n).powi(2)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ground_column_matches_closed_form() {
        let (mass, omega, d) = (1.5, 0.8, 0.9);
        for n in 0..30 {
            let a = displaced_level_overlap(mass, omega, d, 0.0, n, 0);
            let b = fc_overlap_analytic(mass, omega, d, n);
            assert!((a - b).abs() < 1e-14, "{n}: {a} vs {b}");
        }
    }

    #[test]
    fn matrix_is_orthogonal() {
        let d = displaced_overlaps(1.3, 80, 3);
        for m in 0..=3 {
            for k in 0..=3 {
                let dot: f64 = d.iter().map(|row| row[m] * row[k]).sum();
                let expected = if m == k { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12, "{m} {k}: {dot}");
            }
        }
    }
}
