//! Fixed Gaussian quadrature rules.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::Result;
use crate::linalg::symmetric_tridiagonal_eigen;

/// Chebyshev–Gauss nodes `cos((2j+1)π/(2n))`, j = 0..n, in ascending order.
/// With equal weights 1/n they integrate polynomials of degree ≤ 2n-1
/// exactly against the arcsine law on [-1, 1].
pub fn chebyshev_gauss_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .rev()
        .map(|j| ((2 * j + 1) as f64 * PI / (2 * n) as f64).cos())
        .collect()
}

/// Gauss–Hermite rule for the weight `exp(-t^2)` on the real line.
///
/// Nodes come from the Jacobi matrix eigenvalues; weights are evaluated as
/// the reciprocal Christoffel function `1 / Σ p_k(t)^2`, carried in log
/// space so that tail weights keep full relative accuracy. Returns
/// `(nodes, log_weights)`.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let (nodes, _) = symmetric_tridiagonal_eigen(&vec![0.0; n], &off)?;
    let log_weights = nodes.iter().map(|&t| -log_christoffel_sum(t, n)).collect();
    Ok((nodes, log_weights))
}

/// `log Σ_{k<n} p_k(t)^2` for the orthonormal Hermite polynomials of `exp(-t^2)`.
fn log_christoffel_sum(t: f64, n: usize) -> f64 {
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut sum = cur * cur;
    for k in 0..n - 1 {
        let next = (t * cur - (k as f64 / 2.0).sqrt() * prev) / ((k + 1) as f64 / 2.0).sqrt();
        prev = cur;
        cur = next;
        sum += cur * cur;
        if cur.abs() > 1e100 {
            let s = 1e-100;
            prev *= s;
            cur *= s;
            sum *= s * s;
            log_scale += -2.0 * s.ln();
        }
    }
    sum.ln() + log_scale
}

/// Gauss–Legendre rule on [0, 1] with `n` nodes (Golub–Welsch).
pub fn gauss_legendre_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (nodes, first) = symmetric_tridiagonal_eigen(&vec![0.0; n], &off)?;
    let x = nodes.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let w = first.iter().map(|v| v * v).collect();
    Ok((x, w))
}

/// Shared 256-node Gauss–Legendre rule on [0, 1].
pub fn legendre_256() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_unit(256).expect("Legendre Jacobi matrix converges"))
}
