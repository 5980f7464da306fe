//! Small dense and tridiagonal linear algebra used by quadrature, zeros and
//! the sequential sampler.

use crate::error::{Error, Result};
use crate::scalar::{scale, Scalar};

/// Eigen-decomposition of a real symmetric tridiagonal matrix by the implicit
/// QL algorithm with Wilkinson shifts.
///
/// `diag` has length n, `off` has length n-1 (`off[i]` couples rows i and
/// i+1). Returns the eigenvalues in ascending order together with the first
/// component of each normalized eigenvector (the Golub–Welsch weights are
/// the squares of these).
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if off.len() + 1 != n {
        return Err(Error::Parameter(format!(
            "tridiagonal: {} diagonal entries need {} off-diagonal entries, got {}",
            n,
            n - 1,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // first row of the accumulated eigenvector matrix
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenNonConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    Ok((
        order.iter().map(|&i| d[i]).collect(),
        order.iter().map(|&i| z[i]).collect(),
    ))
}

/// LU factorization `P A = L U` of a small dense matrix that can be grown by
/// bordering (appending one row and one column) in O(k^2).
///
/// Rows are stored in the permuted order; `perm[i]` is the original row
/// index of stored row `i`.
#[derive(Debug, Clone)]
pub struct BorderedLu<S: Scalar> {
    perm: Vec<usize>,
    // unit lower triangular, row-major, lower[i] has i entries (strict part)
    lower: Vec<Vec<S>>,
    // upper triangular, stored by columns: upper[j] has j+1 entries
    upper: Vec<Vec<S>>,
}

impl<S: Scalar> Default for BorderedLu<S> {
    fn default() -> Self {
        Self {
            perm: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }
}

impl<S: Scalar> BorderedLu<S> {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Factor a dense k×k matrix (given by an entry closure) from scratch
    /// with partial pivoting.
    pub fn factor(k: usize, entry: impl Fn(usize, usize) -> S) -> Result<Self> {
        let mut a: Vec<Vec<S>> = (0..k).map(|i| (0..k).map(|j| entry(i, j)).collect()).collect();
        let mut perm: Vec<usize> = (0..k).collect();
        for col in 0..k {
            let piv = (col..k)
                .max_by(|&i, &j| a[i][col].modulus().total_cmp(&a[j][col].modulus()))
                .unwrap_or(col);
            if a[piv][col].modulus() == 0.0 {
                return Err(Error::NumericalBreakdown(format!(
                    "singular prefix matrix at column {col}"
                )));
            }
            a.swap(col, piv);
            perm.swap(col, piv);
            let pivot = a[col][col];
            for i in col + 1..k {
                let factor = a[i][col] / pivot;
                a[i][col] = factor;
                for j in col + 1..k {
                    let v = a[col][j];
                    a[i][j] -= factor * v;
                }
            }
        }
        let lower = (0..k).map(|i| a[i][..i].to_vec()).collect();
        let upper = (0..k).map(|j| (0..=j).map(|i| a[i][j]).collect()).collect();
        Ok(Self { perm, lower, upper })
    }

    /// Append row `row` (length k, entries A[k][0..k]), column `col`
    /// (entries A[0..k][k] in original order) and diagonal `diag`.
    /// Returns the new pivot (the Schur complement of the old block).
    pub fn border(&mut self, row: &[S], col: &[S], diag: S) -> S {
        let k = self.dim();
        // L y = P col
        let mut y: Vec<S> = self.perm.iter().map(|&p| col[p]).collect();
        for i in 0..k {
            let mut acc = y[i];
            for (j, l) in self.lower[i].iter().enumerate() {
                acc -= *l * y[j];
            }
            y[i] = acc;
        }
        // x U = row
        let mut x = row.to_vec();
        for j in 0..k {
            let mut acc = x[j];
            for i in 0..j {
                acc -= x[i] * self.upper[j][i];
            }
            x[j] = acc / self.upper[j][j];
        }
        let mut pivot = diag;
        for i in 0..k {
            pivot -= x[i] * y[i];
        }
        self.perm.push(k);
        self.lower.push(x);
        y.push(pivot);
        self.upper.push(y);
        pivot
    }

    /// Solve `A v = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let k = self.dim();
        let mut v: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..k {
            let mut acc = v[i];
            for (j, l) in self.lower[i].iter().enumerate() {
                acc -= *l * v[j];
            }
            v[i] = acc;
        }
        for i in (0..k).rev() {
            let mut acc = v[i];
            for j in i + 1..k {
                acc -= self.upper[j][i] * v[j];
            }
            v[i] = acc / self.upper[i][i];
        }
        v
    }

    /// Product of the U diagonal (the determinant up to the permutation sign).
    pub fn pivots(&self) -> impl Iterator<Item = S> + '_ {
        self.upper.iter().enumerate().map(|(j, c)| c[j])
    }

    pub fn determinant(&self) -> S {
        let mut det = S::one();
        for p in self.pivots() {
            det *= p;
        }
        if permutation_is_odd(&self.perm) {
            -det
        } else {
            det
        }
    }
}

fn permutation_is_odd(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut odd = false;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

/// Determinant of a small dense matrix given row-major.
pub fn determinant<S: Scalar>(k: usize, entry: impl Fn(usize, usize) -> S) -> S {
    if k == 0 {
        return S::one();
    }
    match BorderedLu::factor(k, entry) {
        Ok(lu) => lu.determinant(),
        Err(_) => S::zero(),
    }
}

/// `(det/|det|, ln|det|)` of a small dense matrix; `(0, -inf)` if singular.
pub fn log_determinant<S: Scalar>(k: usize, entry: impl Fn(usize, usize) -> S) -> (S, f64) {
    if k == 0 {
        return (S::one(), 0.0);
    }
    let Ok(lu) = BorderedLu::factor(k, entry) else {
        return (S::zero(), f64::NEG_INFINITY);
    };
    let mut phase = if permutation_is_odd(&lu.perm) { -S::one() } else { S::one() };
    let mut log = 0.0;
    for p in lu.pivots() {
        let m = p.modulus();
        if m == 0.0 {
            return (S::zero(), f64::NEG_INFINITY);
        }
        log += m.ln();
        phase *= scale(p, 1.0 / m);
    }
    (phase, log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_two_by_two() {
        let (vals, first) = symmetric_tridiagonal_eigen(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        assert!((first[0].powi(2) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_matches_chebyshev_nodes() {
        // Jacobi matrix of Chebyshev polynomials of the first kind
        let n = 12;
        let mut off = vec![0.5; n - 1];
        off[0] = 0.5f64.sqrt();
        let (vals, first) = symmetric_tridiagonal_eigen(&vec![0.0; n], &off).unwrap();
        for (j, v) in vals.iter().enumerate() {
            let expected = -((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            assert!((v - expected).abs() < 1e-13, "{v} vs {expected}");
        }
        for w in first {
            assert!((w * w - 1.0 / n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn bordered_lu_matches_full_factor() {
        let a = [[4.0, 1.0, 2.0], [0.5, 3.0, -1.0], [2.0, -1.0, 5.0]];
        let full = BorderedLu::factor(3, |i, j| a[i][j]).unwrap();
        let mut inc = BorderedLu::<f64>::default();
        inc.border(&[], &[], a[0][0]);
        inc.border(&[a[1][0]], &[a[0][1]], a[1][1]);
        inc.border(&[a[2][0], a[2][1]], &[a[0][2], a[1][2]], a[2][2]);
        assert!((full.determinant() - inc.determinant()).abs() < 1e-12);
        let b = [1.0, 2.0, 3.0];
        let x = inc.solve(&b);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert!((r - b[i]).abs() < 1e-12);
        }
        // grow a pivoted factorization by bordering
        let mut piv = BorderedLu::factor(2, |i, j| a[i][j]).unwrap();
        piv.border(&[a[2][0], a[2][1]], &[a[0][2], a[1][2]], a[2][2]);
        assert!((piv.determinant() - full.determinant()).abs() < 1e-12);
    }

    #[test]
    fn determinant_with_row_swap() {
        let a = [[0.0, 1.0], [1.0, 0.0]];
        assert_eq!(determinant(2, |i, j| a[i][j]), -1.0);
    }
}
