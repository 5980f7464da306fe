//! Variances of linear statistics: exact escaping-path sums, bounds, the
//! large-N limit through the bivariate measure Q, and cumulant estimates.
//!
//! For a projection DPP, `Cov[Σx_i^l, Σx_i^m] = Σ_{k<N} Σ_{j≥N} ⟨x^l P_k, Q_j⟩⟨x^m P_j, Q_k⟩`:
//! only lattice paths that sit at or above ordinate N at time `l` contribute.

use serde::Serialize;

use crate::ensemble::poly_values;
use crate::error::{Error, Result};
use crate::measure::ReferenceMeasure;
use crate::quadrature::chebyshev_gauss_nodes;
use crate::recurrence::RecurrenceTable;

/// Minimum replica count accepted by [`cumulants`].
pub const MIN_REPLICAS: usize = 100;

const DIAGONAL_GAP: f64 = 1e-8;
const FINITE_DIFFERENCE_STEP: f64 = 1e-5;

/// `Var[Σ x_i^l]`, exact.
pub fn variance_power(t: &RecurrenceTable, l: usize) -> Result<f64> {
    let v = escaping_sum(t, l, l)?;
    let cross = trace_route(t, l)?;
    if (v - cross).abs() > 1e-9 * v.abs().max(1.0) {
        return Err(Error::NumericalBreakdown(format!(
            "escaping-path variance {v} disagrees with section-trace variance {cross}"
        )));
    }
    if v < -1e-12 {
        return Err(Error::BoundViolated {
            what: "variance sign",
            value: -v,
            bound: 0.0,
        });
    }
    let bound = variance_upper_bound(t, l)?;
    if v > bound * (1.0 + 1e-12) + 1e-14 {
        return Err(Error::BoundViolated {
            what: "variance upper bound",
            value: v,
            bound,
        });
    }
    Ok(v.max(0.0))
}

/// `Cov[Σ x_i^l, Σ x_i^m]`, exact.
pub fn covariance_power(t: &RecurrenceTable, l: usize, m: usize) -> Result<f64> {
    escaping_sum(t, l, m)
}

/// `Var[Σ p(x_i)]` for `p(x) = Σ_l coeffs[l] x^l`, by bilinearity.
pub fn polynomial_variance(t: &RecurrenceTable, coeffs: &[f64]) -> Result<f64> {
    let mut v = 0.0;
    let mut size = 0.0;
    for (l, cl) in coeffs.iter().enumerate().skip(1) {
        for (m, cm) in coeffs.iter().enumerate().skip(1) {
            if *cl != 0.0 && *cm != 0.0 {
                let c = cl * cm * covariance_power(t, l, m)?;
                v += c;
                size += c.abs();
            }
        }
    }
    if v < -1e-12 * size.max(1.0) {
        return Err(Error::BoundViolated {
            what: "polynomial variance sign",
            value: -v,
            bound: 0.0,
        });
    }
    Ok(v.max(0.0))
}

// Σ_{k<N} Σ_{j≥N} ⟨x^l P_k, Q_j⟩⟨x^m P_j, Q_k⟩
fn escaping_sum(t: &RecurrenceTable, l: usize, m: usize) -> Result<f64> {
    let n = t.n();
    let q = t.bandwidth();
    let mut acc = 0.0;
    // paths climb at most one step at a time
    for k in n.saturating_sub(l)..n {
        for j in n..=k + l {
            if j > k + q * m {
                continue;
            }
            let up = t.path_sum_moment(l, k, j)?;
            if up == 0.0 {
                continue;
            }
            acc += up * t.path_sum_moment(m, j, k)?;
        }
    }
    Ok(acc)
}

// Tr(J^{2l}) over starts < N minus Σ_{k,m<N} (J^l)_{km} (J^l)_{mk}
fn trace_route(t: &RecurrenceTable, l: usize) -> Result<f64> {
    let n = t.n();
    let rows: Vec<(usize, Vec<f64>)> = (0..n).map(|k| t.power_row(l, k)).collect::<Result<_>>()?;
    let get = |k: usize, m: usize| {
        let (lo, v) = &rows[k];
        if m >= *lo && m - lo < v.len() {
            v[m - lo]
        } else {
            0.0
        }
    };
    let mut inside = 0.0;
    for k in 0..n {
        let (lo, v) = &rows[k];
        for (off, c) in v.iter().enumerate() {
            let m = lo + off;
            if m < n {
                inside += c * get(m, k);
            }
        }
    }
    let mut total = 0.0;
    for k in 0..n {
        total += t.path_sum_moment(2 * l, k, k)?;
    }
    Ok(total - inside)
}

/// `(2l)^{2l} · max |⟨xP_k, Q_m⟩|^{2l}` over `|k - N|, |m - N| ≤ l`.
pub fn variance_upper_bound(t: &RecurrenceTable, l: usize) -> Result<f64> {
    let w = t.window_max(l)?;
    let e = (2 * l) as i32;
    Ok((2.0 * l as f64).powi(e) * w.powi(e))
}

/// `(a_top · lip)²`: bound on `Var[Σ f(x_i)]` for a `lip`-Lipschitz `f` on a
/// real OP ensemble whose top coefficient is `a_top = a_{N-1}`.
pub fn lipschitz_variance_bound(a_top: f64, lip: f64) -> f64 {
    (a_top * lip).powi(2)
}

/// The limit `Q(dx, dy) = (1 - ξη) ω(dξ) ω(dη)` on `[b - 2a, b + 2a]²`,
/// written in normalized coordinates `ξ = (x - b)/(2a)` with `ω` the arcsine
/// law of [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BivariateLimit {
    pub a: f64,
    pub b: f64,
}

impl BivariateLimit {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Parameter(format!("limit needs a > 0 and finite b, got a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }

    fn nodes(&self, order: usize) -> Vec<(f64, f64)> {
        chebyshev_gauss_nodes(order)
            .into_iter()
            .map(|xi| (xi, self.b + 2.0 * self.a * xi))
            .collect()
    }

    /// Total mass under an `order`-point tensor rule (1 for any order ≥ 2).
    pub fn mass(&self, order: usize) -> f64 {
        self.moment_with_order(0, 0, order)
    }

    /// `∫∫ x^m y^n dQ`.
    pub fn moment(&self, m: usize, n: usize) -> f64 {
        self.moment_with_order(m, n, (4 * (m + n)).max(64))
    }

    fn moment_with_order(&self, m: usize, n: usize, order: usize) -> f64 {
        let nodes = self.nodes(order);
        let w = 1.0 / order as f64;
        let mut acc = 0.0;
        for (xi, x) in &nodes {
            for (eta, y) in &nodes {
                acc += x.powi(m as i32) * y.powi(n as i32) * (1.0 - xi * eta);
            }
        }
        acc * w * w
    }

    /// `a² ∫∫ ((f(x) - f(y))/(x - y))² dQ` with central differences on the diagonal.
    pub fn variance(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = FINITE_DIFFERENCE_STEP;
        self.variance_with_derivative(&f, |x| (f(x + h) - f(x - h)) / (2.0 * h))
    }

    /// As [`Self::variance`], using the supplied derivative on the diagonal.
    pub fn variance_with_derivative(&self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> f64 {
        let order = 512;
        let nodes = self.nodes(order);
        let fx: Vec<f64> = nodes.iter().map(|(_, x)| f(*x)).collect();
        let w = 1.0 / order as f64;
        let mut acc = 0.0;
        for (i, (xi, x)) in nodes.iter().enumerate() {
            for (j, (eta, y)) in nodes.iter().enumerate() {
                let dd = if (x - y).abs() < DIAGONAL_GAP {
                    df(*x)
                } else {
                    (fx[i] - fx[j]) / (x - y)
                };
                acc += dd * dd * (1.0 - xi * eta);
            }
        }
        self.a * self.a * acc * w * w
    }
}

/// `∫∫ x^m y^n dQ` for the limit with parameters `(a, b)`.
pub fn limiting_q_moment(limit: &BivariateLimit, m: usize, n: usize) -> f64 {
    limit.moment(m, n)
}

/// Limiting variance of `Σ f(x_i)` for ensembles whose coefficients converge
/// to `(a, b)` near index N.
pub fn limiting_variance(f: impl Fn(f64) -> f64, limit: &BivariateLimit) -> f64 {
    limit.variance(f)
}

/// `∫∫ x^m y^n dQ_N` with
/// `Q_N = (1/2)(P_N(x)P_{N-1}(y) - P_{N-1}(x)P_N(y))² μ(dx)μ(dy)`.
pub fn empirical_q_moment(t: &RecurrenceTable, measure: &ReferenceMeasure<f64>, m: usize, n: usize) -> Result<f64> {
    if !t.is_op() {
        return Err(Error::Unsupported("Q_N moments need an OP-form table".into()));
    }
    let size = t.n();
    let mass = measure.total_mass();
    let (mut aa, mut bb, mut ab) = ([0.0; 2], [0.0; 2], [0.0; 2]);
    for (x, w) in measure.points().iter().zip(measure.weights()) {
        let p = poly_values(t, mass, *x, size + 1)?;
        let (top, below) = (p[size], p[size - 1]);
        for (slot, power) in [m, n].into_iter().enumerate() {
            let c = w * x.powi(power as i32);
            aa[slot] += c * top * top;
            bb[slot] += c * below * below;
            ab[slot] += c * top * below;
        }
    }
    Ok(0.5 * (aa[0] * bb[1] - 2.0 * ab[0] * ab[1] + bb[0] * aa[1]))
}

/// Unbiased k-statistics `κ̂_1..κ̂_4` with jackknife standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulantEstimates {
    pub count: usize,
    pub kappa: [f64; 4],
    pub se: [f64; 4],
}

impl CumulantEstimates {
    pub fn skewness(&self) -> f64 {
        if self.kappa[1] > 0.0 {
            self.kappa[2] / self.kappa[1].powf(1.5)
        } else {
            0.0
        }
    }

    pub fn excess_kurtosis(&self) -> f64 {
        if self.kappa[1] > 0.0 {
            self.kappa[3] / (self.kappa[1] * self.kappa[1])
        } else {
            0.0
        }
    }
}

fn k_statistics(n: f64, s: [f64; 4]) -> [f64; 3] {
    let [s1, s2, s3, s4] = s;
    let k2 = (n * s2 - s1 * s1) / (n * (n - 1.0));
    let k3 = (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0));
    let k4 = (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2 - 3.0 * n * (n - 1.0) * s2 * s2
        - 4.0 * n * (n + 1.0) * s1 * s3
        + n * n * (n + 1.0) * s4)
        / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
    [k2, k3, k4]
}

/// k-statistics of the replica values with leave-one-out jackknife errors.
pub fn cumulants(data: &[f64]) -> Result<CumulantEstimates> {
    let count = data.len();
    if count < MIN_REPLICAS {
        return Err(Error::TooFewReplicas {
            needed: MIN_REPLICAS,
            got: count,
        });
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parameter("non-finite replica statistic".into()));
    }
    let n = count as f64;
    let mean = data.iter().sum::<f64>() / n;
    let d: Vec<f64> = data.iter().map(|x| x - mean).collect();
    let mut s = [0.0; 4];
    for v in &d {
        let v2 = v * v;
        s[0] += v;
        s[1] += v2;
        s[2] += v2 * v;
        s[3] += v2 * v2;
    }
    let [k2, k3, k4] = k_statistics(n, s);
    let kappa = [mean + s[0] / n, k2.max(0.0), k3, k4];

    let mut loo = vec![[0.0; 4]; count];
    for (i, v) in d.iter().enumerate() {
        let v2 = v * v;
        let si = [s[0] - v, s[1] - v2, s[2] - v2 * v, s[3] - v2 * v2];
        let [a, b, c] = k_statistics(n - 1.0, si);
        loo[i] = [mean + si[0] / (n - 1.0), a, b, c];
    }
    let mut se = [0.0; 4];
    for (r, slot) in se.iter_mut().enumerate() {
        let avg = loo.iter().map(|x| x[r]).sum::<f64>() / n;
        let ss: f64 = loo.iter().map(|x| (x[r] - avg).powi(2)).sum();
        *slot = ((n - 1.0) / n * ss).sqrt();
    }
    Ok(CumulantEstimates { count, kappa, se })
}

/// Unbiased sample covariance with its jackknife standard error.
pub fn sample_covariance(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::Parameter("covariance needs paired samples".into()));
    }
    let count = x.len();
    if count < MIN_REPLICAS {
        return Err(Error::TooFewReplicas {
            needed: MIN_REPLICAS,
            got: count,
        });
    }
    let n = count as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let dx: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let dy: Vec<f64> = y.iter().map(|v| v - my).collect();
    let (sx, sy) = (dx.iter().sum::<f64>(), dy.iter().sum::<f64>());
    let sxy: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
    let cov = |n: f64, sx: f64, sy: f64, sxy: f64| (sxy - sx * sy / n) / (n - 1.0);
    let full = cov(n, sx, sy, sxy);
    let loo: Vec<f64> = dx
        .iter()
        .zip(&dy)
        .map(|(a, b)| cov(n - 1.0, sx - a, sy - b, sxy - a * b))
        .collect();
    let avg = loo.iter().sum::<f64>() / n;
    let se = ((n - 1.0) / n * loo.iter().map(|v| (v - avg).powi(2)).sum::<f64>()).sqrt();
    Ok((full, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_power_is_top_coefficient_squared() {
        let t = RecurrenceTable::op(3, vec![0.7, 1.3, 0.4, 0.9], vec![0.2, -0.5, 0.3, 0.8, 0.1]).unwrap();
        assert!((variance_power(&t, 1).unwrap() - 0.16).abs() < 1e-15);
    }

    #[test]
    fn gue_exact_values() {
        for n in [1, 5, 50, 200] {
            let t = RecurrenceTable::gue(n, 4).unwrap();
            assert!((variance_power(&t, 1).unwrap() - 1.0).abs() < 1e-12);
            assert!((variance_power(&t, 2).unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bounds_examples() {
        let t = RecurrenceTable::chebyshev(10, 3).unwrap();
        assert!((variance_power(&t, 1).unwrap() - 0.25).abs() < 1e-15);
        assert!((variance_upper_bound(&t, 1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lipschitz_variance_bound(1.0, 1.0), 1.0);
        assert_eq!(lipschitz_variance_bound(0.7, 0.0), 0.0);
    }

    #[test]
    fn covariance_symmetry_and_diagonal() {
        let t = RecurrenceTable::op(4, vec![0.9, 1.1, 0.7, 1.3, 0.8, 1.0], vec![0.1, -0.4, 0.2, 0.5, 0.3, 0.0, 0.2]).unwrap();
        for (l, m) in [(1, 2), (1, 3), (2, 3)] {
            let a = covariance_power(&t, l, m).unwrap();
            let b = covariance_power(&t, m, l).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(covariance_power(&t, 2, 2).unwrap(), variance_power(&t, 2).unwrap());
        let v = polynomial_variance(&t, &[3.0, 1.0, -0.5]).unwrap();
        let manual = variance_power(&t, 1).unwrap() - covariance_power(&t, 1, 2).unwrap()
            + 0.25 * variance_power(&t, 2).unwrap();
        assert!((v - manual).abs() < 1e-12);
    }

    #[test]
    fn limit_moments() {
        let q = BivariateLimit::new(0.5, 0.0).unwrap();
        assert!((q.moment(0, 0) - 1.0).abs() < 1e-14);
        assert!((q.moment(1, 1) + 0.25).abs() < 1e-14);
        assert!(q.moment(1, 0).abs() < 1e-14);
        assert!((q.moment(2, 3) - q.moment(3, 2)).abs() < 1e-14);
        assert!((q.mass(8) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn limit_variance_examples() {
        let q = BivariateLimit::new(1.0, 0.0).unwrap();
        assert!((limiting_variance(|x| x, &q) - 1.0).abs() < 1e-9);
        assert!((limiting_variance(|x| x * x, &q) - 2.0).abs() < 1e-6);
        assert_eq!(limiting_variance(|_| 3.0, &q), 0.0);
        assert!((q.variance_with_derivative(|x| x * x, |x| 2.0 * x) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn empirical_q_for_chebyshev() {
        let m = ReferenceMeasure::equilibrium_measure(-1.0, 1.0, 512).unwrap();
        let t = RecurrenceTable::chebyshev(40, 2).unwrap();
        assert!((empirical_q_moment(&t, &m, 0, 0).unwrap() - 1.0).abs() < 1e-10);
        assert!((empirical_q_moment(&t, &m, 1, 1).unwrap() + 0.25).abs() < 1e-10);
        let banded = RecurrenceTable::unit_circle(3, 1).unwrap();
        assert!(matches!(empirical_q_moment(&banded, &m, 0, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn cumulants_of_constant_and_small_samples() {
        let c = cumulants(&vec![2.5; 200]).unwrap();
        assert_eq!(c.kappa, [2.5, 0.0, 0.0, 0.0]);
        assert!(matches!(cumulants(&[1.0; 50]), Err(Error::TooFewReplicas { .. })));
    }

    #[test]
    fn k_statistics_match_direct_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data: Vec<f64> = (0..500).map(|_| rand::Rng::gen::<f64>(&mut rng).powi(3)).collect();
        let c = cumulants(&data).unwrap();
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((c.kappa[1] - var).abs() < 1e-14);
        let (cov, se) = sample_covariance(&data, &data).unwrap();
        assert!((cov - var).abs() < 1e-14);
        assert!((se - c.se[1]).abs() < 1e-12);
    }
}
