//! Zeros of the average characteristic polynomial and the comparison of
//! their moments with the mean empirical moments.
//!
//! `E[Π(z - x_i)]` is the characteristic polynomial of the N×N section
//! `[⟨xP_i, Q_j⟩]`, so its zeros are that matrix's eigenvalues.

use nalgebra::Schur;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::symmetric_tridiagonal_eigen;
use crate::recurrence::RecurrenceTable;
use crate::scalar::{Complex64, Scalar};

/// Default number of cached power sums.
pub const DEFAULT_POWERS: usize = 6;

const POWER_SUM_TOLERANCE: f64 = 1e-8;
const SINGULARITY_DISTANCE: f64 = 1e-6;

/// Zeros `z_1..z_N` with power sums `p_l = Σ z_i^l` for `l ≤ L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    zeros: Vec<Complex64>,
    power_sums: Vec<Complex64>,
}

impl ZeroSet {
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    /// `p_0..p_L`.
    pub fn power_sums(&self) -> &[Complex64] {
        &self.power_sums
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Potential of the normalized zero counting measure at `z`.
    pub fn log_potential(&self, z: Complex64) -> Result<f64> {
        let w = vec![1.0 / self.len() as f64; self.len()];
        log_potential(&self.zeros, &w, z)
    }
}

/// Zeros of the average characteristic polynomial, with power sums up to
/// [`DEFAULT_POWERS`].
pub fn zeros(t: &RecurrenceTable) -> Result<ZeroSet> {
    zeros_with_powers(t, DEFAULT_POWERS)
}

/// Zeros with power sums up to `max_power`. The power sums are checked
/// against traces of powers of the section computed by path sums.
pub fn zeros_with_powers(t: &RecurrenceTable, max_power: usize) -> Result<ZeroSet> {
    let n = t.n();
    let zeros: Vec<Complex64> = match t.op_coefficients() {
        Some((a, b)) => symmetric_tridiagonal_eigen(&b[..n], &a[..n - 1])?
            .0
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect(),
        None => {
            let h = t.hessenberg_matrix()?;
            let upper = (0..n).all(|i| (0..i).all(|j| h[(i, j)] == 0.0));
            let lower = (0..n).all(|i| (i + 1..n).all(|j| h[(i, j)] == 0.0));
            if upper || lower {
                (0..n).map(|i| Complex64::new(h[(i, i)], 0.0)).collect()
            } else {
                Schur::try_new(h, f64::EPSILON, 10_000)
                    .ok_or(Error::EigenNonConvergence)?
                    .complex_eigenvalues()
                    .iter()
                    .copied()
                    .collect()
            }
        }
    };

    let mut power_sums = Vec::with_capacity(max_power + 1);
    for l in 0..=max_power {
        let p: Complex64 = zeros.iter().map(|z| z.powu(l as u32)).sum();
        let size: f64 = zeros.iter().map(|z| z.norm().powi(l as i32)).sum();
        let trace = t.section_trace_power(l)?;
        let defect = (p - Complex64::new(trace, 0.0)).norm();
        if defect > POWER_SUM_TOLERANCE * size.max(1e-300) && defect > 1e-12 {
            return Err(Error::NumericalBreakdown(format!(
                "power sum p_{l} = {} disagrees with section trace {trace}",
                p.render()
            )));
        }
        power_sums.push(p);
    }
    Ok(ZeroSet { zeros, power_sums })
}

/// One row of the moment comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentGap {
    pub l: usize,
    /// `(1/N) Σ_{k<N} ⟨x^l P_k, Q_k⟩`.
    pub mean_moment: f64,
    /// `(1/N) Σ z_i^l`.
    pub zero_moment: f64,
    pub gap: f64,
    /// `(2l)^l / N · max |⟨xP_k, Q_m⟩|^l` over `|k - N|, |m - N| ≤ l`.
    pub bound: f64,
}

/// Compare the l-th mean empirical moment with the l-th moment of the zero
/// counting measure. The difference comes only from lattice paths leaving
/// the strip `[0, N)`, so the bound is a hard check.
pub fn moment_gap(t: &RecurrenceTable, l: usize) -> Result<MomentGap> {
    let n = t.n();
    let window = t.window_max(l)?;
    let mean_moment = t.mean_moment(l)?;
    let zero_moment = t.section_trace_power(l)? / n as f64;
    let gap = (mean_moment - zero_moment).abs();
    let bound = (2.0 * l as f64).powi(l as i32) / n as f64 * window.powi(l as i32);
    if gap > bound * (1.0 + 1e-12) + 1e-14 {
        return Err(Error::BoundViolated {
            what: "moment gap",
            value: gap,
            bound,
        });
    }
    Ok(MomentGap {
        l,
        mean_moment,
        zero_moment,
        gap,
        bound,
    })
}

/// `∫ log(1/|z - x|) dν` for `ν = Σ w_i δ_{x_i}`.
pub fn log_potential<S: Scalar>(points: &[S], weights: &[f64], z: Complex64) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in points.iter().zip(weights) {
        let d = (z - x.to_complex()).norm();
        if d < SINGULARITY_DISTANCE {
            return Err(Error::Singularity {
                z: z.render(),
                distance: d,
            });
        }
        acc -= w * d.ln();
    }
    Ok(acc)
}
