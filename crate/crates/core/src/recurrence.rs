//! Recurrence coefficients `⟨xP_k, Q_m⟩` and the weighted-path engine.
//!
//! Index convention: `a_k = ⟨xP_k, P_{k+1}⟩` and `b_k = ⟨xP_k, P_k⟩`, so that
//! `xP_k = a_k P_{k+1} + b_k P_k + a_{k-1} P_{k-1}`. In path language the
//! up-edge leaving ordinate `m` carries `a_m` and the down-edge leaving `m`
//! carries `a_{m-1}`.
//!
//! All moment computations propagate coefficient vectors through the banded
//! recurrence rather than listing paths. Only coefficients that a
//! contributing path can touch are ever read, so results are bit-for-bit
//! insensitive to entries outside the relevant window, and a missing entry
//! inside the window is an error instead of an extrapolation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::ReferenceMeasure;

/// Storage form of a recurrence table.
#[derive(Debug, Clone, PartialEq)]
pub enum TableForm {
    /// Real orthonormal polynomials: three-term coefficients.
    Op { a: Vec<f64>, b: Vec<f64> },
    /// General biorthogonal family with lower bandwidth `q`:
    /// `rows[k][j + 1] = ⟨xP_k, Q_{k-j}⟩` for `-1 ≤ j ≤ q`.
    Banded { q: usize, rows: Vec<Vec<f64>> },
}

/// Recurrence coefficients of an `n`-particle polynomial ensemble, padded
/// beyond index `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    n: usize,
    form: TableForm,
}

impl RecurrenceTable {
    /// OP-form table. `b` holds `b_0..b_M`; `a` must hold at least `a_0..a_{M-1}`.
    pub fn op(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("ensemble size N must be ≥ 1".into()));
        }
        if b.is_empty() || a.len() + 1 < b.len() {
            return Err(Error::Parameter(format!(
                "OP table with {} diagonal entries needs at least {} off-diagonal entries, got {}",
                b.len(),
                b.len().saturating_sub(1),
                a.len()
            )));
        }
        if let Some(k) = a.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::DegenerateRecurrence { k });
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("non-finite diagonal coefficient".into()));
        }
        let t = Self {
            n,
            form: TableForm::Op { a, b },
        };
        t.require_index(n - 1, "table")?;
        Ok(t)
    }

    /// General banded table; `rows[k]` has `q + 2` entries indexed by `j + 1`.
    pub fn banded(n: usize, q: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("ensemble size N must be ≥ 1".into()));
        }
        for (k, row) in rows.iter().enumerate() {
            if row.len() != q + 2 {
                return Err(Error::Parameter(format!(
                    "banded row {k} has {} entries, expected {}",
                    row.len(),
                    q + 2
                )));
            }
            if row[0] == 0.0 || !row[0].is_finite() {
                return Err(Error::DegenerateRecurrence { k });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Parameter(format!("non-finite entry in banded row {k}")));
            }
        }
        let t = Self {
            n,
            form: TableForm::Banded { q, rows },
        };
        t.require_index(n - 1, "table")?;
        Ok(t)
    }

    /// Classical tables by name: `gue` or `chebyshev`.
    pub fn classical(name: &str, n: usize, pad: usize) -> Result<Self> {
        match name {
            "gue" => Self::gue(n, pad),
            "chebyshev" => Self::chebyshev(n, pad),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }

    /// GUE with reference measure `exp(-N x^2/2) dx`: `a_k = sqrt((k+1)/N)`, `b_k = 0`.
    pub fn gue(n: usize, pad: usize) -> Result<Self> {
        let len = n + pad + 1;
        let a = (0..len).map(|k| ((k + 1) as f64 / n as f64).sqrt()).collect();
        Self::op(n, a, vec![0.0; len])
    }

    /// Chebyshev polynomials orthonormal for the arcsine law on [-1, 1].
    pub fn chebyshev(n: usize, pad: usize) -> Result<Self> {
        let len = n + pad + 1;
        let a = (0..len)
            .map(|k| if k == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 0.5 })
            .collect();
        Self::op(n, a, vec![0.0; len])
    }

    /// Monomials `z^k` on the unit circle: `⟨zP_k, Q_m⟩ = δ_{m,k+1}`.
    pub fn unit_circle(n: usize, pad: usize) -> Result<Self> {
        Self::banded(n, 0, vec![vec![1.0, 0.0]; n + pad + 1])
    }

    /// Three-term coefficients of the orthonormal polynomials of `m`, by
    /// Lanczos iteration with full reorthogonalization.
    pub fn from_measure(m: &ReferenceMeasure<f64>, n: usize, pad: usize) -> Result<Self> {
        let count = n + pad + 1;
        if m.len() < count {
            return Err(Error::Rank {
                atoms: m.len(),
                requested: count,
            });
        }
        let x = m.points();
        let mass = m.total_mass();
        // q_k[i] = P_k(x_i) sqrt(w_i)
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
        basis.push(m.weights().iter().map(|w| (w / mass).sqrt()).collect());
        let mut a = Vec::with_capacity(count);
        let mut b = Vec::with_capacity(count);
        let scale = x.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for k in 0..count {
            let qk = &basis[k];
            let mut v: Vec<f64> = qk.iter().zip(x).map(|(q, x)| q * x).collect();
            b.push(dot(&v, qk));
            if k + 1 == count {
                break;
            }
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&v, q);
                    axpy(-c, q, &mut v);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if !(norm > 1e-12 * scale) {
                return Err(Error::Rank {
                    atoms: m.len(),
                    requested: count,
                });
            }
            a.push(norm);
            v.iter_mut().for_each(|c| *c /= norm);
            basis.push(v);
        }

        let tolerance = 1e-9;
        for i in 0..count {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                let defect = (dot(&basis[i], &basis[j]) - target).abs();
                if defect > tolerance {
                    return Err(Error::Orthogonality { defect, tolerance });
                }
            }
        }
        for k in 0..count - 1 {
            let mut r: Vec<f64> = basis[k].iter().zip(x).map(|(q, x)| q * x).collect();
            axpy(-a[k], &basis[k + 1], &mut r);
            axpy(-b[k], &basis[k], &mut r);
            if k > 0 {
                axpy(-a[k - 1], &basis[k - 1], &mut r);
            }
            let defect = dot(&r, &r).sqrt();
            if defect > tolerance * scale {
                return Err(Error::Orthogonality { defect, tolerance });
            }
        }
        Self::op(n, a, b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn form(&self) -> &TableForm {
        &self.form
    }

    pub fn is_op(&self) -> bool {
        matches!(self.form, TableForm::Op { .. })
    }

    /// Lower bandwidth `q` (1 for OP tables).
    pub fn bandwidth(&self) -> usize {
        match &self.form {
            TableForm::Op { .. } => 1,
            TableForm::Banded { q, .. } => *q,
        }
    }

    /// Largest index `K` such that every `⟨xP_k, Q_m⟩` with `k, m ≤ K` is stored.
    pub fn max_index(&self) -> usize {
        match &self.form {
            TableForm::Op { a, b } => (b.len() - 1).min(a.len()),
            TableForm::Banded { rows, .. } => rows.len() - 1,
        }
    }

    /// Number of indices stored beyond `N - 1`.
    pub fn pad(&self) -> usize {
        self.max_index() + 1 - self.n
    }

    /// Same coefficients viewed as an ensemble of a different size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        let t = Self {
            n,
            form: self.form.clone(),
        };
        if n == 0 {
            return Err(Error::Parameter("ensemble size N must be ≥ 1".into()));
        }
        t.require_index(n - 1, "table")?;
        Ok(t)
    }

    /// OP-form coefficients `(a, b)`, if this is an OP table.
    pub fn op_coefficients(&self) -> Option<(&[f64], &[f64])> {
        match &self.form {
            TableForm::Op { a, b } => Some((a, b)),
            TableForm::Banded { .. } => None,
        }
    }

    fn require_index(&self, k: usize, what: &'static str) -> Result<()> {
        let max = self.max_index();
        if k > max {
            Err(Error::OutOfRange { what, index: k, max })
        } else {
            Ok(())
        }
    }

    /// `⟨xP_k, Q_m⟩`. Entries outside the band are structural zeros.
    pub fn coeff(&self, k: usize, m: usize) -> Result<f64> {
        let q = self.bandwidth();
        if m > k + 1 || m + q < k {
            return Ok(0.0);
        }
        self.require_index(k.max(m), "recurrence coefficient")?;
        Ok(self.raw(k, m))
    }

    // caller guarantees the index is stored
    fn raw(&self, k: usize, m: usize) -> f64 {
        match &self.form {
            TableForm::Op { a, b } => {
                if m == k + 1 {
                    a[k]
                } else if m == k {
                    b[k]
                } else {
                    a[m]
                }
            }
            TableForm::Banded { rows, .. } => rows[k][k + 1 - m],
        }
    }

    /// Recurrence data needed to build `P_{k+1}` from `P_0..P_k`:
    /// `(⟨xP_k, Q_{k+1}⟩, [(m, ⟨xP_k, Q_m⟩) for m ≤ k])`.
    pub(crate) fn forward_step(&self, k: usize) -> Result<(f64, Vec<(usize, f64)>)> {
        let (lead, rest) = match &self.form {
            TableForm::Op { a, b } => {
                if k >= a.len() || k >= b.len() {
                    return Err(Error::OutOfRange {
                        what: "polynomial degree",
                        index: k + 1,
                        max: a.len().min(b.len()),
                    });
                }
                let mut rest = vec![(k, b[k])];
                if k > 0 {
                    rest.push((k - 1, a[k - 1]));
                }
                (a[k], rest)
            }
            TableForm::Banded { q, rows } => {
                let row = rows.get(k).ok_or(Error::OutOfRange {
                    what: "polynomial degree",
                    index: k + 1,
                    max: rows.len(),
                })?;
                let rest = (0..=*q)
                    .filter(|j| *j <= k)
                    .map(|j| (k - j, row[j + 1]))
                    .collect();
                (row[0], rest)
            }
        };
        if lead == 0.0 {
            return Err(Error::DegenerateRecurrence { k });
        }
        Ok((lead, rest))
    }

    /// Highest polynomial degree evaluable by the forward recurrence.
    pub fn max_degree(&self) -> usize {
        match &self.form {
            TableForm::Op { a, b } => a.len().min(b.len()),
            TableForm::Banded { rows, .. } => rows.len(),
        }
    }

    /// Apply multiplication by x `steps` times to `P_start`, keeping only the
    /// components for which `keep(remaining_steps, index)` holds.
    /// Returns `(lowest_index, coefficients)`.
    fn propagate(
        &self,
        start: usize,
        steps: usize,
        keep: impl Fn(usize, usize) -> bool,
    ) -> Result<(usize, Vec<f64>)> {
        let q = self.bandwidth();
        let mut lo = start;
        let mut v = vec![1.0];
        for step in 0..steps {
            let remaining = steps - step - 1;
            let new_lo = lo.saturating_sub(q);
            let mut next = vec![0.0; lo + v.len() + 1 - new_lo];
            for (off, &c) in v.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let i = lo + off;
                for m in i.saturating_sub(q)..=i + 1 {
                    if keep(remaining, m) {
                        next[m - new_lo] += c * self.coeff(i, m)?;
                    }
                }
            }
            // trim zeros at both ends
            let first = next.iter().position(|c| *c != 0.0);
            match first {
                None => return Ok((new_lo, Vec::new())),
                Some(f) => {
                    let last = next.iter().rposition(|c| *c != 0.0).unwrap_or(f);
                    lo = new_lo + f;
                    v = next[f..=last].to_vec();
                }
            }
        }
        Ok((lo, v))
    }

    /// `⟨x^l P_k, Q_m⟩` as the sum over weighted paths (0,k) → (l,m).
    pub fn path_sum_moment(&self, l: usize, k: usize, m: usize) -> Result<f64> {
        let q = self.bandwidth();
        let (lo, v) = self.propagate(k, l, |r, i| i + r >= m && i <= m + q * r)?;
        Ok(if m >= lo && m - lo < v.len() { v[m - lo] } else { 0.0 })
    }

    /// Coefficients of `x^l P_k` on `P_m` for all `m` (unpruned).
    pub fn power_row(&self, l: usize, k: usize) -> Result<(usize, Vec<f64>)> {
        self.propagate(k, l, |_, _| true)
    }

    /// `(1/N) Σ_{k<N} ⟨x^l P_k, Q_k⟩`, the l-th moment of the mean empirical measure.
    pub fn mean_moment(&self, l: usize) -> Result<f64> {
        let mut acc = 0.0;
        for k in 0..self.n {
            acc += self.path_sum_moment(l, k, k)?;
        }
        Ok(acc / self.n as f64)
    }

    /// `Σ_{k<N}` of path sums (0,k) → (l,k) restricted to ordinates `< N`,
    /// i.e. the trace of the l-th power of the N×N section.
    pub fn section_trace_power(&self, l: usize) -> Result<f64> {
        let n = self.n;
        let q = self.bandwidth();
        let mut acc = 0.0;
        for k in 0..n {
            let (lo, v) = self.propagate(k, l, |r, i| i < n && i + r >= k && i <= k + q * r)?;
            if k >= lo && k - lo < v.len() {
                acc += v[k - lo];
            }
        }
        Ok(acc)
    }

    /// The N×N matrix `[⟨xP_i, Q_j⟩]_{i,j<N}`.
    pub fn hessenberg_matrix(&self) -> Result<DMatrix<f64>> {
        self.section(self.n)
    }

    /// The `size`×`size` finite section `[⟨xP_i, Q_j⟩]`.
    pub fn section(&self, size: usize) -> Result<DMatrix<f64>> {
        if size > 0 {
            self.require_index(size - 1, "section")?;
        }
        let mut h = DMatrix::zeros(size, size);
        for i in 0..size {
            for j in 0..size {
                h[(i, j)] = self.coeff(i, j)?;
            }
        }
        Ok(h)
    }

    /// Largest `|⟨xP_k, Q_m⟩|` over `N - l ≤ k, m ≤ N + l`, restricted to
    /// stored indices. Paths of length `l` started below N never reach
    /// beyond `N - 1 + l`, so the table must cover at least that index.
    pub fn window_max(&self, l: usize) -> Result<f64> {
        self.require_index(self.n - 1 + l, "bound window")?;
        let lo = self.n.saturating_sub(l);
        let hi = (self.n + l).min(self.max_index());
        let mut best = 0.0f64;
        for k in lo..=hi {
            for m in lo..=hi {
                best = best.max(self.coeff(k, m)?.abs());
            }
        }
        Ok(best)
    }

    pub fn to_json(&self) -> TableJson {
        match &self.form {
            TableForm::Op { a, b } => TableJson::Op {
                n: Some(self.n),
                a: a.clone(),
                b: b.clone(),
            },
            TableForm::Banded { q, rows } => {
                let mut c = Vec::new();
                for (k, row) in rows.iter().enumerate() {
                    for (idx, v) in row.iter().enumerate() {
                        if *v != 0.0 {
                            c.push((k, idx as i64 - 1, *v));
                        }
                    }
                }
                TableJson::Banded {
                    n: Some(self.n),
                    q: *q,
                    c,
                }
            }
        }
    }

    /// Build from the JSON form; `n` overrides the size stored in the JSON.
    pub fn from_json(json: &TableJson, n: Option<usize>) -> Result<Self> {
        let pick = |stored: Option<usize>| {
            n.or(stored)
                .ok_or_else(|| Error::Config("table JSON needs an ensemble size \"N\"".into()))
        };
        match json {
            TableJson::Op { n: stored, a, b } => Self::op(pick(*stored)?, a.clone(), b.clone()),
            TableJson::Banded { n: stored, q, c } => {
                let len = c.iter().map(|(k, _, _)| k + 1).max().unwrap_or(0);
                let mut rows = vec![vec![0.0; q + 2]; len];
                for &(k, j, v) in c {
                    if j < -1 || j > *q as i64 {
                        return Err(Error::Config(format!(
                            "banded entry ({k}, {j}) outside -1..={q}"
                        )));
                    }
                    rows[k][(j + 1) as usize] = v;
                }
                Self::banded(pick(*stored)?, *q, rows)
            }
        }
    }
}

/// JSON representation of a [`RecurrenceTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum TableJson {
    Op {
        #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        a: Vec<f64>,
        b: Vec<f64>,
    },
    Banded {
        #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        q: usize,
        c: Vec<(usize, i64, f64)>,
    },
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalan_like(a: f64, b: f64, l: usize) -> f64 {
        let binom = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        (0..=l / 2)
            .map(|m| binom(l, 2 * m) * binom(2 * m, m) * a.powi(2 * m as i32) * b.powi((l - 2 * m) as i32))
            .sum()
    }

    #[test]
    fn zeroth_moment_is_biorthogonality() {
        let t = RecurrenceTable::gue(5, 3).unwrap();
        assert_eq!(t.path_sum_moment(0, 2, 2).unwrap(), 1.0);
        assert_eq!(t.path_sum_moment(0, 2, 3).unwrap(), 0.0);
    }

    #[test]
    fn second_moment_three_paths() {
        let a = vec![0.7, 1.3, 0.4, 0.9, 1.1];
        let b = vec![0.2, -0.5, 0.3, 0.8, -0.1, 0.6];
        let t = RecurrenceTable::op(3, a.clone(), b.clone()).unwrap();
        for k in 1..4 {
            let expected = a[k - 1].powi(2) + b[k].powi(2) + a[k].powi(2);
            assert!((t.path_sum_moment(2, k, k).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_coefficients_closed_form() {
        let (a, b) = (0.8, 0.3);
        let t = RecurrenceTable::op(20, vec![a; 40], vec![b; 40]).unwrap();
        for l in 0..=8 {
            let v = t.path_sum_moment(l, 15, 15).unwrap();
            let e = catalan_like(a, b, l);
            assert!((v - e).abs() < 1e-12 * e.max(1.0), "l={l}: {v} vs {e}");
        }
        assert!((t.path_sum_moment(2, 10, 10).unwrap() - (2.0 * a * a + b * b)).abs() < 1e-14);
    }

    #[test]
    fn mean_moment_basics() {
        let t = RecurrenceTable::gue(200, 8).unwrap();
        assert_eq!(t.mean_moment(0).unwrap(), 1.0);
        assert!((t.mean_moment(2).unwrap() - 1.0).abs() < 0.02);
        assert!((t.mean_moment(4).unwrap() - 2.0).abs() < 0.05);
        let t = RecurrenceTable::op(3, vec![1.0, 1.0, 1.0], vec![0.5, 1.0, 2.0, 0.0]).unwrap();
        assert!((t.mean_moment(1).unwrap() - 3.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_names_index() {
        let t = RecurrenceTable::gue(4, 0).unwrap();
        match t.mean_moment(4) {
            Err(Error::OutOfRange { index, .. }) => assert_eq!(index, 5),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn hessenberg_examples() {
        let t = RecurrenceTable::op(2, vec![1.0, 1.0], vec![0.0, 0.0, 0.0]).unwrap();
        let h = t.hessenberg_matrix().unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let t = RecurrenceTable::gue(3, 1).unwrap();
        let h = t.hessenberg_matrix().unwrap();
        assert!((h[(0, 1)] - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((h[(1, 2)] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(h[(0, 2)], 0.0);
        let t = RecurrenceTable::op(4, vec![1.0; 5], vec![0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let h = t.hessenberg_matrix().unwrap();
        assert!((h.trace() - 4.0 * t.mean_moment(1).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn banded_structure_is_lower_hessenberg() {
        let rows = vec![vec![1.0, 0.5, 0.2]; 6];
        let t = RecurrenceTable::banded(4, 1, rows).unwrap();
        let h = t.hessenberg_matrix().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if j > i + 1 || j + 1 < i {
                    assert_eq!(h[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn chebyshev_table_from_arcsine_measure() {
        let m = ReferenceMeasure::equilibrium_measure(-1.0, 1.0, 256).unwrap();
        let t = RecurrenceTable::from_measure(&m, 10, 5).unwrap();
        let (a, b) = t.op_coefficients().unwrap();
        assert!((a[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        for k in 1..a.len() {
            assert!((a[k] - 0.5).abs() < 1e-12);
        }
        assert!(b.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn shifted_measure_shifts_b() {
        let m = ReferenceMeasure::equilibrium_measure(-1.0, 1.0, 64).unwrap();
        let s = m.shifted(0.75).unwrap();
        let t0 = RecurrenceTable::from_measure(&m, 5, 2).unwrap();
        let t1 = RecurrenceTable::from_measure(&s, 5, 2).unwrap();
        let (a0, b0) = t0.op_coefficients().unwrap();
        let (a1, b1) = t1.op_coefficients().unwrap();
        for k in 0..a0.len() {
            assert!((a0[k] - a1[k]).abs() < 1e-12);
        }
        for k in 0..b0.len() {
            assert!((b1[k] - b0[k] - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn gue_table_matches_hermite_measure() {
        let n = 4;
        let m = ReferenceMeasure::scaled_hermite(n, 64).unwrap();
        let t = RecurrenceTable::from_measure(&m, n, 4).unwrap();
        let g = RecurrenceTable::gue(n, 4).unwrap();
        let (a, b) = t.op_coefficients().unwrap();
        let (ga, _) = g.op_coefficients().unwrap();
        let expected = [0.5, 2f64.sqrt() / 2.0, 3f64.sqrt() / 2.0, 1.0];
        for k in 0..4 {
            assert!((ga[k] - expected[k]).abs() < 1e-15);
        }
        for k in 0..a.len() {
            assert!((a[k] - ga[k]).abs() < 1e-6);
        }
        assert!(b.iter().all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn coarse_measure_is_rank_error() {
        let m = ReferenceMeasure::from_atoms(vec![0.0, 1.0, 2.0], vec![1.0; 3]).unwrap();
        assert!(matches!(
            RecurrenceTable::from_measure(&m, 3, 1),
            Err(Error::Rank { .. })
        ));
    }

    #[test]
    fn unknown_classical_name() {
        assert!(matches!(
            RecurrenceTable::classical("laguerre", 3, 1),
            Err(Error::UnknownName(_))
        ));
    }

    #[test]
    fn json_roundtrip() {
        let t = RecurrenceTable::banded(2, 1, vec![vec![1.0, 0.5, 0.0], vec![2.0, 0.0, 0.3], vec![1.0, 0.1, 0.2]])
            .unwrap();
        let s = serde_json::to_string(&t.to_json()).unwrap();
        let back = RecurrenceTable::from_json(&serde_json::from_str(&s).unwrap(), None).unwrap();
        assert_eq!(t, back);
        let j: TableJson = serde_json::from_str(r#"{"form":"op","a":[1,1],"b":[0,0,0]}"#).unwrap();
        assert!(RecurrenceTable::from_json(&j, Some(2)).is_ok());
        assert!(RecurrenceTable::from_json(&j, None).is_err());
    }
}
