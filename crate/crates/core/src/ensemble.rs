//! Polynomial ensembles and their projection kernels.
//!
//! A projection kernel is stored through its factors at the atoms of the
//! reference measure: `K(x_i, x_j) = Σ_k P_k(x_i) conj(Q_k(x_j))`. The
//! sampler only ever needs these atom values.

use nalgebra::DMatrix;
use rand::seq::index::sample as sample_indices;

use crate::error::{Error, Result};
use crate::linalg::{determinant, log_determinant};
use crate::measure::ReferenceMeasure;
use crate::recurrence::RecurrenceTable;
use crate::rng::replica_rng;
use crate::scalar::{scale, Complex64, Scalar};

/// Maximum allowed `|⟨P_j, Q_k⟩ - δ_jk|`.
pub const BIORTHOGONALITY_TOLERANCE: f64 = 1e-8;

const HERMITIAN_TOLERANCE: f64 = 1e-10;
const MINOR_TOLERANCE: f64 = 1e-9;

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Finite-rank kernel `Σ_k P_k(x) conj(Q_k(y))` known at the atoms of a measure.
#[derive(Debug, Clone)]
pub struct ProjectionKernel<S: Scalar> {
    measure: ReferenceMeasure<S>,
    // atoms × rank
    p: DMatrix<S>,
    // conj(Q), atoms × rank
    qc: DMatrix<S>,
    hermitian: bool,
}

impl<S: Scalar> ProjectionKernel<S> {
    /// Kernel from atom values `p[(i, k)] = P_k(x_i)`, `q[(i, k)] = Q_k(x_i)`.
    /// The families must be biorthogonal in `L²(measure)`.
    pub fn new(measure: ReferenceMeasure<S>, p: DMatrix<S>, q: DMatrix<S>) -> Result<Self> {
        let n_atoms = measure.len();
        if p.nrows() != n_atoms || q.nrows() != n_atoms || p.ncols() != q.ncols() {
            return Err(Error::Parameter(format!(
                "kernel factors have shapes {}×{} and {}×{} for {} atoms",
                p.nrows(),
                p.ncols(),
                q.nrows(),
                q.ncols(),
                n_atoms
            )));
        }
        if p.ncols() > n_atoms {
            return Err(Error::Rank {
                atoms: n_atoms,
                requested: p.ncols(),
            });
        }
        let size = p.iter().fold(1.0f64, |m, v| m.max(v.modulus()));
        let hermitian = p.iter().zip(q.iter()).all(|(a, b)| (*a - *b).modulus() <= HERMITIAN_TOLERANCE * size);
        let kernel = Self {
            measure,
            p,
            qc: q.map(|v| v.conjugate()),
            hermitian,
        };
        let defect = kernel.biorthogonality_defect();
        if !(defect <= BIORTHOGONALITY_TOLERANCE) {
            return Err(Error::Orthogonality {
                defect,
                tolerance: BIORTHOGONALITY_TOLERANCE,
            });
        }
        Ok(kernel)
    }

    pub fn measure(&self) -> &ReferenceMeasure<S> {
        &self.measure
    }

    pub fn rank(&self) -> usize {
        self.p.ncols()
    }

    pub fn n_atoms(&self) -> usize {
        self.p.nrows()
    }

    /// True when `Q = P` at every atom, i.e. the projection is orthogonal.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn p_values(&self) -> &DMatrix<S> {
        &self.p
    }

    /// `Q_k(x_i)` for all atoms and indices.
    pub fn q_values(&self) -> DMatrix<S> {
        self.qc.map(|v| v.conjugate())
    }

    /// `⟨P_j, Q_k⟩` in `L²(measure)`.
    pub fn gram(&self) -> DMatrix<S> {
        let r = self.rank();
        let w = self.measure.weights();
        let mut g = DMatrix::zeros(r, r);
        for j in 0..r {
            for k in 0..r {
                let mut acc = S::zero();
                for i in 0..self.n_atoms() {
                    acc += scale(self.p[(i, j)] * self.qc[(i, k)], w[i]);
                }
                g[(j, k)] = acc;
            }
        }
        g
    }

    /// `max |⟨P_j, Q_k⟩ - δ_jk|`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let g = self.gram();
        let mut worst = 0.0f64;
        for j in 0..g.nrows() {
            for k in 0..g.ncols() {
                let target = if j == k { S::one() } else { S::zero() };
                worst = worst.max((g[(j, k)] - target).modulus());
            }
        }
        worst
    }

    /// `K(x_i, x_j)`.
    pub fn entry(&self, i: usize, j: usize) -> S {
        let mut acc = S::zero();
        for k in 0..self.rank() {
            acc += self.p[(i, k)] * self.qc[(j, k)];
        }
        acc
    }

    /// `K(x_i, x_i)` at every atom (real part).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_atoms()).map(|i| self.entry(i, i).real()).collect()
    }

    /// `K(x_i, x_s)` for every atom `i`.
    pub fn column(&self, s: usize) -> Vec<S> {
        let mut out = vec![S::zero(); self.n_atoms()];
        for k in 0..self.rank() {
            let c = self.qc[(s, k)];
            for (o, p) in out.iter_mut().zip(self.p.column(k).iter()) {
                *o += *p * c;
            }
        }
        out
    }

    /// `K(x_s, x_i)` for every atom `i`.
    pub fn row(&self, s: usize) -> Vec<S> {
        let mut out = vec![S::zero(); self.n_atoms()];
        for k in 0..self.rank() {
            let c = self.p[(s, k)];
            for (o, q) in out.iter_mut().zip(self.qc.column(k).iter()) {
                *o += c * *q;
            }
        }
        out
    }

    /// `(1/N) K(x_i, x_i)` at every atom; negative values beyond the
    /// tolerance signal an invalid kernel.
    pub fn mean_density(&self) -> Result<Vec<f64>> {
        let n = self.rank() as f64;
        let d: Vec<f64> = self.diagonal().into_iter().map(|v| v / n).collect();
        let max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some((i, v)) = d.iter().enumerate().find(|(_, v)| **v < -MINOR_TOLERANCE * max.max(1.0)) {
            return Err(Error::PositivityViolation {
                witness: vec![i],
                value: *v,
            });
        }
        Ok(d)
    }

    /// `det[K(x_{a}, x_{b})]` over the given atom indices.
    pub fn joint_density(&self, atoms: &[usize]) -> Result<f64> {
        let det = determinant(atoms.len(), |r, c| self.entry(atoms[r], atoms[c])).real();
        check_minor(det, atoms.iter().map(|&a| self.entry(a, a).modulus()), atoms)
            .map_err(|(witness, value)| Error::PositivityViolation { witness, value })
    }

    /// Scan principal minors for negativity: all 1-point minors, all pairs
    /// on small measures, and seeded random tuples otherwise.
    pub fn scan_minors(&self, seed: u64) -> std::result::Result<(), (Vec<usize>, f64)> {
        let n_atoms = self.n_atoms();
        let diag: Vec<f64> = (0..n_atoms).map(|i| self.entry(i, i).real()).collect();
        for (i, d) in diag.iter().enumerate() {
            check_minor(*d, std::iter::once(d.abs()), &[i])?;
        }
        let minor = |tuple: &[usize]| {
            let det = determinant(tuple.len(), |r, c| self.entry(tuple[r], tuple[c])).real();
            check_minor(det, tuple.iter().map(|&a| diag[a].abs()), tuple).map(|_| ())
        };
        if self.rank() >= 2 {
            if n_atoms <= 64 {
                for i in 0..n_atoms {
                    for j in i + 1..n_atoms {
                        minor(&[i, j])?;
                    }
                }
            }
        }
        let mut rng = replica_rng(seed, 0);
        let start = if n_atoms <= 64 { 3 } else { 2 };
        for k in start..=self.rank().min(n_atoms) {
            for _ in 0..500 {
                let tuple = sample_indices(&mut rng, n_atoms, k).into_vec();
                minor(&tuple)?;
            }
        }
        Ok(())
    }
}

fn check_minor(
    det: f64,
    diag: impl Iterator<Item = f64>,
    witness: &[usize],
) -> std::result::Result<f64, (Vec<usize>, f64)> {
    let scale: f64 = diag.product::<f64>().max(1e-300);
    if det.is_finite() && det >= -MINOR_TOLERANCE * scale.max(1.0) {
        Ok(det.max(0.0))
    } else {
        Err((witness.to_vec(), det))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum QForm {
    /// `Q_k = P_k + Σ_j tilt[k][j] P_{N+j}`.
    Polynomial { tilt: Vec<Vec<f64>> },
    /// Q only known at atoms.
    Tabulated,
}

/// An N-point polynomial ensemble: measure, recurrence table for `P`, and the
/// biorthogonal family `Q` at the atoms.
#[derive(Debug, Clone)]
pub struct PolynomialEnsemble<S: Scalar> {
    table: RecurrenceTable,
    q_form: QForm,
    kernel: ProjectionKernel<S>,
}

impl<S: Scalar> PolynomialEnsemble<S> {
    /// Orthogonal polynomial ensemble: `Q_k = P_k`, with `P_k` generated by
    /// the table's recurrence from `P_0 = 1/sqrt(μ(Λ))`.
    pub fn new(measure: ReferenceMeasure<S>, table: RecurrenceTable) -> Result<Self> {
        let p = atom_values(&measure, &table, table.n())?;
        let kernel = ProjectionKernel::new(measure, p.clone(), p)?;
        Ok(Self {
            table,
            q_form: QForm::Polynomial { tilt: Vec::new() },
            kernel,
        })
    }

    /// Ensemble with `P` from the table and arbitrary `Q` given at the atoms
    /// (`q[(i, k)] = Q_k(x_i)`).
    pub fn with_q_values(measure: ReferenceMeasure<S>, table: RecurrenceTable, q: DMatrix<S>) -> Result<Self> {
        let p = atom_values(&measure, &table, table.n())?;
        let kernel = ProjectionKernel::new(measure, p, q)?;
        Ok(Self {
            table,
            q_form: QForm::Tabulated,
            kernel,
        })
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn measure(&self) -> &ReferenceMeasure<S> {
        self.kernel.measure()
    }

    pub fn table(&self) -> &RecurrenceTable {
        &self.table
    }

    pub fn kernel(&self) -> &ProjectionKernel<S> {
        &self.kernel
    }

    pub fn is_hermitian(&self) -> bool {
        self.kernel.is_hermitian()
    }

    /// Tilt coefficients (empty for untilted ensembles).
    pub fn tilt(&self) -> &[Vec<f64>] {
        match &self.q_form {
            QForm::Polynomial { tilt } => tilt,
            QForm::Tabulated => &[],
        }
    }

    /// `(P_0(x), …, P_{N-1}(x))`.
    pub fn eval_p(&self, x: S) -> Result<Vec<S>> {
        poly_values(&self.table, self.measure().total_mass(), x, self.n())
    }

    /// `(Q_0(x), …, Q_{N-1}(x))`. Tabulated families are only known at atoms.
    pub fn eval_q(&self, x: S) -> Result<Vec<S>> {
        if let Some(i) = self.measure().atom_index(x) {
            return Ok(self.kernel.qc.row(i).iter().map(|v| v.conjugate()).collect());
        }
        match &self.q_form {
            QForm::Tabulated => Err(Error::UnsupportedPoint(x.render())),
            QForm::Polynomial { tilt } => {
                let extra = tilt.iter().map(Vec::len).max().unwrap_or(0);
                let n = self.n();
                let all = poly_values(&self.table, self.measure().total_mass(), x, n + extra)?;
                Ok((0..n)
                    .map(|k| {
                        let mut v = all[k];
                        if let Some(row) = tilt.get(k) {
                            for (j, t) in row.iter().enumerate() {
                                v += scale(all[n + j], *t);
                            }
                        }
                        v
                    })
                    .collect())
            }
        }
    }

    /// `K_N(x, y) = Σ_{k<N} P_k(x) conj(Q_k(y))`.
    pub fn eval_kernel(&self, x: S, y: S) -> Result<S> {
        let p = self.eval_p(x)?;
        let q = self.eval_q(y)?;
        Ok(p.iter().zip(&q).fold(S::zero(), |acc, (a, b)| acc + *a * b.conjugate()))
    }

    /// Christoffel–Darboux form `a_{N-1}(P_N(x)P_{N-1}(y) - P_{N-1}(x)P_N(y))/(x - y)`
    /// for orthogonal polynomial ensembles on the real line.
    pub fn christoffel_darboux(&self, x: S, y: S) -> Result<S> {
        let (a, _) = self
            .table
            .op_coefficients()
            .ok_or_else(|| Error::Unsupported("Christoffel–Darboux needs an OP-form table".into()))?;
        if !self.is_hermitian() {
            return Err(Error::Unsupported("Christoffel–Darboux needs Q = P".into()));
        }
        if x == y {
            return Err(Error::Parameter("Christoffel–Darboux needs x ≠ y".into()));
        }
        let n = self.n();
        let mass = self.measure().total_mass();
        let px = poly_values(&self.table, mass, x, n + 1)?;
        let py = poly_values(&self.table, mass, y, n + 1)?;
        let num = px[n] * py[n - 1] - px[n - 1] * py[n];
        Ok(scale(num / (x - y), a[n - 1]))
    }

    /// `(1/N) K_N(x, x)`.
    pub fn mean_density(&self, x: S) -> Result<f64> {
        let v = self.eval_kernel(x, x)?.real() / self.n() as f64;
        if v < -MINOR_TOLERANCE {
            return Err(Error::PositivityViolation {
                witness: self.measure().atom_index(x).into_iter().collect(),
                value: v,
            });
        }
        Ok(v.max(0.0))
    }

    /// `det[K(x_i, x_j)]` for `k ≤ N` points.
    pub fn joint_density(&self, points: &[S]) -> Result<f64> {
        let (entries, witness) = self.point_kernel(points)?;
        let k = points.len();
        let det = determinant(k, |i, j| entries[i * k + j]).real();
        check_minor(det, (0..k).map(|i| entries[i * k + i].modulus()), &witness)
            .map_err(|(witness, value)| Error::PositivityViolation { witness, value })
    }

    /// `ln(det[K(x_i, x_j)] / N!)`: the log joint density of an N-point
    /// configuration with respect to `μ^{⊗N}`.
    pub fn log_joint_density(&self, points: &[S]) -> Result<f64> {
        if points.len() != self.n() {
            return Err(Error::Parameter(format!(
                "log joint density needs exactly N = {} points",
                self.n()
            )));
        }
        let (entries, witness) = self.point_kernel(points)?;
        let k = points.len();
        let (phase, log) = log_determinant(k, |i, j| entries[i * k + j]);
        if phase.real() < 1.0 - 1e-8 {
            return Err(Error::PositivityViolation {
                witness,
                value: phase.real() * log.exp(),
            });
        }
        Ok(log - ln_factorial(self.n()))
    }

    // row-major K(x_i, x_j) and the atom index of each point
    fn point_kernel(&self, points: &[S]) -> Result<(Vec<S>, Vec<usize>)> {
        let k = points.len();
        if k > self.n() {
            return Err(Error::Parameter(format!(
                "{k} points exceed the ensemble size {}",
                self.n()
            )));
        }
        let ps: Vec<Vec<S>> = points.iter().map(|x| self.eval_p(*x)).collect::<Result<_>>()?;
        let qs: Vec<Vec<S>> = points.iter().map(|x| self.eval_q(*x)).collect::<Result<_>>()?;
        let mut entries = Vec::with_capacity(k * k);
        for p in &ps {
            for q in &qs {
                entries.push(p.iter().zip(q).fold(S::zero(), |acc, (a, b)| acc + *a * b.conjugate()));
            }
        }
        let witness = points
            .iter()
            .map(|x| self.measure().atom_index(*x).unwrap_or(usize::MAX))
            .collect();
        Ok((entries, witness))
    }

    /// Non-orthogonal ensemble with `Q_k = P_k + Σ_j tilt[k][j] P_{N+j}`.
    ///
    /// The added directions are orthogonal to `P_0..P_{N-1}`, so
    /// biorthogonality is kept. With `validate`, principal minors are
    /// scanned and the first negative one is reported.
    pub fn tilt_nonorthogonal(&self, tilt: &[Vec<f64>], validate: bool, seed: u64) -> Result<Self> {
        if !self.is_hermitian() || self.q_form != (QForm::Polynomial { tilt: Vec::new() }) {
            return Err(Error::Unsupported("tilting needs an orthogonal (Q = P) ensemble".into()));
        }
        let n = self.n();
        if tilt.len() > n {
            return Err(Error::Parameter(format!("tilt has {} rows for N = {n}", tilt.len())));
        }
        if tilt.iter().flatten().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("non-finite tilt coefficient".into()));
        }
        if tilt.iter().flatten().all(|t| *t == 0.0) {
            return Ok(self.clone());
        }
        let extra = tilt.iter().map(Vec::len).max().unwrap_or(0);
        let all = atom_values(self.measure(), &self.table, n + extra)?;
        let mut q = all.columns(0, n).into_owned();
        for (k, row) in tilt.iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                if *t != 0.0 {
                    let dir = all.column(n + j).map(|v| scale(v, *t));
                    let mut col = q.column_mut(k);
                    col += dir;
                }
            }
        }
        let p = all.columns(0, n).into_owned();
        let kernel = ProjectionKernel::new(self.measure().clone(), p, q)?;
        if validate {
            kernel
                .scan_minors(seed)
                .map_err(|(witness, value)| Error::InvalidTilt { witness, value })?;
        }
        Ok(Self {
            table: self.table.clone(),
            q_form: QForm::Polynomial { tilt: tilt.to_vec() },
            kernel,
        })
    }
}

impl PolynomialEnsemble<f64> {
    /// GUE with reference measure `exp(-N x^2/2) dx` on `nodes` Gauss–Hermite atoms.
    pub fn gue(n: usize, nodes: usize, pad: usize) -> Result<Self> {
        Self::new(ReferenceMeasure::scaled_hermite(n, nodes)?, RecurrenceTable::gue(n, pad)?)
    }

    /// Chebyshev ensemble on the arcsine law of [-1, 1].
    pub fn chebyshev(n: usize, nodes: usize, pad: usize) -> Result<Self> {
        Self::new(
            ReferenceMeasure::equilibrium_measure(-1.0, 1.0, nodes)?,
            RecurrenceTable::chebyshev(n, pad)?,
        )
    }
}

impl PolynomialEnsemble<Complex64> {
    /// Monomials `z^k` on the uniform unit circle (the CUE eigenvalue law).
    pub fn uniform_circle(n: usize, nodes: usize, pad: usize) -> Result<Self> {
        Self::new(ReferenceMeasure::uniform_circle(nodes)?, RecurrenceTable::unit_circle(n, pad)?)
    }
}

/// `P_0(x), …, P_{count-1}(x)` by the forward recurrence.
pub(crate) fn poly_values<S: Scalar>(table: &RecurrenceTable, mass: f64, x: S, count: usize) -> Result<Vec<S>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(S::from_real(1.0 / mass.sqrt()));
    for k in 0..count - 1 {
        let (lead, rest) = table.forward_step(k)?;
        let mut v = x * out[k];
        for (m, c) in rest {
            v -= scale(out[m], c);
        }
        out.push(scale(v, 1.0 / lead));
    }
    Ok(out)
}

/// Matrix of `P_k(x_i)`, atoms × count.
fn atom_values<S: Scalar>(measure: &ReferenceMeasure<S>, table: &RecurrenceTable, count: usize) -> Result<DMatrix<S>> {
    if count > measure.len() {
        return Err(Error::Rank {
            atoms: measure.len(),
            requested: count,
        });
    }
    let mass = measure.total_mass();
    let mut m = DMatrix::zeros(measure.len(), count);
    for (i, x) in measure.points().iter().enumerate() {
        for (k, v) in poly_values(table, mass, *x, count)?.into_iter().enumerate() {
            m[(i, k)] = v;
        }
    }
    Ok(m)
}
