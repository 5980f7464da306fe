//! Exact sequential sampling of projection DPPs on atomic measures.
//!
//! Both schemes draw `x_{k+1}` from the conditional density
//! `η_{k+1}(x | x_1..x_k) = K_k(x, x) / (N - k)`, where `K_k` is the kernel
//! conditioned on the prefix (a Schur complement). They differ in how the
//! residual diagonal is maintained:
//!
//! * `hkpv`: unnormalized Gram–Schmidt on the slices `ψ_j = K(·, x_j)`,
//!   valid for hermitian kernels.
//! * `schur`: rank-one updates of the residual kernel through its column and
//!   row slices, valid for any projection kernel.
//!
//! Conditionals are evaluated at every atom and drawn categorically, so the
//! output law is exact up to floating point.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::ProjectionKernel;
use crate::error::{Error, Result};
use crate::linalg::{determinant, BorderedLu};
use crate::measure::{clamp_density, draw_index, ReferenceMeasure, DEFAULT_NEGATIVITY_TOLERANCE};
use crate::rng::replica_rng;
use crate::scalar::{scale, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMode {
    Hkpv,
    Schur,
    Auto,
}

impl FromStr for SamplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hkpv" => Ok(Self::Hkpv),
            "schur" => Ok(Self::Schur),
            "auto" => Ok(Self::Auto),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

impl fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hkpv => "hkpv",
            Self::Schur => "schur",
            Self::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub mode: SamplerMode,
    pub seed: u64,
    pub negativity_tolerance: f64,
    /// Assert that every conditional integrates to 1 within 1e-8.
    pub check_normalization: bool,
    /// Refactor the prefix LU from scratch after this many bordering steps.
    pub refactor_every: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            mode: SamplerMode::Auto,
            seed: 0,
            negativity_tolerance: DEFAULT_NEGATIVITY_TOLERANCE,
            check_normalization: false,
            refactor_every: 32,
        }
    }
}

/// One exact sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration<S: Scalar> {
    /// Atom indices in sampling order.
    pub atoms: Vec<usize>,
    pub points: Vec<S>,
    /// `ln(det[K(x_i, x_j)] / N!)`, accumulated from the conditionals.
    pub log_density: f64,
}

/// Which update rule a [`ConditionalState`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Hkpv,
    Schur,
}

impl SamplerMode {
    pub fn resolve<S: Scalar>(self, kernel: &ProjectionKernel<S>) -> Result<Scheme> {
        match self {
            Self::Hkpv if !kernel.is_hermitian() => Err(Error::Parameter(
                "hkpv mode needs a hermitian kernel; use schur".into(),
            )),
            Self::Hkpv => Ok(Scheme::Hkpv),
            Self::Schur => Ok(Scheme::Schur),
            Self::Auto if kernel.is_hermitian() => Ok(Scheme::Hkpv),
            Self::Auto => Ok(Scheme::Schur),
        }
    }
}

/// Conditioning state after a prefix `x_1..x_k`.
#[derive(Debug, Clone)]
pub struct ConditionalState<'a, S: Scalar> {
    kernel: &'a ProjectionKernel<S>,
    scheme: Scheme,
    prefix: Vec<usize>,
    // residual diagonal K_k(x_i, x_i)
    residual: Vec<S>,
    // hkpv: ψ̂_j; schur: column slices K_{j}(·, x_j)
    cols: Vec<Vec<S>>,
    // schur only: row slices K_{j}(x_j, ·)
    rows: Vec<Vec<S>>,
    pivots: Vec<S>,
    lu: BorderedLu<S>,
    refactor_every: usize,
    log_density: f64,
}

impl<'a, S: Scalar> ConditionalState<'a, S> {
    pub fn new(kernel: &'a ProjectionKernel<S>, scheme: Scheme) -> Self {
        let residual = (0..kernel.n_atoms()).map(|i| kernel.entry(i, i)).collect();
        Self {
            kernel,
            scheme,
            prefix: Vec::new(),
            residual,
            cols: Vec::new(),
            rows: Vec::new(),
            pivots: Vec::new(),
            lu: BorderedLu::default(),
            refactor_every: 32,
            log_density: 0.0,
        }
    }

    pub fn with_refactor_every(mut self, every: usize) -> Self {
        self.refactor_every = every.max(1);
        self
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    /// Sum of the log conditional densities of the prefix.
    pub fn log_density(&self) -> f64 {
        self.log_density
    }

    fn remaining(&self) -> f64 {
        (self.kernel.rank() - self.prefix.len()) as f64
    }

    /// `η_{k+1}(x_i | prefix)` with respect to the measure.
    pub fn conditional_density(&self, i: usize) -> f64 {
        self.residual[i].real() / self.remaining()
    }

    /// The conditional density at every atom.
    pub fn conditional_densities(&self) -> Vec<f64> {
        let r = self.remaining();
        self.residual.iter().map(|v| v.real() / r).collect()
    }

    /// The same density from a fresh Schur complement
    /// `(K(x,x) - K(x,X) M^{-1} K(X,x)) / (N - k)`, with `M = [K(x_a, x_b)]`.
    pub fn direct_conditional_density(&self, i: usize) -> Result<f64> {
        let k = self.prefix.len();
        let kern = self.kernel;
        let fresh;
        let lu = if self.scheme == Scheme::Schur {
            &self.lu
        } else {
            fresh = BorderedLu::factor(k, |a, b| kern.entry(self.prefix[a], self.prefix[b]))?;
            &fresh
        };
        let col: Vec<S> = self.prefix.iter().map(|&a| kern.entry(a, i)).collect();
        let sol = lu.solve(&col);
        let mut v = kern.entry(i, i);
        for (a, s) in self.prefix.iter().zip(&sol) {
            v -= kern.entry(i, *a) * *s;
        }
        Ok(v.real() / self.remaining())
    }

    /// Condition on one more atom.
    pub fn push(&mut self, s: usize) -> Result<()> {
        let n = self.kernel.rank();
        let k = self.prefix.len();
        if k >= n {
            return Err(Error::Parameter(format!("all {n} points already sampled")));
        }
        let pivot = self.residual[s];
        let scale_ref = self.kernel.entry(s, s).modulus().max(f64::MIN_POSITIVE);
        if !(pivot.real() > 1e-14 * scale_ref) {
            return Err(Error::NumericalBreakdown(format!(
                "prefix minor ratio {} at atom {s} is not positive",
                pivot.real()
            )));
        }
        self.log_density += (pivot.real() / self.remaining()).ln();

        let kern = self.kernel;
        let mut col = kern.column(s);
        match self.scheme {
            Scheme::Hkpv => {
                for (c, p) in self.cols.iter().zip(&self.pivots) {
                    let coef = c[s].conjugate() / *p;
                    for (x, y) in col.iter_mut().zip(c) {
                        *x -= coef * *y;
                    }
                }
                let norm = col[s].real();
                for (d, c) in self.residual.iter_mut().zip(&col) {
                    *d -= S::from_real(c.modulus_squared() / norm);
                }
                self.pivots.push(S::from_real(norm));
            }
            Scheme::Schur => {
                let mut row = kern.row(s);
                for ((c, r), p) in self.cols.iter().zip(&self.rows).zip(&self.pivots) {
                    let a = r[s] / *p;
                    let b = c[s] / *p;
                    for (x, y) in col.iter_mut().zip(c) {
                        *x -= a * *y;
                    }
                    for (x, y) in row.iter_mut().zip(r) {
                        *x -= b * *y;
                    }
                }
                let p = pivot;
                for ((d, c), r) in self.residual.iter_mut().zip(&col).zip(&row) {
                    *d -= *c * *r / p;
                }
                self.rows.push(row);
                self.pivots.push(p);

                if (k + 1) % self.refactor_every == 0 {
                    let mut idx = self.prefix.clone();
                    idx.push(s);
                    self.lu = BorderedLu::factor(k + 1, |a, b| kern.entry(idx[a], idx[b]))?;
                } else {
                    let r: Vec<S> = self.prefix.iter().map(|&a| kern.entry(s, a)).collect();
                    let c: Vec<S> = self.prefix.iter().map(|&a| kern.entry(a, s)).collect();
                    self.lu.border(&r, &c, kern.entry(s, s));
                }
            }
        }
        self.cols.push(col);
        self.residual[s] = S::zero();
        self.prefix.push(s);
        Ok(())
    }

    /// Gram determinant `det[⟨ψ_i, ψ_j⟩]` of the slices `ψ_i = K(·, x_i)`,
    /// checked against the product of squared heights `Π ‖ψ̂_i‖²`.
    pub fn base_times_height_check(&self) -> Result<f64> {
        if self.scheme != Scheme::Hkpv {
            return Err(Error::Unsupported("base-times-height check needs hkpv mode".into()));
        }
        if self.prefix.is_empty() {
            return Err(Error::Parameter("empty prefix".into()));
        }
        let kern = self.kernel;
        let w = kern.measure().weights();
        let psi: Vec<Vec<S>> = self.prefix.iter().map(|&s| kern.column(s)).collect();
        let k = psi.len();
        let mut g = DMatrix::<S>::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let mut acc = S::zero();
                for (u, wu) in w.iter().enumerate() {
                    acc += scale(psi[a][u] * psi[b][u].conjugate(), *wu);
                }
                g[(a, b)] = acc;
            }
        }
        let gram = determinant(k, |a, b| g[(a, b)]).real();
        let product: f64 = self.pivots.iter().map(|p| p.real()).product();
        let size: f64 = (0..k).map(|a| g[(a, a)].real()).product();
        if (gram - product).abs() > 1e-8 * gram.abs().max(product.abs()) + 1e-12 * size {
            return Err(Error::OrthogonalizationDrift { gram, product });
        }
        Ok(gram)
    }
}

/// Draw one configuration from the projection DPP of `kernel`.
pub fn sample<S: Scalar, R: Rng + ?Sized>(
    kernel: &ProjectionKernel<S>,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<PointConfiguration<S>> {
    let scheme = cfg.mode.resolve(kernel)?;
    let mut state = ConditionalState::new(kernel, scheme).with_refactor_every(cfg.refactor_every);
    let w = kernel.measure().weights();
    for _ in 0..kernel.rank() {
        let density = state.conditional_densities();
        let clamped = clamp_density(&density, cfg.negativity_tolerance).map_err(|e| match e {
            Error::NegativeDensity { index, value, .. } => {
                let mut witness = state.prefix().to_vec();
                witness.push(index);
                Error::PositivityViolation { witness, value }
            }
            other => other,
        })?;
        let masses: Vec<f64> = clamped.iter().zip(w).map(|(d, w)| d * w).collect();
        if cfg.check_normalization {
            let total: f64 = masses.iter().sum();
            if (total - 1.0).abs() > 1e-8 {
                return Err(Error::NumericalBreakdown(format!(
                    "conditional mass {total} after {} points",
                    state.prefix().len()
                )));
            }
        }
        let s = draw_index(&masses, rng)?;
        state.push(s)?;
    }
    let atoms = state.prefix().to_vec();
    let points = atoms.iter().map(|&i| kernel.measure().points()[i]).collect();
    Ok(PointConfiguration {
        atoms,
        points,
        log_density: state.log_density(),
    })
}

/// `replicas` independent samples; replica `r` uses stream `r` of `cfg.seed`.
pub fn sample_replicas<S: Scalar>(
    kernel: &ProjectionKernel<S>,
    cfg: &SamplerConfig,
    replicas: usize,
) -> Result<Vec<PointConfiguration<S>>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| sample(kernel, cfg, &mut replica_rng(cfg.seed, r as u64)))
        .collect()
}

/// Spectral data `(λ_k, φ_k, ψ_k)` of a contraction `Σ λ_k φ_k(x) conj(ψ_k(y))`.
#[derive(Debug, Clone)]
pub struct Contraction<S: Scalar> {
    measure: ReferenceMeasure<S>,
    lambdas: Vec<f64>,
    phi: DMatrix<S>,
    psi: DMatrix<S>,
}

impl<S: Scalar> Contraction<S> {
    /// `phi[(i, k)] = φ_k(x_i)`, `psi[(i, k)] = ψ_k(x_i)`; the families must be
    /// biorthogonal and every `λ_k` in (0, 1].
    pub fn new(measure: ReferenceMeasure<S>, lambdas: Vec<f64>, phi: DMatrix<S>, psi: DMatrix<S>) -> Result<Self> {
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
            return Err(Error::Parameter(format!("eigenvalue {l} outside (0, 1]")));
        }
        if phi.ncols() != lambdas.len() {
            return Err(Error::Parameter(format!(
                "{} eigenvalues for {} eigenfunctions",
                lambdas.len(),
                phi.ncols()
            )));
        }
        ProjectionKernel::new(measure.clone(), phi.clone(), psi.clone())?;
        Ok(Self {
            measure,
            lambdas,
            phi,
            psi,
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `Σ_k λ_k φ_k(x_i) conj(ψ_k(x_i))` at every atom: the 1-point intensity.
    pub fn intensity(&self) -> Vec<f64> {
        (0..self.measure.len())
            .map(|i| {
                self.lambdas
                    .iter()
                    .enumerate()
                    .map(|(k, l)| l * (self.phi[(i, k)] * self.psi[(i, k)].conjugate()).real())
                    .sum()
            })
            .collect()
    }

    /// Keep each index `k` independently with probability `λ_k` and return
    /// the projection kernel on the kept indices.
    pub fn thin<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ProjectionKernel<S>> {
        let kept: Vec<usize> = self
            .lambdas
            .iter()
            .enumerate()
            .filter(|(_, l)| rng.gen::<f64>() < **l)
            .map(|(k, _)| k)
            .collect();
        let pick = |m: &DMatrix<S>| DMatrix::from_fn(m.nrows(), kept.len(), |i, j| m[(i, kept[j])]);
        ProjectionKernel::new(self.measure.clone(), pick(&self.phi), pick(&self.psi))
    }
}

/// One Bernoulli thinning of the contraction with spectral data `(λ, φ, ψ)`.
pub fn thin_contraction<S: Scalar, R: Rng + ?Sized>(
    measure: ReferenceMeasure<S>,
    lambdas: Vec<f64>,
    phi: DMatrix<S>,
    psi: DMatrix<S>,
    rng: &mut R,
) -> Result<ProjectionKernel<S>> {
    Contraction::new(measure, lambdas, phi, psi)?.thin(rng)
}
