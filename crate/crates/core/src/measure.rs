//! Reference measures represented by finitely many weighted atoms.
//!
//! Continuous measures are discretized by Gaussian quadrature, so every
//! polynomial integral below the rule's exactness degree is computed exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{chebyshev_gauss_nodes, gauss_hermite};
use crate::scalar::{scale, Complex64, Scalar};

/// Default node count for quadrature discretizations.
pub const DEFAULT_NODES: usize = 1024;

/// Relative tolerance below which negative density values are clamped to 0.
pub const DEFAULT_NEGATIVITY_TOLERANCE: f64 = 1e-9;

/// Classical measures with a closed-form description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum NamedMeasure {
    /// `exp(-N x^2 / 2) dx` on the real line.
    ScaledHermite { n: usize },
    /// The arcsine (equilibrium) law of `[alpha, beta]`.
    ChebyshevArcsine { alpha: f64, beta: f64 },
    /// Uniform probability on the unit circle.
    UniformCircle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    DiscreteAtomic,
    GridDensity,
    NamedClassical(NamedMeasure),
}

/// A finite positive measure `Σ w_i δ_{x_i}`.
#[derive(Debug, Clone)]
pub struct ReferenceMeasure<S: Scalar> {
    kind: MeasureKind,
    points: Vec<S>,
    weights: Vec<f64>,
}

impl<S: Scalar> ReferenceMeasure<S> {
    /// Atomic measure from explicit atoms and positive weights.
    pub fn from_atoms(points: Vec<S>, weights: Vec<f64>) -> Result<Self> {
        Self::build(MeasureKind::DiscreteAtomic, points, weights)
    }

    /// Quadrature grid standing in for a density (weights are the
    /// quadrature weights times the density).
    pub fn grid(points: Vec<S>, weights: Vec<f64>) -> Result<Self> {
        Self::build(MeasureKind::GridDensity, points, weights)
    }

    fn build(kind: MeasureKind, points: Vec<S>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "weight {} at atom {i} is not strictly positive",
                weights[i]
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidMeasure(format!("atom {i} is not finite")));
        }
        let mut keys: Vec<(f64, f64)> = points
            .iter()
            .map(|p| {
                let c = p.to_complex();
                (c.re, c.im)
            })
            .collect();
        keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMeasure("atoms are not pairwise distinct".into()));
        }
        Ok(Self {
            kind,
            points,
            weights,
        })
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the atom equal to `x`, if any.
    pub fn atom_index(&self, x: S) -> Option<usize> {
        self.points.iter().position(|p| *p == x)
    }

    /// `Σ_i w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(S) -> S) -> Result<S> {
        let mut acc = S::zero();
        for (x, w) in self.points.iter().zip(&self.weights) {
            let v = f(*x);
            if !v.is_finite() {
                return Err(Error::Evaluation { point: x.render() });
            }
            acc += scale(v, *w);
        }
        Ok(acc)
    }

    /// `⟨f, g⟩ = Σ_i w_i f(x_i) conj(g(x_i))`.
    pub fn inner_product(&self, f: impl Fn(S) -> S, g: impl Fn(S) -> S) -> Result<S> {
        self.integrate(|x| f(x) * g(x).conjugate())
    }

    /// `∫ x^l dμ`.
    pub fn moment(&self, l: u32) -> S {
        let mut acc = S::zero();
        for (x, w) in self.points.iter().zip(&self.weights) {
            acc += scale(x.powi(l as i32), *w);
        }
        acc
    }

    /// Draw an atom index with probability `density_i w_i / Σ_j density_j w_j`.
    pub fn sample_categorical<R: Rng + ?Sized>(&self, density: &[f64], rng: &mut R) -> Result<usize> {
        if density.len() != self.len() {
            return Err(Error::Parameter(format!(
                "density has {} values for {} atoms",
                density.len(),
                self.len()
            )));
        }
        let masses = clamp_density(density, DEFAULT_NEGATIVITY_TOLERANCE)?;
        let masses: Vec<f64> = masses.iter().zip(&self.weights).map(|(d, w)| d * w).collect();
        draw_index(&masses, rng)
    }
}

/// Clamp tiny negative values to zero; values below `-tolerance * max`
/// are reported as a negativity error.
pub(crate) fn clamp_density(density: &[f64], tolerance: f64) -> Result<Vec<f64>> {
    let max = density.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    density
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if !d.is_finite() {
                Err(Error::NegativeDensity {
                    index: i,
                    value: d,
                    tolerance,
                })
            } else if d >= 0.0 {
                Ok(d)
            } else if d >= -tolerance * max {
                Ok(0.0)
            } else {
                Err(Error::NegativeDensity {
                    index: i,
                    value: d,
                    tolerance,
                })
            }
        })
        .collect()
}

/// Inverse-CDF draw from nonnegative masses.
pub(crate) fn draw_index<R: Rng + ?Sized>(masses: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateDensity);
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &m) in masses.iter().enumerate() {
        if m > 0.0 {
            acc += m;
            last = Some(i);
            if u < acc {
                return Ok(i);
            }
        }
    }
    last.ok_or(Error::DegenerateDensity)
}

impl ReferenceMeasure<f64> {
    /// Arcsine law of `[alpha, beta]` on `n_nodes` Chebyshev–Gauss nodes
    /// (exact for polynomials of degree ≤ 2·n_nodes - 1).
    pub fn equilibrium_measure(alpha: f64, beta: f64, n_nodes: usize) -> Result<Self> {
        if !(alpha < beta) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidInterval { alpha, beta });
        }
        if n_nodes < 2 {
            return Err(Error::Parameter("equilibrium measure needs at least 2 nodes".into()));
        }
        let mid = 0.5 * (alpha + beta);
        let half = 0.5 * (beta - alpha);
        let points = chebyshev_gauss_nodes(n_nodes)
            .into_iter()
            .map(|t| mid + half * t)
            .collect();
        let w = 1.0 / n_nodes as f64;
        Self::build(
            MeasureKind::NamedClassical(NamedMeasure::ChebyshevArcsine { alpha, beta }),
            points,
            vec![w; n_nodes],
        )
    }

    /// `exp(-n x^2 / 2) dx` discretized by an `n_nodes`-point Gauss–Hermite
    /// rule. Atoms whose weight underflows double precision are dropped.
    pub fn scaled_hermite(n: usize, n_nodes: usize) -> Result<Self> {
        if n == 0 || n_nodes < 2 {
            return Err(Error::Parameter("scaled Hermite measure needs N ≥ 1 and ≥ 2 nodes".into()));
        }
        let (t, log_w) = gauss_hermite(n_nodes)?;
        let c = (2.0 / n as f64).sqrt();
        let (points, weights): (Vec<f64>, Vec<f64>) = t
            .iter()
            .zip(&log_w)
            .map(|(t, lw)| (t * c, (lw + c.ln()).exp()))
            .filter(|(_, w)| *w >= f64::MIN_POSITIVE)
            .unzip();
        Self::build(
            MeasureKind::NamedClassical(NamedMeasure::ScaledHermite { n }),
            points,
            weights,
        )
    }

    /// The push-forward under `x ↦ x + c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::build(
            MeasureKind::DiscreteAtomic,
            self.points.iter().map(|x| x + c).collect(),
            self.weights.clone(),
        )
    }
}

impl ReferenceMeasure<Complex64> {
    /// Uniform probability measure on `n_nodes` equally spaced points of the
    /// unit circle (exact for trigonometric polynomials of degree < n_nodes).
    pub fn uniform_circle(n_nodes: usize) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::Parameter("uniform circle needs at least 2 nodes".into()));
        }
        let points = (0..n_nodes)
            .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n_nodes as f64))
            .collect();
        Self::build(
            MeasureKind::NamedClassical(NamedMeasure::UniformCircle),
            points,
            vec![1.0 / n_nodes as f64; n_nodes],
        )
    }
}
