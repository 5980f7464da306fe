//! Large-N limits of the mean empirical measure.
//!
//! When `⟨xP_k, Q_{k-j}⟩ → a_j(k/N)`, the l-th mean moment converges to a
//! sum over lattice steps weighted by `∫₀¹ Π a_j(s)^{k_j} ds`. For OP
//! ensembles the limit is the law of `2a(U)ξ + b(U)`, with U uniform on
//! [0, 1] and ξ arcsine distributed.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::legendre_256;
use crate::recurrence::RecurrenceTable;

/// Largest moment order accepted by [`banded_limit_moment`].
pub const MAX_LATTICE_ORDER: usize = 12;
/// Largest bandwidth accepted by [`banded_limit_moment`].
pub const MAX_LATTICE_BANDWIDTH: usize = 4;

/// A coefficient profile `s ↦ a(s)` on [0, 1].
#[derive(Clone)]
pub enum ProfileFn {
    Constant(f64),
    /// `coef · s^exponent`.
    Power { coef: f64, exponent: f64 },
    /// `Σ c_i s^i`.
    Polynomial(Vec<f64>),
    /// Piecewise-linear interpolation through `(s_i, v_i)`, constant outside.
    Table { s: Vec<f64>, v: Vec<f64> },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ProfileFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Power { coef, exponent } => write!(f, "Power({coef}·s^{exponent})"),
            Self::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            Self::Table { s, v } => write!(f, "Table({s:?}, {v:?})"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ProfileFn {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Power { coef, exponent } => coef * s.powf(*exponent),
            Self::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ci| acc * s + ci),
            Self::Table { s: xs, v } => {
                if s <= xs[0] {
                    return v[0];
                }
                let last = xs.len() - 1;
                if s >= xs[last] {
                    return v[last];
                }
                let i = xs.partition_point(|x| *x <= s) - 1;
                let t = (s - xs[i]) / (xs[i + 1] - xs[i]);
                v[i] + t * (v[i + 1] - v[i])
            }
            Self::Custom(f) => f(s),
        }
    }
}

/// JSON form of a [`ProfileFn`] (closures are not serializable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileFnJson {
    Constant(f64),
    Power { coef: f64, exponent: f64 },
    Polynomial(Vec<f64>),
    Table { s: Vec<f64>, v: Vec<f64> },
}

impl TryFrom<ProfileFnJson> for ProfileFn {
    type Error = Error;

    fn try_from(j: ProfileFnJson) -> Result<Self> {
        Ok(match j {
            ProfileFnJson::Constant(c) => Self::Constant(c),
            ProfileFnJson::Power { coef, exponent } => Self::Power { coef, exponent },
            ProfileFnJson::Polynomial(c) => Self::Polynomial(c),
            ProfileFnJson::Table { s, v } => {
                if s.is_empty() || s.len() != v.len() || s.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Config(
                        "profile table needs matching, nonempty, strictly increasing nodes".into(),
                    ));
                }
                Self::Table { s, v }
            }
        })
    }
}

/// Limiting coefficient profiles.
#[derive(Debug, Clone)]
pub enum CoefficientProfile {
    /// `a_k ≈ a(k/N)`, `b_k ≈ b(k/N)`.
    Op { a: ProfileFn, b: ProfileFn },
    /// `⟨xP_k, Q_{k-j}⟩ ≈ coeffs[j + 1](k/N)` for `-1 ≤ j ≤ q`.
    Banded { q: usize, coeffs: Vec<ProfileFn> },
}

impl CoefficientProfile {
    pub fn op(a: ProfileFn, b: ProfileFn) -> Self {
        Self::Op { a, b }
    }

    pub fn banded(q: usize, coeffs: Vec<ProfileFn>) -> Result<Self> {
        if coeffs.len() != q + 2 {
            return Err(Error::Parameter(format!(
                "bandwidth {q} needs {} profiles, got {}",
                q + 2,
                coeffs.len()
            )));
        }
        Ok(Self::Banded { q, coeffs })
    }

    /// Constant OP profile.
    pub fn constant(a: f64, b: f64) -> Self {
        Self::op(ProfileFn::Constant(a), ProfileFn::Constant(b))
    }

    /// The GUE profile `a(s) = sqrt(s)`, `b = 0`.
    pub fn semicircle() -> Self {
        Self::op(
            ProfileFn::Power {
                coef: 1.0,
                exponent: 0.5,
            },
            ProfileFn::Constant(0.0),
        )
    }

    pub fn bandwidth(&self) -> usize {
        match self {
            Self::Op { .. } => 1,
            Self::Banded { q, .. } => *q,
        }
    }

    /// Profiles `a_{-1}, …, a_q`.
    pub fn lattice_coefficients(&self) -> Vec<ProfileFn> {
        match self {
            Self::Op { a, b } => vec![a.clone(), b.clone(), a.clone()],
            Self::Banded { coeffs, .. } => coeffs.clone(),
        }
    }
}

/// JSON form: `{"a": …, "b": …}` or `{"q": …, "coeffs": […]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileJson {
    Op { a: ProfileFnJson, b: ProfileFnJson },
    Banded { q: usize, coeffs: Vec<ProfileFnJson> },
}

impl TryFrom<ProfileJson> for CoefficientProfile {
    type Error = Error;

    fn try_from(j: ProfileJson) -> Result<Self> {
        match j {
            ProfileJson::Op { a, b } => Ok(Self::op(a.try_into()?, b.try_into()?)),
            ProfileJson::Banded { q, coeffs } => Self::banded(
                q,
                coeffs.into_iter().map(ProfileFn::try_from).collect::<Result<_>>()?,
            ),
        }
    }
}

fn integrate_unit(f: impl Fn(f64) -> f64) -> Result<f64> {
    let (x, w) = legendre_256();
    let v: f64 = x.iter().zip(w).map(|(x, w)| w * f(*x)).sum();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation {
            point: "profile integral over [0, 1]".into(),
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Moments of the arcsine law on [-1, 1]: `C(2m, m)/4^m` for `l = 2m`, else 0.
pub fn arcsine_moment(l: usize) -> f64 {
    if l % 2 == 1 {
        0.0
    } else {
        binomial(l, l / 2) / 4f64.powi(l as i32 / 2)
    }
}

/// l-th moment of `2a(U)ξ + b(U)`.
pub fn mu_ab_moment(a: &ProfileFn, b: &ProfileFn, l: usize) -> Result<f64> {
    if l == 0 {
        return Ok(1.0);
    }
    let mut acc = 0.0;
    for m in 0..=l / 2 {
        let c = binomial(l, 2 * m) * binomial(2 * m, m);
        acc += c * integrate_unit(|s| a.eval(s).powi(2 * m as i32) * b.eval(s).powi((l - 2 * m) as i32))?;
    }
    Ok(acc)
}

/// One draw of `2a(U)cos(πV) + b(U)`.
pub fn mu_ab_sample<R: Rng + ?Sized>(a: &ProfileFn, b: &ProfileFn, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    2.0 * a.eval(u) * (PI * v).cos() + b.eval(u)
}

type Compositions = Arc<Vec<(Vec<usize>, f64)>>;

/// Compositions `(k_{-1}, …, k_q)` with `Σ k_j = l`, `Σ j k_j = 0`, and
/// their multinomial weights.
pub fn lattice_compositions(l: usize, q: usize) -> Result<Compositions> {
    if l > MAX_LATTICE_ORDER || q > MAX_LATTICE_BANDWIDTH {
        return Err(Error::CombinatorialLimit {
            l,
            q,
            max_l: MAX_LATTICE_ORDER,
            max_q: MAX_LATTICE_BANDWIDTH,
        });
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Compositions>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("composition cache").get(&(l, q)) {
        return Ok(hit.clone());
    }
    let mut out = Vec::new();
    let mut k = vec![0usize; q + 2];
    fill(0, l, 0, &mut k, &mut out);
    let factorial = |n: usize| (1..=n).fold(1.0, |acc, i| acc * i as f64);
    let weighted: Vec<(Vec<usize>, f64)> = out
        .into_iter()
        .map(|k: Vec<usize>| {
            let w = factorial(l) / k.iter().map(|x| factorial(*x)).product::<f64>();
            (k, w)
        })
        .collect();
    let shared = Arc::new(weighted);
    cache.lock().expect("composition cache").insert((l, q), shared.clone());
    Ok(shared)
}

// depth-first over slots; slot i stands for step j = i - 1
fn fill(slot: usize, left: usize, drift: i64, k: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let last = k.len() - 1;
    if slot == last {
        let j = last as i64 - 1;
        k[slot] = left;
        if drift + j * left as i64 == 0 {
            out.push(k.clone());
        }
        return;
    }
    for c in 0..=left {
        k[slot] = c;
        fill(slot + 1, left - c, drift + (slot as i64 - 1) * c as i64, k, out);
    }
    k[slot] = 0;
}

/// `Σ_{k ∈ D_l^{(q)}} multinomial(l; k) ∫₀¹ Π_j a_j(s)^{k_j} ds`.
pub fn banded_limit_moment(p: &CoefficientProfile, l: usize) -> Result<f64> {
    if l == 0 {
        return Ok(1.0);
    }
    let coeffs = p.lattice_coefficients();
    let mut acc = 0.0;
    for (k, w) in lattice_compositions(l, p.bandwidth())?.iter() {
        acc += w * integrate_unit(|s| {
            coeffs
                .iter()
                .zip(k)
                .map(|(a, e)| if *e == 0 { 1.0 } else { a.eval(s).powi(*e as i32) })
                .product()
        })?;
    }
    Ok(acc)
}

/// Limit moment of a profile (the `2a(U)ξ + b(U)` formula for OP profiles).
pub fn limit_moment(p: &CoefficientProfile, l: usize) -> Result<f64> {
    match p {
        CoefficientProfile::Op { a, b } => mu_ab_moment(a, b, l),
        CoefficientProfile::Banded { .. } => banded_limit_moment(p, l),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub l: usize,
    pub finite: f64,
    pub limit: f64,
    pub gap: f64,
}

/// Finite-N mean moments against the limit moments for `l ≤ lmax`.
pub fn limit_report(t: &RecurrenceTable, p: &CoefficientProfile, lmax: usize) -> Result<Vec<LimitRow>> {
    (0..=lmax)
        .map(|l| {
            let finite = t.mean_moment(l)?;
            let limit = limit_moment(p, l)?;
            Ok(LimitRow {
                l,
                finite,
                limit,
                gap: (finite - limit).abs(),
            })
        })
        .collect()
}
