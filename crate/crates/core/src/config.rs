//! JSON descriptions of measures, tables and ensembles.
//!
//! ```json
//! {"classical": "gue", "N": 100, "nodes": 400, "pad": 8}
//! {"measure": {"kind": "atoms", "points": [-1, 0, 2], "weights": [0.2, 0.5, 0.3]}, "N": 2}
//! {"measure": {"kind": "named", "name": "chebyshev-arcsine", "alpha": -1, "beta": 1}, "N": 4,
//!  "table": {"form": "op", "a": [...], "b": [...]}}
//! {"base": {"classical": "chebyshev", "N": 2, "nodes": 16}, "tilt": [[0.05], [0, 0.05]]}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ensemble::PolynomialEnsemble;
use crate::error::{Error, Result};
use crate::measure::{ReferenceMeasure, DEFAULT_NODES};
use crate::recurrence::{RecurrenceTable, TableJson};
use crate::scalar::Complex64;

/// Padding used when a config does not set one.
pub const DEFAULT_PAD: usize = 8;

/// Classical ensemble names accepted by `{"classical": …}` and the CLI.
pub const CLASSICAL_NAMES: [&str; 3] = ["gue", "chebyshev", "uniform-circle"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    pub classical: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureConfig {
    Named {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<usize>,
    },
    Atoms { points: Vec<f64>, weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitConfig {
    pub measure: MeasureConfig,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltConfig {
    pub base: Box<EnsembleConfig>,
    pub tilt: Vec<Vec<f64>>,
    #[serde(default = "default_true")]
    pub validate: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum EnsembleConfig {
    Classical(ClassicalConfig),
    Explicit(ExplicitConfig),
    Tilted(TiltConfig),
}

impl<'de> Deserialize<'de> for EnsembleConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Self::from_value(v).map_err(serde::de::Error::custom)
    }
}

/// A built ensemble on the line or in the complex plane.
#[derive(Debug, Clone)]
pub enum AnyEnsemble {
    Real(PolynomialEnsemble<f64>),
    Complex(PolynomialEnsemble<Complex64>),
}

impl AnyEnsemble {
    pub fn table(&self) -> &RecurrenceTable {
        match self {
            Self::Real(e) => e.table(),
            Self::Complex(e) => e.table(),
        }
    }

    pub fn n(&self) -> usize {
        self.table().n()
    }

    pub fn is_hermitian(&self) -> bool {
        match self {
            Self::Real(e) => e.is_hermitian(),
            Self::Complex(e) => e.is_hermitian(),
        }
    }
}

impl EnsembleConfig {
    /// Dispatch on the distinguishing key so that errors name the right schema.
    pub fn from_value(v: Value) -> std::result::Result<Self, String> {
        let obj = v.as_object().ok_or("ensemble config must be a JSON object")?;
        let parse_err = |e: serde_json::Error| e.to_string();
        if obj.contains_key("classical") {
            serde_json::from_value(v).map(Self::Classical).map_err(parse_err)
        } else if obj.contains_key("base") {
            serde_json::from_value(v).map(Self::Tilted).map_err(parse_err)
        } else if obj.contains_key("measure") {
            serde_json::from_value(v).map(Self::Explicit).map_err(parse_err)
        } else {
            Err("ensemble config needs one of the keys \"classical\", \"measure\" or \"base\"".into())
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        Self::from_value(v).map_err(Error::Config)
    }

    /// Classical ensemble by name.
    pub fn classical(name: &str, n: usize) -> Result<Self> {
        if !CLASSICAL_NAMES.contains(&name) {
            return Err(Error::UnknownName(name.to_string()));
        }
        Ok(Self::Classical(ClassicalConfig {
            classical: name.to_string(),
            n,
            nodes: None,
            pad: None,
        }))
    }

    /// Replace the ensemble size.
    pub fn set_n(&mut self, n: usize) {
        match self {
            Self::Classical(c) => c.n = n,
            Self::Explicit(c) => c.n = Some(n),
            Self::Tilted(c) => c.base.set_n(n),
        }
    }

    /// Raise the padding to at least `pad` where the config controls it.
    pub fn ensure_pad(&mut self, pad: usize) {
        match self {
            Self::Classical(c) => c.pad = Some(c.pad.unwrap_or(DEFAULT_PAD).max(pad)),
            Self::Explicit(c) => c.pad = Some(c.pad.unwrap_or(DEFAULT_PAD).max(pad)),
            Self::Tilted(c) => c.base.ensure_pad(pad),
        }
    }

    /// The recurrence table alone (no measure is discretized for classical names).
    pub fn table(&self) -> Result<RecurrenceTable> {
        match self {
            Self::Classical(c) => {
                let pad = c.pad.unwrap_or(DEFAULT_PAD);
                match c.classical.as_str() {
                    "uniform-circle" => RecurrenceTable::unit_circle(c.n, pad),
                    name => RecurrenceTable::classical(name, c.n, pad),
                }
            }
            Self::Explicit(c) => match &c.table {
                Some(t) => RecurrenceTable::from_json(t, c.n),
                None => Ok(self.build()?.table().clone()),
            },
            Self::Tilted(c) => c.base.table(),
        }
    }

    /// Build the full ensemble.
    pub fn build(&self) -> Result<AnyEnsemble> {
        match self {
            Self::Classical(c) => {
                let pad = c.pad.unwrap_or(DEFAULT_PAD);
                let nodes = c.nodes.unwrap_or_else(|| default_nodes(c.n, pad));
                match c.classical.as_str() {
                    "gue" => Ok(AnyEnsemble::Real(PolynomialEnsemble::gue(c.n, nodes, pad)?)),
                    "chebyshev" => Ok(AnyEnsemble::Real(PolynomialEnsemble::chebyshev(c.n, nodes, pad)?)),
                    "uniform-circle" => Ok(AnyEnsemble::Complex(PolynomialEnsemble::uniform_circle(c.n, nodes, pad)?)),
                    other => Err(Error::UnknownName(other.to_string())),
                }
            }
            Self::Explicit(c) => {
                let pad = c.pad.unwrap_or(DEFAULT_PAD);
                let table_n = || {
                    c.n.ok_or_else(|| Error::Config("explicit ensemble needs \"N\"".into()))
                };
                match build_measure(&c.measure, c.n)? {
                    AnyMeasure::Real(m) => {
                        let table = match &c.table {
                            Some(t) => RecurrenceTable::from_json(t, c.n)?,
                            None => RecurrenceTable::from_measure(&m, table_n()?, pad)?,
                        };
                        Ok(AnyEnsemble::Real(PolynomialEnsemble::new(m, table)?))
                    }
                    AnyMeasure::Complex(m) => {
                        let table = match &c.table {
                            Some(t) => RecurrenceTable::from_json(t, c.n)?,
                            None => RecurrenceTable::unit_circle(table_n()?, pad)?,
                        };
                        Ok(AnyEnsemble::Complex(PolynomialEnsemble::new(m, table)?))
                    }
                }
            }
            Self::Tilted(c) => match c.base.build()? {
                AnyEnsemble::Real(e) => Ok(AnyEnsemble::Real(e.tilt_nonorthogonal(&c.tilt, c.validate, c.seed)?)),
                AnyEnsemble::Complex(e) => Ok(AnyEnsemble::Complex(e.tilt_nonorthogonal(&c.tilt, c.validate, c.seed)?)),
            },
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// Default atom count for classical ensembles: enough for exact
/// orthonormality of every tabulated polynomial.
pub fn default_nodes(n: usize, pad: usize) -> usize {
    (4 * n).max(2 * (n + pad + 1)).max(64)
}

pub enum AnyMeasure {
    Real(ReferenceMeasure<f64>),
    Complex(ReferenceMeasure<Complex64>),
}

pub fn build_measure(m: &MeasureConfig, n: Option<usize>) -> Result<AnyMeasure> {
    match m {
        MeasureConfig::Atoms { points, weights } => Ok(AnyMeasure::Real(ReferenceMeasure::from_atoms(
            points.clone(),
            weights.clone(),
        )?)),
        MeasureConfig::Named {
            name,
            alpha,
            beta,
            n: measure_n,
            nodes,
        } => {
            let nodes = nodes.unwrap_or(DEFAULT_NODES);
            match name.as_str() {
                "chebyshev-arcsine" => Ok(AnyMeasure::Real(ReferenceMeasure::equilibrium_measure(
                    alpha.unwrap_or(-1.0),
                    beta.unwrap_or(1.0),
                    nodes,
                )?)),
                "scaled-hermite" => {
                    let size = measure_n.or(n).ok_or_else(|| {
                        Error::Config("scaled-hermite measure needs \"N\"".into())
                    })?;
                    Ok(AnyMeasure::Real(ReferenceMeasure::scaled_hermite(size, nodes)?))
                }
                "uniform-circle" => Ok(AnyMeasure::Complex(ReferenceMeasure::uniform_circle(nodes)?)),
                other => Err(Error::UnknownName(other.to_string())),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        let c = EnsembleConfig::from_json_str(r#"{"classical":"gue","N":10}"#).unwrap();
        assert_eq!(c.build().unwrap().n(), 10);
        let c = EnsembleConfig::from_json_str(
            r#"{"measure":{"kind":"atoms","points":[-1,-0.3,0.4,1.2],"weights":[0.2,0.3,0.1,0.4]},"N":2,"pad":1}"#,
        )
        .unwrap();
        assert!(c.build().unwrap().is_hermitian());
        let c = EnsembleConfig::from_json_str(
            r#"{"base":{"classical":"chebyshev","N":2,"nodes":16,"pad":4},"tilt":[[0.05],[0,0.05]]}"#,
        )
        .unwrap();
        assert!(!c.build().unwrap().is_hermitian());
        let c = EnsembleConfig::from_json_str(r#"{"classical":"uniform-circle","N":3}"#).unwrap();
        assert!(matches!(c.build().unwrap(), AnyEnsemble::Complex(_)));
    }

    #[test]
    fn schema_errors_are_config_errors() {
        assert!(matches!(EnsembleConfig::from_json_str(r#"{"N":3}"#), Err(Error::Config(_))));
        assert!(matches!(
            EnsembleConfig::from_json_str(r#"{"classical":"gue","N":3,"extra":1}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(EnsembleConfig::classical("laguerre", 3), Err(Error::UnknownName(_))));
    }

    #[test]
    fn roundtrip_through_value() {
        let c = EnsembleConfig::from_json_str(
            r#"{"measure":{"kind":"named","name":"chebyshev-arcsine","alpha":-1,"beta":1,"nodes":64},"N":4}"#,
        )
        .unwrap();
        let back: EnsembleConfig = serde_json::from_value(c.to_value()).unwrap();
        assert_eq!(c, back);
        let t = c.table().unwrap();
        assert!((t.op_coefficients().unwrap().0[0] - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
