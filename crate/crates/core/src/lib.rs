//! Polynomial ensembles: recurrence coefficients, exact sampling, moments,
//! characteristic polynomials, variances and large-N limits.

pub mod asymptotics;
pub mod charpoly;
pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod quadrature;
pub mod recurrence;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod variance;
pub mod verify;

pub use ensemble::{PolynomialEnsemble, ProjectionKernel};
pub use error::{Error, Result};
pub use measure::ReferenceMeasure;
pub use recurrence::RecurrenceTable;
pub use scalar::{Complex64, Scalar};
