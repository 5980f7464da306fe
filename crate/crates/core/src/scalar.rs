//! Real or complex field used for atom locations and function values.

use nalgebra::ComplexField;
pub use num_complex::Complex64;

/// Field scalar: `f64` for measures on the line, [`Complex64`] for measures
/// in the plane (e.g. the unit circle).
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync {
    fn to_complex(self) -> Complex64;

    /// Human-readable rendering used in CSV output and error messages.
    fn render(self) -> String;
}

impl Scalar for f64 {
    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn render(self) -> String {
        format!("{self}")
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn to_complex(self) -> Complex64 {
        self
    }

    fn render(self) -> String {
        if self.im < 0.0 || (self.im == 0.0 && self.im.is_sign_negative()) {
            format!("{}-{}i", self.re, -self.im)
        } else {
            format!("{}+{}i", self.re, self.im)
        }
    }
}

/// `x * w` for a real `w`.
#[inline]
pub(crate) fn scale<S: Scalar>(x: S, w: f64) -> S {
    x * S::from_real(w)
}
