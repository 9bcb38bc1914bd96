//! Scalar-field abstraction: all numerics are generic over `f64`
//! (real symmetric matrices) and `Complex<f64>` (Hermitian matrices).

use nalgebra::ComplexField;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Runtime tag naming the scalar field of a matrix ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

impl std::fmt::Display for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarField::Real => write!(f, "real"),
            ScalarField::Complex => write!(f, "complex"),
        }
    }
}

impl std::str::FromStr for ScalarField {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "real" => Ok(ScalarField::Real),
            "complex" => Ok(ScalarField::Complex),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown scalar field {other:?} (expected \"real\" or \"complex\")"
            ))),
        }
    }
}

/// Scalar types the toolkit works over.
///
/// `f64` and `Complex64` are the only implementors; the trait adds the
/// few conversions nalgebra's `ComplexField` does not expose directly
/// plus per-field numerical tolerances.
pub trait Field: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const FIELD: ScalarField;
    /// Relative tolerance for eigendecomposition identities on this field.
    const EIG_TOL: f64;

    fn from_re_im(re: f64, im: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;

    /// Standard normal draw on this field: `N(0,1)` for reals, and
    /// `(N(0,1) + i N(0,1))/sqrt(2)` for complex scalars (unit second
    /// moment in both cases). Real part is drawn first.
    fn sample_standard<R: rand::Rng>(rng: &mut R) -> Self;
}

impl Field for f64 {
    const FIELD: ScalarField = ScalarField::Real;
    const EIG_TOL: f64 = 1e-10;

    #[inline]
    fn from_re_im(re: f64, _im: f64) -> Self {
        re
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn sample_standard<R: rand::Rng>(rng: &mut R) -> Self {
        rng.sample(rand_distr::StandardNormal)
    }
}

impl Field for Complex64 {
    const FIELD: ScalarField = ScalarField::Complex;
    const EIG_TOL: f64 = 1e-9;

    #[inline]
    fn from_re_im(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn sample_standard<R: rand::Rng>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}
