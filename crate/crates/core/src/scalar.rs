//! Numeric traits shared by the model-building and simulation layers.
//!
//! Model construction (QUBO expansion, Ising substitution, brute-force
//! minimization) only needs field arithmetic, so it is generic over
//! [`Scalar`] and works with exact rationals as well as floats. The
//! simulator and optimizer need transcendental functions and are generic
//! over [`Real`].

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Coefficient type for QUBO and Ising models.
pub trait Scalar:
    Num
    + Signed
    + Copy
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion used when handing exact models to the float simulator.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("integer must be representable in the scalar type")
    }

    /// Whether the value can take part in finite arithmetic.
    fn is_finite_value(self) -> bool;

    /// Equality up to the scalar's natural tolerance (exact for rationals).
    fn near(self, other: Self) -> bool;
}

impl Scalar for f64 {
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }

    fn near(self, other: Self) -> bool {
        (self - other).abs() <= 1e-9 * (1.0 + self.abs().max(other.abs()))
    }
}

impl Scalar for f32 {
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }

    fn near(self, other: Self) -> bool {
        (self - other).abs() <= 1e-4 * (1.0 + self.abs().max(other.abs()))
    }
}

impl Scalar for Ratio<i64> {
    fn is_finite_value(self) -> bool {
        true
    }

    fn near(self, other: Self) -> bool {
        self == other
    }
}

/// Floating-point scalar for statevector simulation and parameter search.
pub trait Real: Scalar + Float {
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap_or_else(Self::nan)
    }
}

impl Real for f64 {}
impl Real for f32 {}
