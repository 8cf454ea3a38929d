//! Scalar abstractions.
//!
//! Sparse storage only needs ring arithmetic ([`Scalar`]), which lets the
//! incidence matrices live in exact integer arithmetic. Everything that takes
//! square roots or solves systems is written against [`Real`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign};

/// Ring-like element type stored in sparse matrices.
pub trait Scalar: Copy + Num + NumAssign + PartialOrd + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Copy + Num + NumAssign + PartialOrd + Debug + Send + Sync + 'static {}

/// Floating point type used by geometry, assembly and the solvers.
pub trait Real: Scalar + Float + FloatConst + FromPrimitive + Sum + Display + LowerExp {
    /// Converts an `f64` literal. Panics only for types that cannot represent
    /// ordinary finite constants, which no `Float` does.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: Scalar + Float + FloatConst + FromPrimitive + Sum + Display + LowerExp {}
