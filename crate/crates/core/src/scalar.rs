//! Scalar abstractions: an exact ring for symbolic work and a floating-point
//! real for the numerical operators.

use num_traits::{Float, FloatConst, FromPrimitive, Num};

/// Commutative ring scalar. Satisfied by `f32`/`f64` and by exact types such
/// as `num_rational::BigRational`, which the symbolic differentiation oracle
/// relies on.
pub trait Scalar:
    Num + Clone + PartialEq + std::ops::Neg<Output = Self> + std::fmt::Debug + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Num
        + Clone
        + PartialEq
        + std::ops::Neg<Output = T>
        + std::fmt::Debug
        + Send
        + Sync
        + 'static
{
}

/// Floating-point scalar for kernels, quadrature and the integral operators.
pub trait Real:
    Scalar + Float + FloatConst + FromPrimitive + std::iter::Sum + std::fmt::Display + std::fmt::LowerExp
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
