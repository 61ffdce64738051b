//! Clifford-algebra Cauchy-type and singular integral operators for higher
//! order Lipschitz data on closed surfaces.

pub mod clifford;
pub mod error;
pub mod kernels;
pub mod multiindex;
pub mod operators;
pub mod polynomial;
pub mod rng;
pub mod scalar;
pub mod surface;
pub mod whitney;

pub use clifford::{Multivector, Vector};
pub use error::{Error, Result};
pub use kernels::KernelFamily;
pub use multiindex::MultiIndex;
pub use operators::OperatorContext;
pub use polynomial::PolyField;
pub use scalar::{Real, Scalar};
pub use surface::{Side, SurfaceMesh};
pub use whitney::{LipschitzData, WhitneyExtension};

/// Double-precision aliases, the default working types.
pub type Multivector64 = Multivector<f64>;
pub type Vector64 = Vector<f64>;
pub type KernelFamily64 = KernelFamily<f64>;
pub type PolyField64 = PolyField<f64>;

/// Single-precision aliases.
pub type Multivector32 = Multivector<f32>;
pub type Vector32 = Vector<f32>;
