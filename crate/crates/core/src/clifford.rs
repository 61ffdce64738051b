//! Arithmetic in the real Clifford algebra R_{0,m}, 2 <= m <= 4.
//!
//! Basis blades are indexed by bitmasks over the generators: bit i of the
//! index selects e_{i+1}, the empty mask is the scalar unit. The generator
//! rules are e_i^2 = -1 and e_i e_j = -e_j e_i for i != j.

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use smallvec::{smallvec, SmallVec};

/// Admissible algebra dimensions.
pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 4;

pub(crate) fn check_dim(m: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&m) {
        return Err(Error::UnsupportedDimension(m));
    }
    Ok(())
}

/// Sign and blade index of the product e_A e_B of two basis blades.
///
/// The sign counts the transpositions needed to interleave the generator
/// sequences plus one factor -1 per shared generator (e_i^2 = -1).
pub fn blade_product(a: usize, b: usize) -> (i8, usize) {
    let mut swaps = 0u32;
    let mut rest = a >> 1;
    while rest != 0 {
        swaps += (rest & b).count_ones();
        rest >>= 1;
    }
    let squares = (a & b).count_ones();
    let sign = if (swaps + squares) % 2 == 0 { 1 } else { -1 };
    (sign, a ^ b)
}

/// A point or normal vector in R^m.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<T> {
    comps: SmallVec<[T; 4]>,
}

impl<T: Scalar> Vector<T> {
    pub fn new(comps: impl Into<SmallVec<[T; 4]>>) -> Self {
        Self { comps: comps.into() }
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            comps: smallvec![T::zero(); m],
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[T] {
        &self.comps
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.clone() + b.clone())
                .collect::<SmallVec<[T; 4]>>(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.clone() - b.clone())
                .collect::<SmallVec<[T; 4]>>(),
        )
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(
            self.comps
                .iter()
                .map(|a| a.clone() * s.clone())
                .collect::<SmallVec<[T; 4]>>(),
        )
    }
}

impl<T: Real> Vector<T> {
    /// Euclidean length.
    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Self) -> T {
        self.sub(other).norm()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn unit(&self) -> Option<Self> {
        let n = self.norm();
        if n == T::zero() {
            None
        } else {
            Some(self.scale(T::one() / n))
        }
    }
}

impl<T: Scalar> std::ops::Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.comps[i]
    }
}

/// Element of R_{0,m} with 2^m blade coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector<T> {
    dim: usize,
    coeffs: SmallVec<[T; 16]>,
}

impl<T: Scalar> Multivector<T> {
    pub fn zero(m: usize) -> Self {
        Self {
            dim: m,
            coeffs: smallvec![T::zero(); 1 << m],
        }
    }

    pub fn scalar(m: usize, value: T) -> Self {
        let mut mv = Self::zero(m);
        mv.coeffs[0] = value;
        mv
    }

    /// Basis blade e_A for a bitmask A.
    pub fn basis(m: usize, mask: usize) -> Self {
        assert!(mask < (1 << m), "blade mask {mask} out of range for m={m}");
        let mut mv = Self::zero(m);
        mv.coeffs[mask] = T::one();
        mv
    }

    /// Generator e_{i+1} (zero-based index).
    pub fn generator(m: usize, i: usize) -> Self {
        assert!(i < m);
        Self::basis(m, 1 << i)
    }

    /// Embedding of x in R^m as x_1 e_1 + ... + x_m e_m.
    pub fn embed(x: &Vector<T>) -> Self {
        let m = x.dim();
        let mut mv = Self::zero(m);
        for i in 0..m {
            mv.coeffs[1 << i] = x[i].clone();
        }
        mv
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> &T {
        &self.coeffs[mask]
    }

    pub fn coeff_mut(&mut self, mask: usize) -> &mut T {
        &mut self.coeffs[mask]
    }

    pub fn scalar_part(&self) -> T {
        self.coeffs[0].clone()
    }

    /// Grade-1 part read back as a vector.
    pub fn vector_part(&self) -> Vector<T> {
        Vector::new(
            (0..self.dim)
                .map(|i| self.coeffs[1 << i].clone())
                .collect::<SmallVec<[T; 4]>>(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.clone() * s.clone())
                .collect(),
        }
    }

    /// Geometric product, with the dimension check surfaced as an error.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(self.geo(other))
    }

    /// Geometric product. Panics on dimension mismatch; see [`checked_mul`]
    /// for the fallible variant.
    ///
    /// [`checked_mul`]: Multivector::checked_mul
    pub fn geo(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "algebra dimension mismatch");
        let mut out = Self::zero(self.dim);
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let (sign, mask) = blade_product(a, b);
                let term = ca.clone() * cb.clone();
                let slot = &mut out.coeffs[mask];
                *slot = if sign > 0 {
                    slot.clone() + term
                } else {
                    slot.clone() - term
                };
            }
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(self + other)
    }

    pub fn norm_sq(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, c| acc + c.clone() * c.clone())
    }
}

impl<T: Real> Multivector<T> {
    /// Coefficient norm, ||a||^2 = sum_A |a_A|^2.
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }
}

impl<T: Scalar> std::ops::Add for &Multivector<T> {
    type Output = Multivector<T>;
    fn add(self, other: Self) -> Multivector<T> {
        assert_eq!(self.dim, other.dim, "algebra dimension mismatch");
        Multivector {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> std::ops::Sub for &Multivector<T> {
    type Output = Multivector<T>;
    fn sub(self, other: Self) -> Multivector<T> {
        assert_eq!(self.dim, other.dim, "algebra dimension mismatch");
        Multivector {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> std::ops::Neg for &Multivector<T> {
    type Output = Multivector<T>;
    fn neg(self) -> Multivector<T> {
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|a| -a.clone()).collect(),
        }
    }
}

impl<T: Scalar> std::ops::Mul for &Multivector<T> {
    type Output = Multivector<T>;
    fn mul(self, other: Self) -> Multivector<T> {
        self.geo(other)
    }
}

impl<T: Scalar> std::ops::AddAssign<&Multivector<T>> for Multivector<T> {
    fn add_assign(&mut self, other: &Multivector<T>) {
        assert_eq!(self.dim, other.dim, "algebra dimension mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = a.clone() + b.clone();
        }
    }
}

impl<T: Scalar> std::ops::SubAssign<&Multivector<T>> for Multivector<T> {
    fn sub_assign(&mut self, other: &Multivector<T>) {
        assert_eq!(self.dim, other.dim, "algebra dimension mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = a.clone() - b.clone();
        }
    }
}
