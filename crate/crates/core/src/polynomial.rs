//! Polynomial fields R^m -> R_{0,m} with exact symbolic differentiation.
//!
//! A field is a finite sum x |-> sum_j x^j c_j with multivector coefficients
//! c_j. Over an exact scalar (e.g. rationals) these provide the symbolic
//! oracle for the iterated Dirac operator; over floats they generate the
//! smooth test data used throughout the operator suites.

use std::collections::BTreeMap;

use std::ops::Neg;

use crate::clifford::{Multivector, Vector};
use crate::multiindex::{DiracExpansion, MultiIndex};
use crate::scalar::Scalar;

/// Exact conversion of a small non-negative integer into any scalar ring.
pub fn scalar_from_u64<T: Scalar>(n: u64) -> T {
    let mut acc = T::zero();
    let mut bit = T::one();
    let mut rest = n;
    while rest != 0 {
        if rest & 1 == 1 {
            acc = acc + bit.clone();
        }
        bit = bit.clone() + bit;
        rest >>= 1;
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyField<T> {
    dim: usize,
    terms: BTreeMap<MultiIndex, Multivector<T>>,
}

impl<T: Scalar> PolyField<T> {
    pub fn zero(m: usize) -> Self {
        Self { dim: m, terms: BTreeMap::new() }
    }

    /// The constant field with value `c`.
    pub fn constant(c: Multivector<T>) -> Self {
        let m = c.dim();
        let mut field = Self::zero(m);
        field.add_term(MultiIndex::zeros(m), c);
        field
    }

    /// The scalar coordinate monomial x^j.
    pub fn monomial(m: usize, j: MultiIndex) -> Self {
        let mut field = Self::zero(m);
        field.add_term(j, Multivector::scalar(m, T::one()));
        field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Multivector<T>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, _)| j.order())
            .max()
            .unwrap_or(0)
    }

    /// Accumulate `coeff` onto the monomial x^j.
    pub fn add_term(&mut self, j: MultiIndex, coeff: Multivector<T>) {
        assert_eq!(j.dim(), self.dim);
        assert_eq!(coeff.dim(), self.dim);
        match self.terms.get_mut(&j) {
            Some(slot) => *slot += &coeff,
            None => {
                self.terms.insert(j, coeff);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (j, c) in &other.terms {
            out.add_term(j.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(j, c)| (j.clone(), c.scale(s.clone())))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    /// Product with monomials multiplied commutatively and coefficients via
    /// the geometric product, self's coefficients on the left.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for (ja, ca) in &self.terms {
            for (jb, cb) in &other.terms {
                out.add_term(ja.add(jb), ca.geo(cb));
            }
        }
        out
    }

    /// Left multiplication by a constant multivector.
    pub fn left_mul(&self, a: &Multivector<T>) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(j, c)| (j.clone(), a.geo(c)))
                .collect(),
        }
    }

    /// Exact partial derivative d/dx_i.
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.dim);
        let mut out = Self::zero(self.dim);
        for (j, c) in &self.terms {
            if let Some(lower) = j.decremented(i) {
                let power = scalar_from_u64::<T>(j.get(i) as u64);
                out.add_term(lower, c.scale(power));
            }
        }
        out
    }

    /// Exact iterated partial derivative d^j.
    pub fn deriv(&self, j: &MultiIndex) -> Self {
        assert_eq!(j.dim(), self.dim);
        let mut out = self.clone();
        for i in 0..self.dim {
            for _ in 0..j.get(i) {
                out = out.partial(i);
            }
        }
        out
    }

    /// One left application of the Dirac operator, D f = sum_i e_i d_i f.
    pub fn dirac(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for i in 0..self.dim {
            let ei = Multivector::generator(self.dim, i);
            for (j, c) in self.partial(i).terms {
                out.add_term(j, ei.geo(&c));
            }
        }
        out
    }

    /// s-fold left Dirac application, the brute-force oracle for closed-form
    /// expansions.
    pub fn dirac_n(&self, s: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..s {
            out = out.dirac();
        }
        out
    }

    pub fn eval(&self, x: &Vector<T>) -> Multivector<T> {
        assert_eq!(x.dim(), self.dim);
        let mut acc = Multivector::zero(self.dim);
        for (j, c) in &self.terms {
            acc += &c.scale(j.monomial(x));
        }
        acc
    }
}

/// Apply a closed-form D^s expansion to a polynomial field at a point:
/// c_s * sum_terms mult * e_(l) * (d^index f)(x), blades on the left.
pub fn apply_expansion<T: Scalar>(
    exp: &DiracExpansion,
    f: &PolyField<T>,
    x: &Vector<T>,
) -> Multivector<T> {
    let m = f.dim();
    let mut acc = Multivector::zero(m);
    for term in &exp.terms {
        let mut value = f.deriv(&term.index).eval(x);
        if let Some(i) = term.gen {
            value = Multivector::generator(m, i).geo(&value);
        }
        acc += &value.scale(scalar_from_u64::<T>(term.mult));
    }
    if exp.sign < 0 {
        acc = (&acc).neg();
    }
    acc
}
