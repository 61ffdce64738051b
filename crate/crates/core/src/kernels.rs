//! Higher-order Cauchy kernels E_u and their partial derivatives.
//!
//! Each kernel has the closed radial form E_u(x) = (a_u + b_u x_hat) |x|^{u+1-m}
//! with x_hat = x/|x| embedded as a Clifford vector. The coefficient pairs are
//! fixed by the recursion D E_{u+1} = E_u, solved symbolically at build time:
//! substituting the ansatz yields
//!
//!   a_{u+1} (u+2-m) = b_u        and        b_{u+1} (u+1) = -a_u,
//!
//! with a_0 = 0, b_0 = -1/sigma_m (E_0 is the Cauchy kernel). The parity
//! alternation (a_u = 0 for even u, b_u = 0 for odd u) follows inductively.
//! When m is even the exponent u+1-m reaches the logarithmic branch at
//! u+1 = m, where the ansatz has no solution; that order is rejected.

use crate::clifford::{check_dim, Multivector, Vector};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Radius below which kernel evaluation is refused as singular.
pub const SINGULAR_RADIUS: f64 = 1e-14;

/// Area of the unit sphere S^{m-1} in R^m, sigma_m = 2 pi^{m/2} / Gamma(m/2).
pub fn sphere_area<T: Real>(m: usize) -> T {
    let pi = T::PI();
    match m {
        2 => T::lit(2.0) * pi,
        3 => T::lit(4.0) * pi,
        4 => T::lit(2.0) * pi * pi,
        _ => panic!("sphere_area: unsupported dimension m={m}"),
    }
}

/// The kernels E_0..E_K for a fixed dimension.
#[derive(Debug, Clone)]
pub struct KernelFamily<T> {
    dim: usize,
    max_order: usize,
    /// (a_u, b_u) per order u.
    coeffs: Vec<(T, T)>,
}

impl<T: Real> KernelFamily<T> {
    /// Build the family by running the coefficient recursion.
    pub fn build(m: usize, max_order: usize) -> Result<Self> {
        check_dim(m)?;
        if m % 2 == 0 && max_order + 1 >= m {
            return Err(Error::UnsupportedOrder { m, order: max_order });
        }
        let mut coeffs = Vec::with_capacity(max_order + 1);
        coeffs.push((T::zero(), -T::one() / sphere_area::<T>(m)));
        for u in 0..max_order {
            let (a_u, b_u) = coeffs[u].clone();
            let denom = T::from_usize(u + 2).unwrap() - T::from_usize(m).unwrap();
            let a_next = if denom == T::zero() {
                // only reachable when b_u = 0 (odd u, m odd); any a solves
                // the vector equation and parity picks 0
                debug_assert!(b_u == T::zero());
                T::zero()
            } else {
                b_u / denom
            };
            let b_next = -a_u / T::from_usize(u + 1).unwrap();
            coeffs.push((a_next, b_next));
        }
        Ok(Self { dim: m, max_order, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// The raw coefficient pair (a_u, b_u).
    pub fn coeff(&self, u: usize) -> (T, T) {
        self.coeffs[u].clone()
    }

    /// E_u(x) in closed form.
    pub fn eval(&self, u: usize, x: &Vector<T>) -> Result<Multivector<T>> {
        assert!(u <= self.max_order);
        let r = x.norm();
        if r < T::lit(SINGULAR_RADIUS) {
            return Err(Error::SingularPoint(SINGULAR_RADIUS));
        }
        let (a, b) = self.coeffs[u].clone();
        let p = u as i32 + 1 - self.dim as i32;
        let mut out = Multivector::scalar(self.dim, a * r.powi(p));
        out += &Multivector::embed(x).scale(b * r.powi(p - 1));
        Ok(out)
    }

    /// Analytic partial derivative E_u^(j)(x) = d^j E_u(x).
    pub fn eval_deriv(&self, u: usize, j: &MultiIndex, x: &Vector<T>) -> Result<Multivector<T>> {
        self.derivative(u, j).eval(x)
    }

    /// Build the closed-form evaluator for E_u^(j).
    pub fn derivative(&self, u: usize, j: &MultiIndex) -> KernelDerivative<T> {
        assert!(u <= self.max_order);
        assert_eq!(j.dim(), self.dim);
        let (a, b) = self.coeffs[u].clone();
        let p = u as i32 + 1 - self.dim as i32;
        let mut terms = Vec::new();
        if a != T::zero() {
            terms.push(RadialTerm {
                coeff: a,
                mask: 0,
                beta: MultiIndex::zeros(self.dim),
                r_pow: p,
            });
        }
        if b != T::zero() {
            for i in 0..self.dim {
                terms.push(RadialTerm {
                    coeff: b.clone(),
                    mask: 1 << i,
                    beta: MultiIndex::unit(self.dim, i),
                    r_pow: p - 1,
                });
            }
        }
        let mut deriv = KernelDerivative {
            dim: self.dim,
            order: u,
            index: MultiIndex::zeros(self.dim),
            terms,
        };
        for i in 0..self.dim {
            for _ in 0..j.get(i) {
                deriv = deriv.partial(i);
            }
        }
        deriv.index = j.clone();
        deriv
    }

    /// Finite-difference Dirac application, the oracle for the recursion.
    pub fn dirac_fd(&self, u: usize, x: &Vector<T>, h: T) -> Result<Multivector<T>> {
        let m = self.dim;
        let mut acc = Multivector::zero(m);
        for i in 0..m {
            let mut xp = x.comps().to_vec();
            let mut xm = x.comps().to_vec();
            xp[i] = xp[i] + h;
            xm[i] = xm[i] - h;
            let fp = self.eval(u, &Vector::new(xp))?;
            let fm = self.eval(u, &Vector::new(xm))?;
            let diff = (&fp - &fm).scale(T::lit(0.5) / h);
            acc += &Multivector::generator(m, i).geo(&diff);
        }
        Ok(acc)
    }

    /// Check D E_{u+1} = E_u (and monogenicity of E_0) by central differences
    /// at pseudo-random points with 0.5 <= |x| <= 2.
    pub fn validate_recursion(&self, samples: usize, seed: u64) -> RecursionReport<T> {
        let h = T::lit(1e-5);
        let mut rng = SplitMix64::new(seed);
        let points: Vec<Vector<T>> = (0..samples)
            .map(|_| loop {
                let comps: Vec<T> = (0..self.dim)
                    .map(|_| T::lit(rng.next_f64() * 4.0 - 2.0))
                    .collect();
                let x = Vector::new(comps);
                let r = x.norm();
                if r >= T::lit(0.5) && r <= T::lit(2.0) {
                    break x;
                }
            })
            .collect();
        let monogenicity = points
            .iter()
            .map(|x| {
                let d = self.dirac_fd(0, x, h).expect("off-origin point");
                // absolute residual scaled by the local kernel magnitude
                d.norm() / self.eval(0, x).unwrap().norm()
            })
            .fold(T::zero(), T::max);
        let residuals = (0..self.max_order)
            .map(|u| {
                let worst = points
                    .iter()
                    .map(|x| {
                        let lhs = self.dirac_fd(u + 1, x, h).expect("off-origin point");
                        let rhs = self.eval(u, x).unwrap();
                        (&lhs - &rhs).norm() / rhs.norm()
                    })
                    .fold(T::zero(), T::max);
                (u, worst)
            })
            .collect();
        RecursionReport { monogenicity, residuals }
    }
}

/// Max relative finite-difference residuals of the kernel recursion.
#[derive(Debug, Clone)]
pub struct RecursionReport<T> {
    /// max ||D E_0|| / ||E_0|| over the sample points.
    pub monogenicity: T,
    /// per order u: max ||D E_{u+1} - E_u|| / ||E_u||.
    pub residuals: Vec<(usize, T)>,
}

impl<T: Real> RecursionReport<T> {
    pub fn max_residual(&self) -> T {
        self.residuals
            .iter()
            .map(|(_, r)| *r)
            .fold(T::zero(), T::max)
    }
}

/// One monomial-radial term c * x^beta * |x|^t * e_mask.
#[derive(Debug, Clone)]
struct RadialTerm<T> {
    coeff: T,
    mask: usize,
    beta: MultiIndex,
    r_pow: i32,
}

/// Closed-form evaluator for E_u^(j), a finite sum of monomial-radial terms.
/// The term family is closed under differentiation:
/// d_i (c x^beta r^t) = c beta_i x^{beta - e_i} r^t + c t x^{beta + e_i} r^{t-2}.
#[derive(Debug, Clone)]
pub struct KernelDerivative<T> {
    dim: usize,
    order: usize,
    index: MultiIndex,
    terms: Vec<RadialTerm<T>>,
}

impl<T: Real> KernelDerivative<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn index(&self) -> &MultiIndex {
        &self.index
    }

    fn partial(&self, i: usize) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * 2);
        for term in &self.terms {
            let bi = term.beta.get(i);
            if bi > 0 {
                terms.push(RadialTerm {
                    coeff: term.coeff * T::from_usize(bi).unwrap(),
                    mask: term.mask,
                    beta: term.beta.decremented(i).unwrap(),
                    r_pow: term.r_pow,
                });
            }
            if term.r_pow != 0 {
                terms.push(RadialTerm {
                    coeff: term.coeff * T::from_i32(term.r_pow).unwrap(),
                    mask: term.mask,
                    beta: term.beta.incremented(i),
                    r_pow: term.r_pow - 2,
                });
            }
        }
        Self {
            dim: self.dim,
            order: self.order,
            index: self.index.incremented(i),
            terms,
        }
    }

    pub fn eval(&self, x: &Vector<T>) -> Result<Multivector<T>> {
        let r = x.norm();
        if r < T::lit(SINGULAR_RADIUS) {
            return Err(Error::SingularPoint(SINGULAR_RADIUS));
        }
        let mut out = Multivector::zero(self.dim);
        for term in &self.terms {
            let value = term.coeff * term.beta.monomial(x) * r.powi(term.r_pow);
            *out.coeff_mut(term.mask) = *out.coeff(term.mask) + value;
        }
        Ok(out)
    }
}
