//! Multi-index combinatorics and the closed-form expansion of iterated Dirac
//! operators D^s into partial derivatives.

use crate::scalar::Scalar;
use crate::clifford::Vector;
use smallvec::{smallvec, SmallVec};

/// Multi-index j = (j_1, ..., j_m) of non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: SmallVec<[u8; 4]>,
}

impl MultiIndex {
    pub fn new(entries: impl Into<SmallVec<[u8; 4]>>) -> Self {
        Self { entries: entries.into() }
    }

    pub fn zeros(m: usize) -> Self {
        Self { entries: smallvec![0; m] }
    }

    /// The unit index e_i (1 in slot i).
    pub fn unit(m: usize, i: usize) -> Self {
        assert!(i < m);
        let mut idx = Self::zeros(m);
        idx.entries[i] = 1;
        idx
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> usize {
        self.entries[i] as usize
    }

    /// |j| = j_1 + ... + j_m.
    pub fn order(&self) -> usize {
        self.entries.iter().map(|&e| e as usize).sum()
    }

    /// j! = j_1! ... j_m! as an exact integer.
    pub fn factorial(&self) -> u64 {
        fn fact(n: u8) -> u64 {
            (1..=n as u64).product()
        }
        self.entries.iter().map(|&e| fact(e)).product()
    }

    /// x^j = x_1^{j_1} ... x_m^{j_m}.
    pub fn monomial<T: Scalar>(&self, x: &Vector<T>) -> T {
        debug_assert_eq!(self.dim(), x.dim());
        let mut acc = T::one();
        for (i, &e) in self.entries.iter().enumerate() {
            for _ in 0..e {
                acc = acc * x[i].clone();
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect::<SmallVec<[u8; 4]>>(),
        )
    }

    /// Componentwise difference; `None` when any entry would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut entries = SmallVec::with_capacity(self.dim());
        for (a, b) in self.entries.iter().zip(&other.entries) {
            entries.push(a.checked_sub(*b)?);
        }
        Some(Self { entries })
    }

    /// Componentwise j_i >= l_i.
    pub fn contains(&self, other: &Self) -> bool {
        self.entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| a >= b)
    }

    /// All entries even.
    pub fn is_even(&self) -> bool {
        self.entries.iter().all(|e| e % 2 == 0)
    }

    pub fn incremented(&self, i: usize) -> Self {
        let mut idx = self.clone();
        idx.entries[i] += 1;
        idx
    }

    pub fn decremented(&self, i: usize) -> Option<Self> {
        if self.entries[i] == 0 {
            return None;
        }
        let mut idx = self.clone();
        idx.entries[i] -= 1;
        Some(idx)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of dimension `m` with order <= `k`, in ascending
/// lexicographic order. This is the canonical ordering for data files and
/// collections {f^(j) : |j| <= k}.
pub fn enumerate_indices(m: usize, k: usize) -> Vec<MultiIndex> {
    assert!(m >= 1);
    let mut out = Vec::new();
    let mut cur = vec![0u8; m];
    loop {
        if cur.iter().map(|&e| e as usize).sum::<usize>() <= k {
            out.push(MultiIndex::new(SmallVec::from_slice(&cur)));
        }
        // odometer over {0..k}^m, most significant digit first
        let mut pos = m;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if (cur[pos] as usize) < k {
                cur[pos] += 1;
                for slot in cur.iter_mut().skip(pos + 1) {
                    *slot = 0;
                }
                break;
            }
        }
    }
}

/// All multi-indices of dimension `m` with order exactly `s`, even entries
/// only, lexicographic order.
pub fn even_indices_of_order(m: usize, s: usize) -> Vec<MultiIndex> {
    assert!(s % 2 == 0);
    enumerate_indices(m, s)
        .into_iter()
        .filter(|j| j.order() == s && j.is_even())
        .collect()
}

/// The sign c_s of the D^s expansion: +1 when s = 0,1 mod 4, -1 otherwise.
pub fn sign_c(s: usize) -> i32 {
    if s % 4 <= 1 {
        1
    } else {
        -1
    }
}

/// One term of a D^s expansion: `mult * e_gen * d^index`, where `gen = None`
/// stands for the scalar unit blade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiracTerm {
    pub gen: Option<usize>,
    pub index: MultiIndex,
    /// Number of (j, l) decompositions producing this derivative; 1 for
    /// s <= 3, multinomial in general (e.g. D^4 = Laplacian^2 carries 2 on
    /// the mixed fourth derivatives).
    pub mult: u64,
}

/// Closed form of D^s as `sign * sum of terms`, applied from the left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiracExpansion {
    pub order: usize,
    pub sign: i32,
    pub terms: Vec<DiracTerm>,
}

/// Expansion of the s-fold Dirac operator for dimension m.
///
/// D^{2t} = (-1)^t Laplacian^t = c_{2t} sum_{|q|=t} (t!/q!) d^{2q}, and
/// D^{2t+1} = D D^{2t}, which matches the even/odd multi-index form with the
/// sign rule of [`sign_c`].
pub fn dirac_power_expansion(s: usize, m: usize) -> DiracExpansion {
    assert!(s >= 1, "expansion defined for s >= 1");
    assert!((2..=4).contains(&m));
    let t = s / 2;
    let mut terms = Vec::new();
    let t_fact: u64 = (1..=t as u64).product();
    for q in enumerate_indices(m, t) {
        if q.order() != t {
            continue;
        }
        let mult = t_fact / q.factorial();
        let doubled = q.add(&q);
        if s % 2 == 0 {
            terms.push(DiracTerm { gen: None, index: doubled, mult });
        } else {
            for i in 0..m {
                terms.push(DiracTerm {
                    gen: Some(i),
                    index: doubled.incremented(i),
                    mult,
                });
            }
        }
    }
    terms.sort_by(|a, b| a.index.cmp(&b.index).then(a.gen.cmp(&b.gen)));
    DiracExpansion { order: s, sign: sign_c(s), terms }
}
