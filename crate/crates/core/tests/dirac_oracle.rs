//! Exact-arithmetic oracle for the closed-form D^s expansion: the expansion
//! applied to random multivector polynomials must agree with brute-force
//! s-fold symbolic Dirac application, coefficient by coefficient, in rational
//! arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use polycauchy::clifford::{Multivector, Vector};
use polycauchy::multiindex::{dirac_power_expansion, enumerate_indices};
use polycauchy::polynomial::{apply_expansion, PolyField};
use polycauchy::rng::SplitMix64;
use smallvec::SmallVec;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn random_rat(rng: &mut SplitMix64) -> BigRational {
    // small rationals p/q with q in {1, 2, 3}
    let p = (rng.next_u64() % 19) as i64 - 9;
    let q = (rng.next_u64() % 3) as i64 + 1;
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn random_poly(m: usize, deg: usize, rng: &mut SplitMix64) -> PolyField<BigRational> {
    let mut p = PolyField::zero(m);
    for j in enumerate_indices(m, deg) {
        if rng.next_u64() % 3 == 0 {
            continue; // keep the polynomials sparse-ish
        }
        let mut c = Multivector::zero(m);
        for mask in 0..(1usize << m) {
            *c.coeff_mut(mask) = rat((rng.next_u64() % 19) as i64 - 9);
        }
        p.add_term(j, c);
    }
    p
}

fn random_point(m: usize, rng: &mut SplitMix64) -> Vector<BigRational> {
    let comps: SmallVec<[BigRational; 4]> = (0..m).map(|_| random_rat(rng)).collect();
    Vector::new(comps)
}

fn assert_expansion_matches(
    p: &PolyField<BigRational>,
    m: usize,
    s: usize,
    points: usize,
    rng: &mut SplitMix64,
) {
    let exp = dirac_power_expansion(s, m);
    let oracle = p.dirac_n(s);
    for _ in 0..points {
        let x = random_point(m, rng);
        let got = apply_expansion(&exp, p, &x);
        let want = oracle.eval(&x);
        assert!(
            (&got - &want).is_zero(),
            "m={m} s={s}: expansion disagrees with iterated Dirac at {:?}",
            x.comps()
        );
    }
}

#[test]
fn expansion_equals_iterated_dirac_exactly() {
    let mut rng = SplitMix64::new(0x5eed_0001);
    for &m in &[2usize, 3] {
        for poly_id in 0..25 {
            let deg = 1 + (poly_id % 6); // degrees 1..=6
            let p = random_poly(m, deg, &mut rng);
            for s in 1..=4 {
                assert_expansion_matches(&p, m, s, 3, &mut rng);
            }
        }
    }
}

#[test]
fn expansion_matches_at_many_points() {
    // one dense degree-6 polynomial per dimension, 100 random points
    let mut rng = SplitMix64::new(0x5eed_0002);
    for &m in &[2usize, 3] {
        let mut p = PolyField::zero(m);
        for j in enumerate_indices(m, 6) {
            let mut c = Multivector::zero(m);
            for mask in 0..(1usize << m) {
                *c.coeff_mut(mask) = random_rat(&mut rng);
            }
            p.add_term(j, c);
        }
        for s in 1..=4 {
            assert_expansion_matches(&p, m, s, 100, &mut rng);
        }
    }
}

#[test]
fn expansion_kills_low_degree_polynomials() {
    let mut rng = SplitMix64::new(0x5eed_0003);
    for &m in &[2usize, 3] {
        for s in 1..=4 {
            let p = random_poly(m, s - 1, &mut rng);
            let exp = dirac_power_expansion(s, m);
            for _ in 0..5 {
                let x = random_point(m, &mut rng);
                assert!(apply_expansion(&exp, &p, &x).is_zero());
            }
        }
    }
}
