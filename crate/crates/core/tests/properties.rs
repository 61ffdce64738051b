//! Property tests for the algebraic and geometric building blocks.

use proptest::prelude::*;
use smallvec::SmallVec;

use polycauchy::clifford::{Multivector, Vector};
use polycauchy::kernels::KernelFamily;
use polycauchy::multiindex::{dirac_power_expansion, sign_c, MultiIndex};
use polycauchy::rng::SplitMix64;
use polycauchy::surface::SurfaceMesh;

fn random_mv(m: usize, rng: &mut SplitMix64) -> Multivector<f64> {
    let mut v = Multivector::zero(m);
    for mask in 0..(1usize << m) {
        *v.coeff_mut(mask) = rng.range(-1.0, 1.0);
    }
    v
}

#[test]
fn generators_anticommute_exhaustively() {
    for m in 2..=4 {
        for i in 0..m {
            for j in 0..m {
                let ei = Multivector::<f64>::generator(m, i);
                let ej = Multivector::<f64>::generator(m, j);
                let anti = &ei.geo(&ej) + &ej.geo(&ei);
                if i == j {
                    // e_i^2 = -1, so the sum is -2
                    assert_eq!(anti, Multivector::scalar(m, -2.0));
                } else {
                    assert!(anti.is_zero());
                }
            }
        }
    }
}

#[test]
fn product_associates_on_random_triples() {
    let mut rng = SplitMix64::new(11);
    for trial in 0..1000 {
        let m = 2 + trial % 3;
        let (a, b, c) = (
            random_mv(m, &mut rng),
            random_mv(m, &mut rng),
            random_mv(m, &mut rng),
        );
        let left = a.geo(&b).geo(&c);
        let right = a.geo(&b.geo(&c));
        let scale = 1.0 + left.norm();
        assert!(
            (&left - &right).norm() <= 1e-12 * scale,
            "associativity violated at trial {trial}"
        );
    }
}

proptest! {
    #[test]
    fn embed_squares_to_minus_norm(comps in prop::collection::vec(-10.0f64..10.0, 2..=4)) {
        let x = Vector::new(SmallVec::from_slice(&comps));
        let e = Multivector::embed(&x);
        let sq = e.geo(&e);
        let want = Multivector::scalar(x.dim(), -x.norm() * x.norm());
        prop_assert!((&sq - &want).norm() <= 1e-12 * (1.0 + x.norm() * x.norm()));
    }

    #[test]
    fn addition_and_scaling_are_linear(
        a in prop::collection::vec(-5.0f64..5.0, 8),
        b in prop::collection::vec(-5.0f64..5.0, 8),
        s in -3.0f64..3.0,
    ) {
        let m = 3;
        let mut ma = Multivector::zero(m);
        let mut mb = Multivector::zero(m);
        for mask in 0..8 {
            *ma.coeff_mut(mask) = a[mask];
            *mb.coeff_mut(mask) = b[mask];
        }
        let lhs = (&ma + &mb).scale(s);
        let rhs = &ma.scale(s) + &mb.scale(s);
        prop_assert!((&lhs - &rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn multiindex_order_adds_and_monomial_multiplies(
        a in prop::collection::vec(0u8..4, 3),
        b in prop::collection::vec(0u8..4, 3),
        x in prop::collection::vec(0.1f64..2.0, 3),
    ) {
        let ja = MultiIndex::new(SmallVec::from_slice(&a));
        let jb = MultiIndex::new(SmallVec::from_slice(&b));
        let sum = ja.add(&jb);
        prop_assert_eq!(sum.order(), ja.order() + jb.order());
        let v = Vector::new(SmallVec::from_slice(&x));
        let prod = ja.monomial(&v) * jb.monomial(&v);
        prop_assert!((sum.monomial(&v) - prod).abs() <= 1e-12 * (1.0 + prod.abs()));
    }
}

#[test]
fn sign_c_has_period_four() {
    for s in 0..200 {
        assert_eq!(sign_c(s + 4), sign_c(s));
    }
    assert_eq!(sign_c(0), 1);
    assert_eq!(sign_c(1), 1);
    assert_eq!(sign_c(2), -1);
    assert_eq!(sign_c(3), -1);
}

#[test]
fn expansion_parity_constraints_exhaustive() {
    for m in 2..=4 {
        for s in 1..=6 {
            let exp = dirac_power_expansion(s, m);
            assert_eq!(exp.sign, sign_c(s));
            for term in &exp.terms {
                assert_eq!(term.index.order(), s);
                if s % 2 == 0 {
                    assert!(term.gen.is_none());
                    assert!(term.index.is_even());
                } else {
                    let i = term.gen.expect("odd order carries a generator");
                    let stripped = term
                        .index
                        .checked_sub(&MultiIndex::unit(m, i))
                        .expect("index contains its generator direction");
                    assert!(stripped.is_even());
                }
            }
        }
    }
}

#[test]
fn kernels_are_exactly_homogeneous() {
    let mut rng = SplitMix64::new(12);
    let fam = KernelFamily::<f64>::build(3, 2).unwrap();
    for _ in 0..50 {
        let x = Vector::new(SmallVec::from_slice(&[
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
            rng.range(0.2, 1.0),
        ]));
        let lam = rng.range(0.3, 3.0);
        for u in 0..=2 {
            let base = fam.eval(u, &x).unwrap();
            let scaled = fam.eval(u, &x.scale(lam)).unwrap();
            let factor = lam.powi(u as i32 + 1 - 3);
            let want = base.scale(factor);
            assert!((&scaled - &want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
    }
}

#[test]
fn kernel_derivatives_obey_the_growth_bound() {
    // E_u^(j) is homogeneous of degree u+1-m-|j|, so the compensated norm
    // ||E_u^(j)(x)|| * |x|^{m+|j|-u-1} is constant along rays and bounded
    // over the sphere of directions.
    let fam = KernelFamily::<f64>::build(3, 2).unwrap();
    let mut rng = SplitMix64::new(13);
    for u in 0..=2usize {
        for j in polycauchy::multiindex::enumerate_indices(3, 2) {
            let kd = fam.derivative(u, &j);
            let mut worst: f64 = 0.0;
            for _ in 0..30 {
                let dir = Vector::new(SmallVec::from_slice(&[
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                ]));
                let Some(unit) = dir.unit() else { continue };
                let mut along_ray: Vec<f64> = Vec::new();
                for &r in &[0.1, 0.5, 1.0, 3.0, 10.0] {
                    let v = kd.eval(&unit.scale(r)).unwrap();
                    let power = 3.0 + j.order() as f64 - u as f64 - 1.0;
                    along_ray.push(v.norm() * r.powf(power));
                }
                let lo = along_ray.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = along_ray.iter().cloned().fold(0.0, f64::max);
                assert!(hi - lo <= 1e-9 * (1.0 + hi), "not constant along a ray");
                worst = worst.max(hi);
            }
            assert!(worst.is_finite() && worst < 1e4, "unbounded over directions");
        }
    }
}

#[test]
fn meshes_have_exact_area_and_unit_normals() {
    for &(m, radius) in &[(2usize, 1.0f64), (2, 2.0), (3, 1.0), (3, 0.5)] {
        for &level in &[2usize, 4, 8, 16] {
            let mesh = SurfaceMesh::sphere(m, radius, level).unwrap();
            let want = match m {
                2 => 2.0 * std::f64::consts::PI * radius,
                _ => 4.0 * std::f64::consts::PI * radius * radius,
            };
            assert!((mesh.area() - want).abs() <= 1e-10 * want);
            for n in mesh.normals() {
                assert!((n.norm() - 1.0).abs() <= 1e-12);
            }
            for w in mesh.weights() {
                assert!(*w > 0.0);
            }
        }
    }
}

#[test]
fn pv_matches_plain_integration_for_smooth_densities() {
    let mesh = SurfaceMesh::<f64>::sphere(3, 1.0, 8).unwrap();
    let z = 10usize;
    let density: Vec<Multivector<f64>> = mesh
        .nodes()
        .iter()
        .map(|y| Multivector::scalar(3, (y[0] + 0.3 * y[1]).cos()))
        .collect();
    let full = mesh.integrate(&density).unwrap();
    let pv = mesh.pv_integrate(z, |i| density[i].clone());
    // the truncated sum differs from the full one by exactly the excluded
    // nodes' contribution
    let cutoff = 2.0 * mesh.spacing();
    let excluded: f64 = (0..mesh.len())
        .filter(|&i| mesh.node(i).distance(mesh.node(z)) < cutoff)
        .map(|i| mesh.weights()[i] * density[i].norm())
        .sum();
    assert!((&full - &pv).norm() <= excluded + 1e-12);
    assert!(excluded > 0.0, "exclusion ring should be non-empty");
}
