use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcalc::calculus::{check_leibniz, coproduct_first, coproduct_second, morphism_residual};
use qcalc::cas::random_element;
use qcalc::context::QContext;
use qcalc::gauge::{transform_matter, Einbein, GaugeField};
use qcalc::jackson::{scalar_product, stokes_residual};
use qcalc::laurent::LaurentPoly;
use qcalc::lattice::{LatticeFn, LatticeGrid, Sector};
use qcalc::ring::{ExactComplex, Ring};
use qcalc::special::{QSpecial, Trig};

fn exact_poly(terms: &[(i32, i64, i64)]) -> LaurentPoly<ExactComplex> {
    LaurentPoly::from_terms(
        terms.iter().map(|&(n, re, im)| (n, ExactComplex::from_int(re) + ExactComplex::imag_unit() * ExactComplex::from_int(im))),
    )
}

fn poly_terms() -> impl Strategy<Value = Vec<(i32, i64, i64)>> {
    prop::collection::vec((-4i32..=4, -6i64..=6, -6i64..=6), 1..4)
}

fn random_fn(g: &LatticeGrid, seed: u64) -> LatticeFn {
    compact_fn(g, seed, i32::MAX)
}

fn compact_fn(g: &LatticeGrid, seed: u64, support: i32) -> LatticeFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<Complex64> =
        (0..g.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    LatticeFn::from_sites(g, |s, n| if n.abs() <= support { vals[g.index(s, n).unwrap()] } else { Complex64::zero() })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn algebra_product_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_element(&mut rng, 3, 2);
        let b = random_element(&mut rng, 3, 2);
        let c = random_element(&mut rng, 3, 2);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn bar_is_an_antilinear_anti_involution(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_element(&mut rng, 3, 2);
        let b = random_element(&mut rng, 3, 2);
        prop_assert_eq!(a.bar().bar().reduce(), a.reduce());
        prop_assert_eq!((&a * &b).bar().reduce(), (&b.bar() * &a.bar()).reduce());
    }

    #[test]
    fn derivative_obeys_product_rules(f in poly_terms(), g in poly_terms()) {
        let ctx = QContext::exact(3, 2).unwrap();
        let (f, g) = (exact_poly(&f), exact_poly(&g));
        let [r1, r2] = check_leibniz(&ctx, &f, &g);
        prop_assert!(r1.is_zero() && r2.is_zero());
        prop_assert_eq!(coproduct_first(&ctx, &f, &g), coproduct_second(&ctx, &f, &g));
        prop_assert!(morphism_residual(&ctx, &f).is_zero());
    }

    #[test]
    fn stokes_holds_exactly(f in poly_terms(), lo in -4i32..=2, half in 1i32..=3) {
        let ctx = QContext::exact(3, 2).unwrap();
        let r = stokes_residual(&ctx, &exact_poly(&f), lo, lo + 2 * half, Sector::Minus).unwrap();
        prop_assert!(r.is_zero());
    }

    #[test]
    fn q_numbers_are_odd_in_n(n in -30i32..=30, q in 1.05f64..4.0) {
        let ctx = QContext::float(q).unwrap();
        let (a, b) = (ctx.q_number(n), ctx.q_number(-n));
        prop_assert!((a + b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn scalar_product_is_hermitian(seed in any::<u64>(), q in 1.2f64..3.0) {
        let g = LatticeGrid::symmetric(q, -6, 6).unwrap();
        let f = compact_fn(&g, seed, 4);
        let h = compact_fn(&g, seed ^ 0x9e37_79b9, 4);
        let a = scalar_product(&f, &h).unwrap();
        let b = scalar_product(&h, &f).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        prop_assert!(scalar_product(&f, &f).unwrap().re >= 0.0);
    }

    #[test]
    fn shifts_invert(seed in any::<u64>()) {
        let g = LatticeGrid::symmetric(2.0, -5, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_fn(&g, seed);
        let e = Einbein::random(&g, &mut rng);
        prop_assert!((&e.shift(&e.shift_inv(&psi)) - &psi).max_abs() < 1e-12);
    }

    #[test]
    fn derivative_is_gauge_covariant(seed in any::<u64>()) {
        let g = LatticeGrid::symmetric(2.0, -5, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_fn(&g, seed);
        let e = Einbein::random(&g, &mut rng);
        let a = GaugeField::random(&g, &mut rng, 3.0);
        let lhs = e.transform(&a).derivative(&transform_matter(&psi, &a));
        let rhs = transform_matter(&e.derivative(&psi), &a);
        prop_assert!((&lhs - &rhs).max_abs() < 1e-10);
    }

    // below l = -3 the divided differences lose more than 1e-10 to roundoff once q nears 4
    #[test]
    fn trig_difference_relations(l in -3i32..=12, q in 1.2f64..4.0) {
        let sp = QSpecial::new(q).unwrap();
        let c = |j| sp.on_even_lattice(Trig::Cos, j);
        let s = |j| sp.on_even_lattice(Trig::Sin, j);
        let z = q.powi(2 * l);
        prop_assert!(((s(l) - s(l - 1)) / z - c(l)).abs() < 1e-10);
        prop_assert!(((c(l) - c(l - 1)) / z + s(l - 1) / (q * q)).abs() < 1e-10);
    }
}
