mod common;

use std::f64::consts::E;

use pcompact::homopoly::{
    companion, companion_iter, kappa_bounds, kappa_lower, probe_set, taylor_component, HomPolynomial, KappaOptions,
    ProbeOptions,
};
use pcompact::pconvex::{best_disjoint_certificate, mp_lower_disjoint, mp_upper_search, SearchOptions};
use pcompact::taylor::{ball_image_bound, radius_window, seminorm_e, NullSequence, TailLaw, TaylorModel};
use pcompact::{CVector, Exponent, C64};
use proptest::prelude::*;
use rand::Rng;

fn opts() -> KappaOptions {
    KappaOptions { probes: ProbeOptions { samples: 32, ..ProbeOptions::default() }, ..KappaOptions::default() }
}

fn close(a: &CVector, b: &CVector, tol: f64) -> bool {
    (a - b).max_abs() <= tol * (1.0 + a.max_abs().max(b.max_abs()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn homogeneity(seed in any::<u64>(), m in 0usize..5, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let mut rng = common::rng(seed);
        let p = common::poly(&mut rng, m, 3, 2, 6, true);
        let x = common::vector(&mut rng, 3, true);
        let l = C64::new(re, im);
        let lhs = p.eval(&x.scale(l)).unwrap();
        let rhs = p.eval(&x).unwrap().scale(l.powu(m as u32));
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn companion_is_linear_in_a(seed in any::<u64>(), m in 2usize..6, s in -2.0f64..2.0) {
        let mut rng = common::rng(seed);
        let p = common::poly(&mut rng, m, 3, 2, 6, true);
        let a = common::vector(&mut rng, 3, true);
        let b = common::vector(&mut rng, 3, true);
        let x = common::vector(&mut rng, 3, true);
        let ab = &a.scale_real(s) + &b;
        let lhs = companion(&p, &ab).unwrap().eval(&x).unwrap();
        let rhs = &companion(&p, &a).unwrap().eval(&x).unwrap().scale_real(s) + &companion(&p, &b).unwrap().eval(&x).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-10));
        prop_assert!(close(&lhs, &common::polarized(&p, &ab, &x), 1e-10));
    }

    #[test]
    fn full_iteration_is_the_value_at_a(seed in any::<u64>(), m in 1usize..6) {
        let mut rng = common::rng(seed);
        let p = common::poly(&mut rng, m, 3, 2, 6, true);
        let a = common::vector(&mut rng, 3, true);
        let c = companion_iter(&p, &a, m).unwrap();
        prop_assert_eq!(c.degree(), 0);
        prop_assert!(close(&c.eval(&CVector::zeros(3)).unwrap(), &p.eval(&a).unwrap(), 1e-10));
        // splitting the iteration does not change the result
        let k = rng.random_range(0..=m);
        let split = companion_iter(&companion_iter(&p, &a, k).unwrap(), &a, m - k).unwrap();
        prop_assert!(close(&split.eval(&CVector::zeros(3)).unwrap(), &p.eval(&a).unwrap(), 1e-10));
    }

    #[test]
    fn taylor_components_sum_to_shifted_value(seed in any::<u64>(), m in 1usize..5) {
        let mut rng = common::rng(seed);
        let p = common::poly(&mut rng, m, 2, 2, 6, true);
        let a = common::vector(&mut rng, 2, true);
        let x = common::vector(&mut rng, 2, true);
        let mut sum = CVector::zeros(2);
        for l in 0..=m {
            sum = &sum + &taylor_component(&p, &a, l).unwrap().eval(&x).unwrap();
        }
        prop_assert!(close(&sum, &p.eval(&(&a + &x)).unwrap(), 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn kappa_sandwich(seed in any::<u64>(), m in 1usize..4, pi in 0usize..3) {
        let mut rng = common::rng(seed);
        let p = Exponent::Finite([1.5, 2.0, 3.0][pi]);
        let poly = common::poly(&mut rng, m, 3, 3, 5, seed % 2 == 0);
        let kb = kappa_bounds(&poly, p, &opts()).unwrap();
        prop_assert!(kb.lower <= kb.upper * (1.0 + 1e-9));
        let (lo, hi) = kb.verify(&poly, 1e-8).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-9));
        // the lower certificate only uses image points of the unit ball
        let probes = probe_set(3, poly.dom_norm, &opts().probes);
        let (w, used) = kappa_lower(&poly, p, &probes).unwrap();
        prop_assert!(used.iter().all(|x| x.norm(poly.dom_norm) <= 1.0 + 1e-12));
        prop_assert!((w.verify().unwrap() - w.value()).abs() <= 1e-12 * w.value().max(1.0));
    }

    #[test]
    fn mp_sandwich_and_scaling(seed in any::<u64>(), n in 1usize..8, pi in 0usize..3, c in 0.1f64..10.0) {
        let mut rng = common::rng(seed);
        let p = Exponent::Finite([1.5, 2.0, 3.0][pi]);
        let pts: Vec<CVector> = (0..n).map(|_| common::vector(&mut rng, 3, true)).collect();
        let cert = best_disjoint_certificate(&pts, p);
        let lower = mp_lower_disjoint(&pts, &cert).unwrap();
        let up = mp_upper_search(&pts, p, &SearchOptions::default()).unwrap();
        prop_assert!(lower <= up.value * (1.0 + 1e-9));
        prop_assert!((up.verify(&pts, 1e-8).unwrap() - up.value).abs() <= 1e-12 * up.value.max(1.0));
        let scaled: Vec<CVector> = pts.iter().map(|x| x.scale_real(c)).collect();
        let cert_c = best_disjoint_certificate(&scaled, p);
        let lower_c = mp_lower_disjoint(&scaled, &cert_c).unwrap();
        // a certificate is tied to its points
        prop_assert!(c == 1.0 || mp_lower_disjoint(&scaled, &cert).is_err());
        prop_assert!((lower_c - c * lower).abs() <= 1e-9 * (c * lower).max(1.0));
    }

    #[test]
    fn ball_image_is_monotone(seed in any::<u64>(), e1 in 0.01f64..0.2, e2 in 0.01f64..0.2) {
        let mut rng = common::rng(seed);
        let comps: Vec<HomPolynomial> = (0..=3).map(|m| common::poly(&mut rng, m, 2, 2, 4, true)).collect();
        let tm = TaylorModel::new(CVector::zeros(2), comps, Some(TailLaw { c1: 1.0, c2: 1.5 })).unwrap();
        let p = Exponent::Finite(2.0);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = ball_image_bound(&tm, lo, p, &opts());
        let b = ball_image_bound(&tm, hi, p, &opts());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(a.value <= b.value * (1.0 + 1e-12));
        }
    }

    #[test]
    fn seminorm_is_subadditive(seed in any::<u64>(), r in 0.0f64..0.5) {
        let mut rng = common::rng(seed);
        let p = Exponent::Finite(2.0);
        let f: Vec<HomPolynomial> = (0..=3).map(|m| common::poly(&mut rng, m, 2, 2, 4, true)).collect();
        let g: Vec<HomPolynomial> = (0..=3).map(|m| common::poly(&mut rng, m, 2, 2, 4, true)).collect();
        let fg: Vec<HomPolynomial> = f.iter().zip(&g).map(|(a, b)| a.add(b).unwrap()).collect();
        let model = |c: Vec<HomPolynomial>| TaylorModel::new(CVector::zeros(2), c, None).unwrap();
        let k = vec![CVector::from_real(&[r, 0.0]), CVector::from_real(&[0.0, -r])];
        let a = NullSequence::geometric(0.3, 0.5);
        let sf = seminorm_e(&model(f), &k, &a, p, &opts()).unwrap();
        let sg = seminorm_e(&model(g), &k, &a, p, &opts()).unwrap();
        // certified lower value of the sum against the two upper values
        let c = sf.radius_k;
        let lower_sum: f64 = fg
            .iter()
            .enumerate()
            .map(|(m, q)| (c + a.at(m)).powi(m as i32) * kappa_bounds(q, p, &opts()).unwrap().lower)
            .sum();
        prop_assert!(lower_sum <= (sf.value + sg.value) * (1.0 + 1e-9));
    }

    #[test]
    fn radius_survives_reexpansion(seed in any::<u64>(), c2 in 0.2f64..2.0, t in 0.0f64..0.9) {
        let mut rng = common::rng(seed);
        let comps: Vec<HomPolynomial> = (0..=3).map(|m| common::poly(&mut rng, m, 2, 1, 4, false)).collect();
        let tm = TaylorModel::new(CVector::zeros(2), comps, Some(TailLaw { c1: 1.0, c2 })).unwrap();
        let p = Exponent::Finite(2.0);
        let r0 = radius_window(&tm, p, None, &opts()).unwrap().tail_radius;
        // a base point inside the certified radius, scaled by 1/e
        let b = common::vector(&mut rng, 2, false);
        let b = b.scale_real(t * r0 / (E * b.norm(tm.dom_norm()).max(1e-12)));
        let moved = tm.reexpand(&b).unwrap();
        let r1 = radius_window(&moved, p, None, &opts()).unwrap().tail_radius;
        let shift = E * b.norm(tm.dom_norm());
        prop_assert!(r1 >= (r0 - shift) * (1.0 - 1e-12));
        prop_assert!(r1 > 0.0);
    }
}
