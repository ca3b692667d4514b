use multipole_green::numcore::{
    jet_of, subspace_gap, univariate_roots, JetSubspace, MonomialBasis, MultiPoly,
};
use multipole_green::C64;
use proptest::prelude::*;

fn small_poly() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(((0u32..4, 0u32..4), -2.0..2.0f64, -2.0..2.0f64), 1..6).prop_map(
        |terms| {
            MultiPoly::from_terms(
                2,
                terms
                    .into_iter()
                    .map(|((a, b), re, im)| (vec![a, b], C64::new(re, im))),
            )
            .unwrap()
        },
    )
}

fn bidisk_point() -> impl Strategy<Value = [C64; 2]> {
    (0.0..0.99f64, 0.0..6.3f64, 0.0..0.99f64, 0.0..6.3f64)
        .prop_map(|(r1, t1, r2, t2)| [C64::from_polar(r1, t1), C64::from_polar(r2, t2)])
}

fn cvec(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b)),
        n,
    )
}

fn subspace(rank: usize) -> impl Strategy<Value = JetSubspace> {
    // 2 variables through degree 2: ambient dimension 6
    prop::collection::vec(cvec(6), rank).prop_filter_map("full rank", move |vs| {
        let s = JetSubspace::from_vectors(2, 2, &vs, 1e-6).ok()?;
        (s.rank() == rank).then_some(s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws_pointwise(p in small_poly(), q in small_poly(), r in small_poly(), z in bidisk_point()) {
        let ev = |f: &MultiPoly| f.eval(&z).unwrap();
        let lhs = ev(&(&(&p + &q) * &r));
        let rhs = ev(&(&(&p * &r) + &(&q * &r)));
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        prop_assert!((ev(&(&p * &q)) - ev(&(&q * &p))).norm() <= 1e-12 * (1.0 + lhs.norm()));
        let assoc = (ev(&(&(&p * &q) * &r)) - ev(&(&p * &(&q * &r)))).norm();
        prop_assert!(assoc <= 1e-11 * (1.0 + ev(&(&(&p * &q) * &r)).norm()));
        prop_assert!((ev(&(&p * &q)) - ev(&p) * ev(&q)).norm() <= 1e-12 * (1.0 + (ev(&p) * ev(&q)).norm()));
    }

    #[test]
    fn jet_of_product_is_truncated_convolution(p in small_poly(), q in small_poly(), z in bidisk_point(), d in 0u32..5) {
        let jp = jet_of(&p, &z, d).unwrap().to_poly();
        let jq = jet_of(&q, &z, d).unwrap().to_poly();
        let conv = (&jp * &jq).truncate(d);
        let direct = jet_of(&(&p * &q), &z, d).unwrap();
        let basis = MonomialBasis::new(2, d);
        for (e, c) in basis.exps().iter().zip(&direct.coeffs) {
            prop_assert!((conv.coeff(e) - c).norm() <= 1e-12 * (1.0 + c.norm()));
        }
    }

    #[test]
    fn gap_is_a_metric(a in subspace(3), b in subspace(3), c in subspace(3)) {
        let ab = subspace_gap(&a, &b).unwrap();
        prop_assert_eq!(ab.to_bits(), subspace_gap(&b, &a).unwrap().to_bits());
        prop_assert!(subspace_gap(&a, &a).unwrap() <= 1e-12);
        let ac = subspace_gap(&a, &c).unwrap();
        let cb = subspace_gap(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-10);
    }

    #[test]
    fn root_multiplicities_add_up(
        mults in prop::collection::vec(1usize..4, 1..4),
        radius in 0.3..1.5f64,
        phase in 0.0..6.3f64,
    ) {
        // roots on a circle, at least 0.5 radius apart
        let k = mults.len();
        let roots: Vec<C64> = (0..k)
            .map(|i| C64::from_polar(radius, phase + std::f64::consts::TAU * i as f64 / k.max(3) as f64))
            .collect();
        let z = MultiPoly::var(1, 0);
        let mut p = MultiPoly::one(1);
        for (r, m) in roots.iter().zip(&mults) {
            p = &p * &(&z - &MultiPoly::constant(1, *r)).pow(*m as u32);
        }
        let clusters = univariate_roots(&p, 1e-3).unwrap();
        let total: usize = clusters.iter().map(|c| c.multiplicity).sum();
        prop_assert_eq!(total as i32, p.degree());
        for (r, m) in roots.iter().zip(&mults) {
            let c = clusters.iter().find(|c| (c.center - r).norm() < 1e-3);
            prop_assert!(c.is_some(), "root {} missing", r);
            prop_assert_eq!(c.unwrap().multiplicity, *m);
        }
        let scale = p.max_abs_coeff();
        for c in clusters.iter().filter(|c| c.multiplicity == 1) {
            prop_assert!(p.eval(&[c.center]).unwrap().norm() <= 1e-6 * scale);
        }
    }
}
