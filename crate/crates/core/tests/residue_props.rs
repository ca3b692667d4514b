use multipole_green::ideal_algebra::{ideal_contains, IdealSpec};
use multipole_green::numcore::MultiPoly;
use multipole_green::residues::{
    map_zeros, membership_with, monomial_residue, simple_residue_sum, PolyMap2, ResidueContext,
    DEFAULT_T_SCHEDULE, DEFAULT_ZERO_TOL,
};
use multipole_green::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn z(i: usize) -> MultiPoly {
    MultiPoly::var(2, i)
}

fn c(re: f64) -> MultiPoly {
    MultiPoly::constant(2, C64::new(re, 0.0))
}

fn map(f: MultiPoly, g: MultiPoly) -> PolyMap2 {
    PolyMap2::new(f, g, 0.5).unwrap()
}

fn squares() -> [MultiPoly; 2] {
    [z(0).pow(2), z(1).pow(2)]
}

fn cusp() -> [MultiPoly; 2] {
    [z(0).pow(3), &z(1) - &z(0).pow(2)]
}

/// Random polynomial with every monomial of degree `lo..=hi`.
fn random_poly(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> MultiPoly {
    let mut terms = Vec::new();
    for d in lo..=hi {
        for i in 0..=d {
            terms.push((
                vec![i, d - i],
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ));
        }
    }
    MultiPoly::from_terms(2, terms).unwrap()
}

fn poly_strategy() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(((0u32..4, 0u32..4), -1.0..1.0f64, -1.0..1.0f64), 1..6).prop_map(|t| {
        MultiPoly::from_terms(
            2,
            t.into_iter()
                .map(|((a, b), re, im)| (vec![a, b], C64::new(re, im))),
        )
        .unwrap()
    })
}

#[test]
fn continuity_at_a_splitting_double_zero() {
    // (z₁², z₂) has residues (0, 1, 0) on (1, z₁, z₁²)
    let expected: Vec<f64> = (0..3)
        .map(|i| monomial_residue(2, 1, i, 0).unwrap() as f64)
        .collect();
    for eps in [1e-2, 1e-3, 1e-4] {
        let psi = map(&z(0).pow(2) - &c(eps * eps), z(1));
        for (i, want) in expected.iter().enumerate() {
            let r = simple_residue_sum(&psi, &z(0).pow(i as u32)).unwrap();
            assert!(
                (r.value - want).norm() <= 1e-8,
                "ε = {eps}, h = z1^{i}: {}",
                r.value
            );
        }
    }
}

#[test]
fn duality_matches_jet_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, gens, outside) in [
        (
            "<z1^2,z2^2>",
            squares(),
            vec![MultiPoly::one(2), z(0), z(1), &z(0) * &z(1)],
        ),
        (
            "<z1^3,z2-z1^2>",
            cusp(),
            vec![MultiPoly::one(2), z(0), z(0).pow(2)],
        ),
    ] {
        let ideal = IdealSpec::from_generators(gens.to_vec()).unwrap();
        let ctx = ResidueContext::new(
            &map(gens[0].clone(), gens[1].clone()),
            &DEFAULT_T_SCHEDULE,
            3,
        )
        .unwrap();
        let mut members = 0;
        for k in 0..50 {
            let a = random_poly(&mut rng, 0, 4 - gens[0].degree() as u32);
            let b = random_poly(&mut rng, 0, 4 - gens[1].degree() as u32);
            let mut h = (&(&a * &gens[0]) + &(&b * &gens[1])).truncate(4);
            match k % 3 {
                0 => {}
                1 => {
                    let m = &outside[rng.gen_range(0..outside.len())];
                    h = &h + &m.scale(C64::new(rng.gen_range(0.5..1.0), rng.gen_range(-1.0..1.0)));
                }
                _ => h = random_poly(&mut rng, 0, 4),
            }
            let jet = ideal_contains(&ideal, &h, 8, 1e-8).unwrap();
            let dual = membership_with(&ctx, &h, None).unwrap();
            assert_eq!(jet, dual, "{name}: {h:?}");
            members += usize::from(jet);
        }
        assert!(
            (10..=40).contains(&members),
            "{name}: {members} members of 50"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn residue_is_linear(h1 in poly_strategy(), h2 in poly_strategy(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        for gens in [squares(), cusp()] {
            let ctx = ResidueContext::new(&map(gens[0].clone(), gens[1].clone()), &DEFAULT_T_SCHEDULE, 5).unwrap();
            let (a, b) = (C64::new(a, 0.5), C64::new(b, -0.25));
            let lhs = ctx.residue(&(&h1.scale(a) + &h2.scale(b))).unwrap().value;
            let rhs = a * ctx.residue(&h1).unwrap().value + b * ctx.residue(&h2).unwrap().value;
            prop_assert!((lhs - rhs).norm() <= 1e-8, "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn zero_count_survives_tiny_perturbations(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = [
            [&z(0).pow(2) - &c(1e-4), z(1)],
            squares(),
            cusp(),
            [&z(0) * &z(1), &z(0).pow(2) - &z(1).pow(2)],
            [&z(0) - &c(0.2), &z(1).pow(2) - &c(0.04)],
        ];
        for [f, g] in corpus {
            let total = |f: &MultiPoly, g: &MultiPoly| -> usize {
                map_zeros(&map(f.clone(), g.clone()), DEFAULT_ZERO_TOL).unwrap().iter().map(|z| z.multiplicity).sum()
            };
            let before = total(&f, &g);
            let mut jiggle = |p: &MultiPoly| {
                let noise = random_poly(&mut rng, 0, p.degree() as u32);
                &p.clone() + &noise.scale(C64::new(1e-8 / 2f64.sqrt(), 0.0))
            };
            let (pf, pg) = (jiggle(&f), jiggle(&g));
            prop_assert_eq!(before, total(&pf, &pg), "{:?}, {:?}", f, g);
        }
    }
}
