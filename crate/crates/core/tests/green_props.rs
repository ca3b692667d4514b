use multipole_green::green_analytic::{
    classify_region, disk_multipole_green, limit_L, lower_bound_L, model_F, model_F_check, model_H,
    model_region, product_green, torus_samples, Case, RegionTag, ADMISSIBILITY_R2,
};
use multipole_green::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HALF_LOG6: f64 = 0.895_879_734_614_027_6;

fn polar(r: f64, t: f64) -> C64 {
    C64::from_polar(r, t)
}

/// Points with `max(|z₁|, |z₂|) = r`, the smaller modulus uniform in `[0, r)`.
fn shell(r: f64, n: usize, seed: u64) -> Vec<[C64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let t = rng.gen_range(0.0..r);
            let (a, b) = if rng.gen::<bool>() { (r, t) } else { (t, r) };
            [
                polar(a, rng.gen_range(0.0..std::f64::consts::TAU)),
                polar(b, rng.gen_range(0.0..std::f64::consts::TAU)),
            ]
        })
        .collect()
}

fn point() -> impl Strategy<Value = [C64; 2]> {
    (0.0..0.999f64, 0.0..6.3f64, 0.0..0.999f64, 0.0..6.3f64)
        .prop_map(|(a, s, b, t)| [polar(a, s), polar(b, t)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lower_envelope_is_nonpositive(z in point(), le in -6.0..-1.0f64, frac in 0.0..1.0f64) {
        let eps = 10f64.powf(le);
        let rho = eps * 10f64.powf(-3.0 * frac);
        let l = lower_bound_L(eps, rho, z).unwrap();
        prop_assert!(l <= 0.0);
        prop_assert!(l > f64::NEG_INFINITY);
    }

    #[test]
    fn regions_are_total_and_rotation_invariant(z in point(), theta in 0.0..6.3f64, t1 in 0.0..6.3f64, t2 in 0.0..6.3f64) {
        prop_assume!(z[0].norm() > 1e-6 && z[1].norm() > 1e-6);
        let tag = classify_region(z, Case::Generic).unwrap();
        let rot = C64::from_polar(1.0, theta);
        prop_assert_eq!(tag, classify_region([z[0] * rot, z[1] * rot], Case::Generic).unwrap());
        prop_assert_eq!(tag, classify_region([z[0].conj(), z[1].conj()], Case::Generic).unwrap());
        // independent phases keep |z₁|, |z₂|, which alone separate D1 from D2
        let w = [z[0] * C64::from_polar(1.0, t1), z[1] * C64::from_polar(1.0, t2)];
        let other = classify_region(w, Case::Generic).unwrap();
        let moduli_only = |t: RegionTag| matches!(t, RegionTag::D1 | RegionTag::D2);
        if moduli_only(tag) && moduli_only(other) {
            prop_assert_eq!(tag, other);
        }
        let d = classify_region(z, Case::Degenerate).unwrap();
        prop_assert!(matches!(d, RegionTag::D0p | RegionTag::D1p));
        prop_assert_eq!(d, classify_region(w, Case::Degenerate).unwrap());
    }

    #[test]
    fn product_green_on_axis_slices(zeta in 0.0..0.999f64, t in 0.0..6.3f64, a in 0.0..0.9f64) {
        let s = [C64::default(), C64::new(a, 0.0)];
        let z = polar(zeta, t);
        let g = disk_multipole_green(&s, z).unwrap();
        prop_assert_eq!(product_green(&s, &[C64::default()], [z, C64::default()]).unwrap(), g);
    }
}

#[test]
fn lower_envelope_poles() {
    let zero = C64::default();
    for (eps, rho) in [(1e-2, 1e-2), (1e-3, 1e-6), (0.3, 0.1)] {
        for p in [
            [zero, zero],
            [C64::new(rho, 0.0), zero],
            [zero, C64::new(eps, 0.0)],
        ] {
            assert_eq!(lower_bound_L(eps, rho, p).unwrap(), f64::NEG_INFINITY);
        }
        assert!(
            lower_bound_L(eps, rho, [C64::new(rho, 0.0), C64::new(eps, 0.0)])
                .unwrap()
                .is_finite()
        );
    }
}

#[test]
fn lower_envelope_converges_uniformly() {
    for (eps, bound) in [(1e-3, 0.05), (1e-4, 0.005)] {
        let pts = torus_samples(0.5, 0.5, 400, 11)
            .into_iter()
            .chain(shell(0.5, 400, 12));
        let sup = pts
            .map(|z| {
                (lower_bound_L(eps, eps, z).unwrap() - limit_L(z, Case::Generic).unwrap()).abs()
            })
            .fold(0.0, f64::max);
        assert!(sup <= bound, "ε = {eps}: sup {sup}");
    }
}

#[test]
fn generic_model_tracks_the_limit() {
    for (k, r) in [0.3, 0.4, 0.5, 0.6, 0.7].into_iter().enumerate() {
        for z in torus_samples(r, r, 400, 20 + k as u64) {
            let tag = classify_region(z, Case::Generic).unwrap();
            if tag.is_exceptional() {
                continue;
            }
            let gap = (limit_L(z, Case::Generic).unwrap() - model_H(z).unwrap()).abs();
            assert!(gap <= HALF_LOG6 + 0.01, "r = {r}, {tag}: {gap}");
        }
        // off the equal-modulus torus, D1 and D3 keep the sharper bound while D2 only obeys log 3
        for z in shell(r, 400, 40 + k as u64) {
            let tag = classify_region(z, Case::Generic).unwrap();
            let gap = (limit_L(z, Case::Generic).unwrap() - model_H(z).unwrap()).abs();
            match tag {
                RegionTag::D1 | RegionTag::D3 => {
                    assert!(gap <= HALF_LOG6 + 0.01, "shell {r}, {tag}: {gap}")
                }
                RegionTag::D2 => assert!(gap <= 3f64.ln() + 0.01, "shell {r}, D2: {gap}"),
                _ => {}
            }
        }
    }
}

#[test]
fn degenerate_model_tracks_the_limit() {
    for (k, r) in [0.3, 0.45, 0.6, 0.7].into_iter().enumerate() {
        for z in torus_samples(r, r, 400, 60 + k as u64)
            .into_iter()
            .chain(shell(r, 400, 70 + k as u64))
        {
            if model_region(z, Case::Degenerate).unwrap().is_exceptional() {
                continue;
            }
            let gap = (limit_L(z, Case::Degenerate).unwrap() - model_F_check(z).unwrap()).abs();
            assert!(gap <= HALF_LOG6 + 0.01, "r = {r}: {gap}");
        }
    }
}

#[test]
fn models_are_admissible() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut n = 0;
    while n < 500 {
        let z = [
            polar(rng.gen_range(1e-3..0.5), rng.gen_range(0.0..6.3)),
            polar(rng.gen_range(1e-3..0.5), rng.gen_range(0.0..6.3)),
        ];
        let z2 = [z[0] * 2.0, z[1] * 2.0];
        let dh = (model_H(z).unwrap() - model_H(z2).unwrap()).abs();
        let df = (model_F(z).unwrap() - model_F(z2).unwrap()).abs();
        assert!(dh <= ADMISSIBILITY_R2 + 0.01, "H at {z:?}: {dh}");
        assert!(df <= ADMISSIBILITY_R2 + 0.01, "F at {z:?}: {df}");
        n += 1;
    }
}
