mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use qfilt::dynamics::{lossy_transfer, loss_requirement_curve, RatioConvention, TwoModeModel};
use qfilt::linalg::{dagger, fro, j_matrix, max_abs, CMat, C64};
use qfilt::oscillator::{extract_slh, slh_to_ss, BasisMaps};
use qfilt::realizability::{
    check_realizable, check_symplectic_tf, imaginary_axis_grid, j_factorize, solve_x, transform_to_realizable,
};
use qfilt::statespace::{denormalize, normalize, ss_to_tf, tf_to_minimal_ss};
use qfilt::synthesis::{decompose_network, reconstruct_omega, synthesize};
use qfilt::tfio::{assemble_doubled_up, parse_rational, Poly, RationalFunction, RationalGrid, TransferMatrix};
use rand::Rng;

fn dims(seed: u64) -> (usize, usize) {
    (1 + (seed % 3) as usize, 1 + ((seed / 3) % 2) as usize)
}

/// Stable rational function with simple, separated poles and degree at most `deg`.
fn random_rational(rng: &mut rand_chacha::ChaCha8Rng, deg: usize) -> RationalFunction {
    let d = rng.gen_range(1..=deg);
    let roots: Vec<C64> = (0..d)
        .map(|k| C64::new(-0.5 - k as f64 - rng.gen_range(0.0..0.5), rng.gen_range(-2.0..2.0)))
        .collect();
    let den = Poly::from_roots(&roots);
    let num = Poly::new((0..=d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
    RationalFunction::new(num, den).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scramble_recover(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = dims(seed);
        let (_, ss) = common::random_goo(&mut rng, n, m);
        let t0 = common::random_similarity(&mut rng, 2 * n);
        let scrambled = common::scramble(&ss, &t0);
        let rec = transform_to_realizable(&scrambled).unwrap();
        prop_assert!(check_realizable(&rec.ss).max_residual() < 1e-8);
        prop_assert!(common::tf_distance(&rec.ss, &ss, &mut rng, 20) < 1e-9);
    }

    #[test]
    fn x_is_congruent_under_basis_change(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = dims(seed);
        let (_, ss) = common::random_goo(&mut rng, n, m);
        let x = solve_x(&ss).unwrap();
        prop_assert!(fro(&(&x - j_matrix(n))) < 1e-9);
        let t0 = common::random_similarity(&mut rng, 2 * n);
        let xs = solve_x(&common::scramble(&ss, &t0)).unwrap();
        let expect = &t0 * &x * dagger(&t0);
        prop_assert!(fro(&(&xs - &expect)) < 1e-9 * fro(&expect).max(1.0));
    }

    #[test]
    fn j_factorization_reconstructs(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = 1 + (seed % 4) as usize;
        let t0 = common::random_similarity(&mut rng, 2 * n);
        let x = &t0 * j_matrix(n) * dagger(&t0);
        let t = j_factorize(&x).unwrap();
        let r = fro(&(&t * j_matrix(n) * dagger(&t) - &x));
        prop_assert!(r < 1e-9 * fro(&x));
    }

    #[test]
    fn realizable_implies_symplectic(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = dims(seed);
        let (_, ss) = common::random_goo(&mut rng, n, m);
        prop_assert!(check_realizable(&ss).pass);
        let grid = imaginary_axis_grid(-5.0, 5.0, 41);
        let rep = check_symplectic_tf(&ss, &grid).unwrap();
        prop_assert!(rep.pass, "residual {}", rep.max_residual);
    }

    #[test]
    fn slh_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = dims(seed);
        let (goo, ss) = common::random_goo(&mut rng, n, m);
        let back = extract_slh(&ss).unwrap();
        prop_assert!(max_abs(&(back.k() - goo.k())) < 1e-9);
        prop_assert!(max_abs(&(back.omega() - goo.omega())) < 1e-9);
        prop_assert!(max_abs(&(back.s() - goo.s())) < 1e-9);
        let again = slh_to_ss(&back).unwrap();
        prop_assert!(max_abs(&(again.a() - ss.a())) < 1e-9);
        prop_assert!(max_abs(&(again.b() - ss.b())) < 1e-9);
    }

    #[test]
    fn decomposition_reassembles_omega(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = dims(seed);
        let (goo, _) = common::random_goo(&mut rng, n, m);
        let dec = decompose_network(&goo).unwrap();
        prop_assert!(max_abs(&(reconstruct_omega(&dec) - goo.omega())) < 1e-12);
        let phys = synthesize(&goo, 50.0, Some(0.24)).unwrap();
        for o in &phys.oscillators {
            for c in &o.couplings {
                prop_assert!(c.consistency_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn minimal_realization_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let m = 1 + (seed % 2) as usize;
        let entries: Vec<RationalFunction> = (0..m * m).map(|_| random_rational(&mut rng, 4)).collect();
        let ann = RationalGrid::new(m, m, entries).unwrap();
        let tm = TransferMatrix::from_grids(&ann, None).unwrap();
        let g = assemble_doubled_up(&tm);
        let ss = tf_to_minimal_ss(&g).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let s = C64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)) * 0.7;
            if let (Ok(a), Ok(b)) = (ss_to_tf(&ss, s), g.evaluate(s)) {
                worst = worst.max(max_abs(&(a - b)));
            }
        }
        prop_assert!(worst < 1e-8, "max difference {worst}");
    }

    #[test]
    fn normalization_preserves_transfer(seed in any::<u64>(), s0 in 0.1f64..1e4) {
        let mut rng = common::rng(seed);
        let (n, m) = dims(seed);
        let (_, ss) = common::random_goo(&mut rng, n, m);
        let norm = normalize(&ss, s0).unwrap();
        let back = denormalize(&norm).unwrap();
        prop_assert!(max_abs(&(back.a() - ss.a())) < 1e-12 * fro(ss.a()).max(1.0));
        let s = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let phys = ss_to_tf(&ss, s).unwrap();
        let dimless = ss_to_tf(&norm, s * (2.0 / s0)).unwrap();
        prop_assert!(fro(&(phys.clone() - dimless)) < 1e-10 * fro(&phys).max(1.0));
    }

    #[test]
    fn similarity_preserves_transfer(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (n, m) = dims(seed);
        let (_, ss) = common::random_goo(&mut rng, n, m);
        let t = common::random_similarity(&mut rng, 2 * n);
        prop_assert!(common::tf_distance(&ss.similarity(&t).unwrap(), &ss, &mut rng, 10) < 1e-10);
    }

    #[test]
    fn expression_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let f = random_rational(&mut rng, 4);
        let g = parse_rational(&f.to_expression(), &BTreeMap::new(), false).unwrap();
        prop_assert_eq!(g.num().coeffs(), f.num().coeffs());
        prop_assert_eq!(g.den().coeffs(), f.den().coeffs());
    }

    #[test]
    fn lossless_two_mode_is_all_pass(w in 0.0f64..5.0, ratio in 20.0f64..500.0) {
        let m = TwoModeModel::lossless(1.0, ratio);
        let r = lossy_transfer(&m, w).unwrap();
        prop_assert!((r.full.signal.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_density_constant(target in 0.01f64..0.5, l_arm in 100.0f64..1e5) {
        let lengths = [0.5, 1.0, 3.0, 10.0, 40.0];
        for conv in [RatioConvention::Power, RatioConvention::Amplitude] {
            let pts = loss_requirement_curve(l_arm, target, &lengths, conv).unwrap();
            for w in pts.windows(2) {
                prop_assert!(w[1].eps_a > w[0].eps_a);
                prop_assert!((w[1].eps_per_length - w[0].eps_per_length).abs() <= 1e-12 * w[0].eps_per_length);
            }
        }
    }
}

#[test]
fn theta_identity_all_sizes() {
    for n in 1..=8 {
        assert!(BasisMaps::new(n, 1).theta_identity_residual() < 1e-14);
    }
}

#[test]
fn passive_mode_mix_keeps_pair_structure() {
    let mut rng = common::rng(7);
    let (_, ss) = common::random_goo(&mut rng, 2, 1);
    let u = common::random_unitary(&mut rng, 2);
    let mix = CMat::from_fn(4, 4, |i, j| match (i % 2, j % 2) {
        (0, 0) => u[(i / 2, j / 2)],
        (1, 1) => u[(i / 2, j / 2)].conj(),
        _ => C64::new(0.0, 0.0),
    });
    let mixed = ss.similarity(&mix).unwrap();
    assert!(check_realizable(&mixed).pass);
    let rebuilt = slh_to_ss(&extract_slh(&mixed).unwrap()).unwrap();
    assert!(max_abs(&(rebuilt.c() - mixed.c())) < 1e-12);
}
