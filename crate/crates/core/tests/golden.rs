use std::collections::BTreeMap;

use qfilt::dynamics::{dc_noise_ratio, dpa_adiabatic_io, RatioConvention};
use qfilt::linalg::{c, fro, identity, j_matrix, max_abs, re, CMat};
use qfilt::oscillator::{extract_slh, total_hamiltonian_terms};
use qfilt::pipeline::realize_transfer_matrix;
use qfilt::realizability::{check_doubled_up_symmetry, check_realizable, factorization_residual, transform_with_t};
use qfilt::statespace::{minimality_report, ss_to_tf, StateSpace};
use qfilt::synthesis::{map_crystal_params, synthesize, C_LIGHT};
use qfilt::tfio::{deserialize_state_space, serialize_state_space, TransferMatrix};
use qfilt::tolerance::Tolerances;

fn mat(v: &[f64]) -> CMat {
    CMat::from_row_iterator(2, 2, v.iter().map(|&x| re(x)))
}

fn unstable(s0: f64) -> TransferMatrix {
    TransferMatrix::from_expressions(
        1,
        BTreeMap::from([("s0".to_string(), s0)]),
        vec![vec!["(s - s0)/(s + s0)".into()]],
        None,
        false,
    )
    .unwrap()
}

#[test]
fn minimal_model_before_transform() {
    let r = realize_transfer_matrix(&unstable(1.0), Some(1.0), &Tolerances::default()).unwrap();
    assert_eq!(r.minimal.a(), &mat(&[2.0, 0.0, 0.0, 2.0]));
    assert_eq!(r.minimal.b(), &mat(&[1.0, 0.0, 0.0, 1.0]));
    assert_eq!(r.minimal.c(), &mat(&[4.0, 0.0, 0.0, 4.0]));
    let rep = minimality_report(&r.minimal);
    assert_eq!((rep.controllable_rank, rep.observable_rank, rep.minimal), (2, 2, true));
}

#[test]
fn published_t_is_accepted_by_verifier() {
    let r = realize_transfer_matrix(&unstable(1.0), Some(1.0), &Tolerances::default()).unwrap();
    let t = mat(&[0.0, -0.5, 0.5, 0.0]);
    assert!(factorization_residual(&t, &(j_matrix(1).scale(-0.25))) < 1e-15);
    let out = transform_with_t(&r.minimal, &t, &Tolerances::default()).unwrap();
    assert_eq!(out.ss.b(), &mat(&[0.0, 2.0, -2.0, 0.0]));
    assert_eq!(out.ss.c(), &mat(&[0.0, -2.0, 2.0, 0.0]));
}

#[test]
fn dimensional_matrices_for_other_rates() {
    for s0 in [0.5, 3.0, C_LIGHT / 4000.0] {
        let r = realize_transfer_matrix(&unstable(s0), Some(s0), &Tolerances::default()).unwrap();
        let k = (2.0 * s0).sqrt();
        assert!(fro(&(r.physical.a() - mat(&[s0, 0.0, 0.0, s0]))) <= 1e-12 * s0);
        assert!(fro(&(r.physical.b() - mat(&[0.0, k, -k, 0.0]))) <= 1e-12 * k);
        assert!(fro(&(r.physical.c() - mat(&[0.0, -k, k, 0.0]))) <= 1e-12 * k);
        assert!(check_doubled_up_symmetry(&r.physical).pass);
    }
}

#[test]
fn slh_terms_of_unstable_filter() {
    let r = realize_transfer_matrix(&unstable(1.0), Some(1.0), &Tolerances::default()).unwrap();
    let goo = extract_slh(&r.physical).unwrap();
    let terms = total_hamiltonian_terms(&goo);
    // Only coupling terms: L = -sqrt2 a^H gives -i sqrt2 a u and +i sqrt2 a^H u^H.
    assert_eq!(terms.len(), 2);
    assert!(terms.iter().all(|t| t.kind == qfilt::oscillator::TermKind::Coupling));
    let phys = synthesize(&goo, 100.0, None).unwrap();
    assert_eq!(phys.oscillators.len(), 1);
    let cpl = &phys.oscillators[0].couplings[0];
    assert_eq!(cpl.eps2, c(0.0, 0.0));
    assert!((cpl.eps1 - re(-10.0)).norm() < 1e-12);
}

#[test]
fn state_space_document_is_stable() {
    let r = realize_transfer_matrix(&unstable(1.0), Some(1.0), &Tolerances::default()).unwrap();
    let text = serialize_state_space(&r.physical).unwrap();
    assert!(text.contains("\"sign_convention\": \"paper_negative_s\""));
    assert_eq!(deserialize_state_space(&text).unwrap(), r.physical);
}

#[test]
fn unstable_filter_response_values() {
    // Hand evaluation: at s = 0 the filter gives -1, at s = s0 it gives 0, at s = i s0 it gives i.
    let a = mat(&[1.0, 0.0, 0.0, 1.0]);
    let k = 2f64.sqrt();
    let ss = StateSpace::new(a, mat(&[0.0, k, -k, 0.0]), mat(&[0.0, -k, k, 0.0]), identity(2)).unwrap();
    assert!(check_realizable(&ss).pass);
    assert!(max_abs(&(ss_to_tf(&ss, c(0.0, 0.0)).unwrap() + identity(2))) < 1e-15);
    assert!(max_abs(&ss_to_tf(&ss, c(1.0, 0.0)).unwrap()) < 1e-15);
    let g = ss_to_tf(&ss, c(0.0, 1.0)).unwrap();
    assert!((g[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
}

/// Smaller root of `p (1 + x)^2 = 4 x`, the DC power ratio with `x = gamma_a / s0`.
fn loss_root(p: f64) -> f64 {
    let b = 4.0 - 2.0 * p;
    (b - (b * b - 4.0 * p * p).sqrt()) / (2.0 * p)
}

#[test]
fn operating_point_conventions() {
    let l_arm = 4000.0;
    // eps_a / L_a = 4 gamma_a / c = 4 x / L_arm.
    let amp = 4.0 * loss_root(0.01) / l_arm * 1e6;
    let pow = 4.0 * loss_root(0.1) / l_arm * 1e6;
    assert!((amp - 2.5).abs() < 0.05, "amplitude convention {amp}");
    assert!((pow - 26.3).abs() < 0.05, "power convention {pow}");
    let s0 = C_LIGHT / l_arm;
    for (conv, x) in [(RatioConvention::Amplitude, loss_root(0.01)), (RatioConvention::Power, loss_root(0.1))] {
        let got = qfilt::dynamics::solve_loss_rate(s0, 0.1, conv).unwrap() / s0;
        assert!((got - x).abs() < 1e-12 * x.max(1e-300) + 1e-15, "{conv:?}: {got} vs {x}");
        assert!((dc_noise_ratio(s0, x * s0, conv) - 0.1).abs() < 1e-12);
    }
}

#[test]
fn crystal_mapping_values() {
    let s0 = C_LIGHT / 4000.0;
    let m = map_crystal_params(s0, 0.24, 1e-4).unwrap();
    assert!((m.gamma - 1e-4 * C_LIGHT / 0.96).abs() < 1e-9);
    assert!((m.r - (1e-4f64 * 0.24 / 4000.0).sqrt()).abs() < 1e-18);
    // Boundary gamma = 4 sqrt(s0 gamma): DC amplitude gain exactly 3.
    let v = dpa_adiabatic_io(16.0, 1.0, 0.0).unwrap();
    assert!((v - re(3.0)).norm() < 1e-12);
}
