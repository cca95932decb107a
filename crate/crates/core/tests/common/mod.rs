//! Random physically realizable systems for property and acceptance tests.
#![allow(dead_code)]

use qfilt::linalg::{dagger, eigenvalues, fro, identity, inverse, signed_sigma, singular_values, CMat, C64};
use qfilt::oscillator::{slh_to_ss, GeneralizedOpenOscillator};
use qfilt::statespace::StateSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; keeps the generator independent of extra distribution crates.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> CMat {
    CMat::from_fn(r, c, |_, _| C64::new(gauss(rng), gauss(rng)) * scale)
}

/// Haar-like unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, m: usize) -> CMat {
    let g = random_complex(rng, m, m, 1.0);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q.clone();
    for k in 0..m {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let col = q.column(k) * ph;
        q.set_column(k, &col);
    }
    q
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    let g = random_complex(rng, n, n, scale);
    (&g + dagger(&g)).scale(0.5)
}

/// Smallest `|l_i + conj(l_j)|` over eigenvalue pairs of `a`.
pub fn min_pair_sum(a: &CMat) -> f64 {
    let ev = eigenvalues(a).expect("eigenvalues");
    let mut best = f64::INFINITY;
    for x in &ev {
        for y in &ev {
            best = best.min((x + y.conj()).norm());
        }
    }
    best
}

/// Random oscillator in the alternating pair convention, with the
/// eigenvalue pair condition enforced by rejection.
pub fn random_goo(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (GeneralizedOpenOscillator, StateSpace) {
    let pi = signed_sigma(&vec![-1.0; n]);
    loop {
        let s = random_unitary(rng, m);
        let k = random_complex(rng, m, 2 * n, 0.8);
        let r = random_hermitian(rng, 2 * n, 0.5);
        let omega = (&r + &pi * r.map(|z| z.conj()) * &pi).scale(0.5);
        let goo = GeneralizedOpenOscillator::new(s, k, omega).expect("valid oscillator");
        let ss = slh_to_ss(&goo).expect("build");
        if min_pair_sum(ss.a()) > 0.05 * fro(ss.a()).max(1.0) {
            return (goo, ss);
        }
    }
}

/// Well-conditioned random similarity.
pub fn random_similarity(rng: &mut ChaCha8Rng, ns: usize) -> CMat {
    loop {
        let t = identity(ns) + random_complex(rng, ns, ns, 0.4);
        let sv = singular_values(&t);
        if ns == 0 || sv[0] / sv[ns - 1] < 20.0 {
            return t;
        }
    }
}

/// `(T0 A T0^-1, T0 B, C T0^-1, D)`, so that the scrambled `X` is `T0 J T0^H`.
pub fn scramble(ss: &StateSpace, t0: &CMat) -> StateSpace {
    let ti = inverse(t0).expect("invertible");
    ss.similarity(&ti).expect("similarity")
}

/// `max |G1(s) - G2(s)|` over random points in the right half plane shifted off the axis.
pub fn tf_distance(a: &StateSpace, b: &StateSpace, rng: &mut ChaCha8Rng, points: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let s = C64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (ga, gb) = match (qfilt::statespace::ss_to_tf(a, s), qfilt::statespace::ss_to_tf(b, s)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => continue,
        };
        let scale = fro(&ga).max(1.0);
        worst = worst.max(fro(&(ga - gb)) / scale);
    }
    worst
}
