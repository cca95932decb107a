//! Physical realizability checks and the transform that enforces them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    conj, dagger, eigenvalues, fro, hermitian_eig, identity, inverse, j_matrix, kron, signed_sigma, sigma_matrix,
    solve, unvec, vec_of, CMat, C64,
};
use crate::statespace::{FrequencyResponse, StateSpace};
use crate::tolerance::Tolerances;

/// `J = diag(1, -1; ...)` for a given pair count.
#[derive(Clone, Debug, PartialEq)]
pub struct JStructure {
    pub pairs: usize,
    pub matrix: CMat,
}

impl JStructure {
    pub fn new(pairs: usize) -> Self {
        JStructure {
            pairs,
            matrix: j_matrix(pairs),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizabilityReport {
    pub residual_dyn: f64,
    pub residual_out: f64,
    pub residual_feed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl RealizabilityReport {
    pub fn max_residual(&self) -> f64 {
        self.residual_dyn.max(self.residual_out).max(self.residual_feed)
    }
}

pub fn check_realizable(ss: &StateSpace) -> RealizabilityReport {
    check_realizable_with(ss, &Tolerances::default())
}

pub fn check_realizable_with(ss: &StateSpace, tol: &Tolerances) -> RealizabilityReport {
    let j = j_matrix(ss.n());
    let jm = j_matrix(ss.m());
    let (a, b, c, d) = (ss.a(), ss.b(), ss.c(), ss.d());
    let residual_dyn = fro(&(a * &j + &j * dagger(a) + b * &jm * dagger(b)));
    let residual_out = fro(&(&j * dagger(c) + b * &jm * dagger(d)));
    let residual_feed = fro(&(d * &jm * dagger(d) - &jm));
    let tolerance = tol.realizability * fro(a).max(1.0);
    RealizabilityReport {
        residual_dyn,
        residual_out,
        residual_feed,
        tolerance,
        pass: residual_dyn < tolerance && residual_out < tolerance && residual_feed < tolerance,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymplecticReport {
    pub max_residual: f64,
    pub worst_s: [f64; 2],
    pub points: usize,
    pub pass: bool,
}

/// Max over `grid` of `|G(s*)^H J G(-s) - J|_F`.
pub fn check_symplectic_tf<G: FrequencyResponse + ?Sized>(g: &G, grid: &[C64]) -> Result<SymplecticReport> {
    check_symplectic_tf_with(g, grid, &Tolerances::default())
}

pub fn check_symplectic_tf_with<G: FrequencyResponse + ?Sized>(
    g: &G,
    grid: &[C64],
    tol: &Tolerances,
) -> Result<SymplecticReport> {
    let p = g.ports();
    if p % 2 != 0 {
        return Err(Error::Dimension(format!("{p} ports is not a doubled-up count")));
    }
    let jm = j_matrix(p / 2);
    let mut worst = (0.0, C64::new(0.0, 0.0));
    for &s in grid {
        let lhs = dagger(&g.response(s.conj())?) * &jm * g.response(-s)?;
        let r = fro(&(lhs - &jm));
        if r > worst.0 || r.is_nan() {
            worst = (r, s);
        }
    }
    Ok(SymplecticReport {
        max_residual: worst.0,
        worst_s: [worst.1.re, worst.1.im],
        points: grid.len(),
        pass: worst.0 < tol.symplectic,
    })
}

/// `points` evenly spaced values `i*w` with `w` in `[start, stop]`.
pub fn imaginary_axis_grid(start: f64, stop: f64, points: usize) -> Vec<C64> {
    if points == 1 {
        return vec![C64::new(0.0, start)];
    }
    (0..points)
        .map(|k| C64::new(0.0, start + (stop - start) * k as f64 / (points - 1) as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformConditions {
    pub eigen_ok: bool,
    pub d_ok: bool,
    pub min_pair_sum: f64,
    pub eigen_threshold: f64,
    pub unitary_residual: f64,
    pub feed_residual: f64,
    pub eigenvalues: Vec<[f64; 2]>,
}

pub fn check_transform_conditions(ss: &StateSpace) -> Result<TransformConditions> {
    check_transform_conditions_with(ss, &Tolerances::default())
}

pub fn check_transform_conditions_with(ss: &StateSpace, tol: &Tolerances) -> Result<TransformConditions> {
    let ev = eigenvalues(ss.a())?;
    let mut min_pair = f64::INFINITY;
    for li in &ev {
        for lj in &ev {
            min_pair = min_pair.min((li + lj.conj()).norm());
        }
    }
    let threshold = tol.eigen_pair * fro(ss.a());
    let d = ss.d();
    let jm = j_matrix(ss.m());
    let unitary_residual = fro(&(dagger(d) * d - identity(d.nrows())));
    let feed_residual = fro(&(d * &jm * dagger(d) - &jm));
    Ok(TransformConditions {
        eigen_ok: ev.is_empty() || min_pair > threshold,
        d_ok: unitary_residual < tol.unitary && feed_residual < tol.unitary,
        min_pair_sum: if ev.is_empty() { 0.0 } else { min_pair },
        eigen_threshold: threshold,
        unitary_residual,
        feed_residual,
        eigenvalues: ev.iter().map(|z| [z.re, z.im]).collect(),
    })
}

fn require_conditions(ss: &StateSpace, tol: &Tolerances) -> Result<TransformConditions> {
    let tc = check_transform_conditions_with(ss, tol)?;
    if !tc.eigen_ok {
        return Err(Error::EigenPairCondition {
            min_pair_sum: tc.min_pair_sum,
        });
    }
    if tc.unitary_residual >= tol.unitary {
        return Err(Error::NotUnitary {
            residual: tc.unitary_residual,
        });
    }
    if tc.feed_residual >= tol.unitary {
        return Err(Error::NotSymplectic {
            residual: tc.feed_residual,
        });
    }
    Ok(tc)
}

/// Hermitian `X` with `A X + X A^H + B J B^H = 0`, checked against `X C^H + B J D^H = 0`.
pub fn solve_x(ss: &StateSpace) -> Result<CMat> {
    solve_x_with(ss, &Tolerances::default())
}

pub fn solve_x_with(ss: &StateSpace, tol: &Tolerances) -> Result<CMat> {
    require_conditions(ss, tol)?;
    let ns = ss.a().nrows();
    if ns == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let (a, b, c, d) = (ss.a(), ss.b(), ss.c(), ss.d());
    let jm = j_matrix(ss.m());
    let op = kron(&identity(ns), a) + kron(&conj(a), &identity(ns));
    let rhs = -(b * &jm * dagger(b));
    let v = solve(&op, &CMat::from_column_slice(ns * ns, 1, vec_of(&rhs).as_slice())).ok_or(Error::SingularSylvester)?;
    let x = unvec(&v.column(0).into_owned(), ns, ns);
    let nx = fro(&x);
    let asym = fro(&(&x - dagger(&x)));
    if asym >= tol.x_asymmetry * nx.max(1.0) {
        return Err(Error::NonHermitianX { residual: asym });
    }
    let x = (&x + dagger(&x)).scale(0.5);
    let res = fro(&(&x * dagger(c) + b * &jm * dagger(d)));
    let scale = (nx * fro(c) + fro(b) * fro(d)).max(1.0);
    if res >= tol.output_constraint * scale {
        return Err(Error::OutputConstraint { residual: res });
    }
    Ok(x)
}

/// `T` with `T J T^H = X`.
///
/// Columns are eigenvectors scaled by `|lambda|^{1/2}`, placed in the
/// `(+, -, +, -, ...)` slots in order of their dominant row, each phased so
/// its largest entry is real positive; the last column is then rotated so
/// that `det T > 0`.
pub fn j_factorize(x: &CMat) -> Result<CMat> {
    j_factorize_with(x, &Tolerances::default())
}

pub fn j_factorize_with(x: &CMat, tol: &Tolerances) -> Result<CMat> {
    let ns = x.nrows();
    if ns % 2 != 0 || x.ncols() != ns {
        return Err(Error::Dimension(format!("X is {}x{}", x.nrows(), x.ncols())));
    }
    if ns == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let nx = fro(x);
    let (lam, v) = hermitian_eig(x);
    let min_abs = lam.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    if min_abs <= tol.inertia * nx {
        return Err(Error::SingularX { min_abs });
    }
    let positive = lam.iter().filter(|&&l| l > 0.0).count();
    let negative = ns - positive;
    if positive != ns / 2 {
        return Err(Error::Inertia {
            positive,
            negative,
            expected: ns / 2,
        });
    }
    let dominant_row = |k: usize| -> usize {
        let col = v.column(k);
        let mut best = 0;
        for i in 0..ns {
            if col[i].norm() > col[best].norm() + 1e-12 {
                best = i;
            }
        }
        best
    };
    let mut pos: Vec<usize> = (0..ns).filter(|&k| lam[k] > 0.0).collect();
    let mut neg: Vec<usize> = (0..ns).filter(|&k| lam[k] < 0.0).collect();
    pos.sort_by_key(|&k| dominant_row(k));
    neg.sort_by_key(|&k| dominant_row(k));
    let mut t = CMat::zeros(ns, ns);
    for (slot, &k) in pos.iter().enumerate().map(|(i, k)| (2 * i, k)).chain(neg.iter().enumerate().map(|(i, k)| (2 * i + 1, k))) {
        let col = v.column(k);
        let top = dominant_row(k);
        let phase = if col[top].norm() > 0.0 { col[top].conj() / col[top].norm() } else { C64::new(1.0, 0.0) };
        let f = lam[k].abs().sqrt();
        for i in 0..ns {
            t[(i, slot)] = col[i] * phase * f;
        }
    }
    let det = t.clone().lu().determinant();
    if det.norm() > 0.0 {
        let rot = det.conj() / det.norm();
        for i in 0..ns {
            t[(i, ns - 1)] *= rot;
        }
    }
    let res = fro(&(&t * j_matrix(ns / 2) * dagger(&t) - x));
    if res >= tol.factorization * nx {
        return Err(Error::Factorization { residual: res });
    }
    Ok(t)
}

/// `|T J T^H - X|_F`.
pub fn factorization_residual(t: &CMat, x: &CMat) -> f64 {
    fro(&(t * j_matrix(t.nrows() / 2) * dagger(t) - x))
}

#[derive(Clone, Debug)]
pub struct Transformed {
    pub ss: StateSpace,
    pub x: CMat,
    pub t: CMat,
    pub report: RealizabilityReport,
}

/// Applies `(T^-1 A T, T^-1 B, C T, D)` with `T` from the J-factorization of `X`.
pub fn transform_to_realizable(ss: &StateSpace) -> Result<Transformed> {
    transform_to_realizable_with(ss, &Tolerances::default())
}

pub fn transform_to_realizable_with(ss: &StateSpace, tol: &Tolerances) -> Result<Transformed> {
    let x = solve_x_with(ss, tol)?;
    let t = j_factorize_with(&x, tol)?;
    apply_transform(ss, x, t, tol)
}

/// Transforms with a caller-supplied `T`, verifying `T J T^H = X` first.
pub fn transform_with_t(ss: &StateSpace, t: &CMat, tol: &Tolerances) -> Result<Transformed> {
    let x = solve_x_with(ss, tol)?;
    let res = factorization_residual(t, &x);
    if res >= tol.factorization * fro(&x) {
        return Err(Error::Factorization { residual: res });
    }
    apply_transform(ss, x, t.clone(), tol)
}

fn apply_transform(ss: &StateSpace, x: CMat, t: CMat, tol: &Tolerances) -> Result<Transformed> {
    if inverse(&t).is_none() && t.nrows() > 0 {
        return Err(Error::Numerical("J-factor is singular".into()));
    }
    let out = ss.similarity(&t)?;
    let report = check_realizable_with(&out, tol);
    if !report.pass {
        return Err(Error::NotRealizable {
            residual: report.max_residual(),
        });
    }
    Ok(Transformed { ss: out, x, t, report })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub residual: f64,
    /// Per-mode sign `s_k` in `x^# = diag(s_k [[0,1],[1,0]]) x`.
    pub pair_signs: Vec<f64>,
    pub pass: bool,
}

fn symmetry_residual(ss: &StateSpace, signs: &[f64]) -> f64 {
    let pi = signed_sigma(signs);
    let sm = sigma_matrix(ss.m());
    let (a, b, c, d) = (ss.a(), ss.b(), ss.c(), ss.d());
    let ra = fro(&(a - &pi * conj(a) * &pi));
    let rb = fro(&(b - &pi * conj(b) * &sm));
    let rc = fro(&(c - &sm * conj(c) * &pi));
    let rd = fro(&(d - &sm * conj(d) * &sm));
    (ra * ra + rb * rb + rc * rc + rd * rd).sqrt()
}

/// Deviation from conjugate-pair structure, minimized over per-mode pair signs.
pub fn check_doubled_up_symmetry(ss: &StateSpace) -> SymmetryReport {
    let n = ss.n();
    let scale = fro(ss.a()).max(fro(ss.b())).max(fro(ss.c())).max(1.0);
    let tol = Tolerances::default().realizability * scale;
    let mut best = (f64::INFINITY, vec![1.0; n]);
    if n <= 10 {
        for mask in 0..(1u32 << n) {
            let signs: Vec<f64> = (0..n).map(|k| if mask & (1 << k) != 0 { -1.0 } else { 1.0 }).collect();
            let r = symmetry_residual(ss, &signs);
            if r < best.0 {
                best = (r, signs);
            }
        }
    } else {
        let mut signs = vec![1.0; n];
        for k in 0..n {
            let plus = symmetry_residual(ss, &signs);
            signs[k] = -1.0;
            if symmetry_residual(ss, &signs) >= plus {
                signs[k] = 1.0;
            }
        }
        best = (symmetry_residual(ss, &signs), signs);
    }
    SymmetryReport {
        residual: best.0,
        pass: best.0 < tol,
        pair_signs: best.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re, ZERO};

    fn eq13() -> StateSpace {
        StateSpace::new(identity(2).scale(2.0), identity(2), identity(2).scale(4.0), identity(2)).unwrap()
    }

    #[test]
    fn minimal_filter_is_not_realizable() {
        let r = check_realizable(&eq13());
        assert!(!r.pass);
        assert!((r.residual_dyn - 5.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn x_for_minimal_filter() {
        let x = solve_x(&eq13()).unwrap();
        let expect = j_matrix(1).scale(-0.25);
        assert!(fro(&(x - expect)) < 1e-14);
    }

    #[test]
    fn j_factor_canonical_cases() {
        let t = j_factorize(&j_matrix(2)).unwrap();
        assert!(fro(&(t - identity(4))) < 1e-14);
        let x = CMat::from_row_slice(2, 2, &[re(2.0), ZERO, ZERO, re(-8.0)]);
        let t = j_factorize(&x).unwrap();
        assert!((t[(0, 0)] - re(2f64.sqrt())).norm() < 1e-14);
        assert!((t[(1, 1)] - re(8f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn wrong_inertia() {
        let x = identity(2);
        assert!(matches!(j_factorize(&x), Err(Error::Inertia { .. })));
        let x = CMat::from_row_slice(2, 2, &[re(1.0), ZERO, ZERO, re(0.0)]);
        assert!(matches!(j_factorize(&x), Err(Error::SingularX { .. })));
    }

    #[test]
    fn degenerate_eigen_pair() {
        let a = CMat::from_row_slice(2, 2, &[re(1.0), ZERO, ZERO, re(-1.0)]);
        let ss = StateSpace::new(a, identity(2), identity(2), identity(2)).unwrap();
        let tc = check_transform_conditions(&ss).unwrap();
        assert!(!tc.eigen_ok);
        assert!(tc.d_ok);
    }

    #[test]
    fn non_unitary_and_non_symplectic_d() {
        let d = identity(2).scale(2.0);
        let ss = StateSpace::static_gain(d).unwrap();
        assert!(!check_transform_conditions(&ss).unwrap().d_ok);
        let d = CMat::from_row_slice(2, 2, &[ZERO, re(1.0), re(1.0), ZERO]);
        let ss = StateSpace::new(identity(2), identity(2), identity(2), d).unwrap();
        assert!(matches!(solve_x(&ss), Err(Error::NotSymplectic { .. })));
    }

    #[test]
    fn static_identity_passes() {
        let ss = StateSpace::static_gain(identity(2)).unwrap();
        assert!(check_realizable(&ss).pass);
        assert!(check_doubled_up_symmetry(&ss).pass);
    }

    #[test]
    fn random_a_breaks_symmetry() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.3), re(0.2), c(0.0, 0.7), re(-0.4)]);
        let ss = StateSpace::new(a, identity(2), identity(2), identity(2)).unwrap();
        assert!(!check_doubled_up_symmetry(&ss).pass);
    }
}
