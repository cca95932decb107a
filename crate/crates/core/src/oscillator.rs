//! Generalized open oscillators `(S, L = K x, H = x^H Omega x)` and the
//! quadrature/ladder basis maps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{conj, dagger, fro, identity, j_matrix, signed_sigma, CMat, C64, I, ONE, ZERO};
use crate::realizability::check_realizable_with;
use crate::statespace::StateSpace;
use crate::tolerance::Tolerances;

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedOpenOscillator {
    s: CMat,
    k: CMat,
    omega: CMat,
}

impl GeneralizedOpenOscillator {
    /// Validates shapes, unitarity of `S` and Hermiticity of `Omega`.
    pub fn new(s: CMat, k: CMat, omega: CMat) -> Result<Self> {
        let m = s.nrows();
        let ns = omega.nrows();
        if s.ncols() != m || m == 0 {
            return Err(Error::Dimension(format!("S is {}x{}", s.nrows(), s.ncols())));
        }
        if omega.ncols() != ns || ns % 2 != 0 {
            return Err(Error::Dimension(format!("Omega is {}x{}", omega.nrows(), omega.ncols())));
        }
        if k.shape() != (m, ns) {
            return Err(Error::Dimension(format!("K is {}x{}, expected {m}x{ns}", k.nrows(), k.ncols())));
        }
        let herm = fro(&(&omega - dagger(&omega)));
        if herm > HERMITIAN_TOL * fro(&omega).max(1.0) {
            return Err(Error::Invariant(format!("Omega is not Hermitian (residual {herm:.3e})")));
        }
        let un = fro(&(dagger(&s) * &s - identity(m)));
        if un > UNITARY_TOL {
            return Err(Error::Invariant(format!("S is not unitary (residual {un:.3e})")));
        }
        Ok(GeneralizedOpenOscillator { s, k, omega })
    }

    pub fn s(&self) -> &CMat {
        &self.s
    }
    pub fn k(&self) -> &CMat {
        &self.k
    }
    pub fn omega(&self) -> &CMat {
        &self.omega
    }
    pub fn n(&self) -> usize {
        self.omega.nrows() / 2
    }
    pub fn m(&self) -> usize {
        self.s.nrows()
    }
}

/// Constant maps between quadrature and ladder coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisMaps {
    pub u: CMat,
    pub theta: CMat,
    pub p: CMat,
}

/// `U_1 = (1/sqrt 2) [[1, i], [1, -i]]`.
pub fn u1() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[C64::new(h, 0.0), C64::new(0.0, h), C64::new(h, 0.0), C64::new(0.0, -h)])
}

/// `Theta_1 = [[0, 1], [-1, 0]]`.
pub fn theta1() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO])
}

fn repeat_block(b: &CMat, n: usize) -> CMat {
    crate::linalg::block_diag(&vec![b.clone(); n])
}

/// Interleaved-to-grouped permutation: `P (a1, a1^H, ..., am, am^H) = (a1, ..., am, a1^H, ..., am^H)`.
pub fn interleave_permutation(m: usize) -> CMat {
    let mut p = CMat::zeros(2 * m, 2 * m);
    for k in 0..m {
        p[(k, 2 * k)] = ONE;
        p[(m + k, 2 * k + 1)] = ONE;
    }
    p
}

impl BasisMaps {
    pub fn new(n: usize, m: usize) -> Self {
        BasisMaps {
            u: repeat_block(&u1(), n),
            theta: repeat_block(&theta1(), n),
            p: interleave_permutation(m),
        }
    }

    /// `|Theta + i U^H J U|_F`.
    pub fn theta_identity_residual(&self) -> f64 {
        let n = self.u.nrows() / 2;
        fro(&(&self.theta - (dagger(&self.u) * j_matrix(n) * &self.u).map(|z| -I * z)))
    }
}

/// `S_kl = D_{2k,2l}`, `K = [I 0] P C`, `Omega = (i/4)(J A - A^H J)`.
pub fn extract_slh(ss: &StateSpace) -> Result<GeneralizedOpenOscillator> {
    extract_slh_with(ss, &Tolerances::default())
}

pub fn extract_slh_with(ss: &StateSpace, tol: &Tolerances) -> Result<GeneralizedOpenOscillator> {
    let rep = check_realizable_with(ss, tol);
    if !rep.pass {
        return Err(Error::NotRealizable {
            residual: rep.max_residual(),
        });
    }
    let (m, n) = (ss.m(), ss.n());
    let d = ss.d();
    let s = CMat::from_fn(m, m, |k, l| d[(2 * k, 2 * l)]);
    let pc = interleave_permutation(m) * ss.c();
    let k = pc.rows(0, m).into_owned();
    let j = j_matrix(n);
    let a = ss.a();
    let omega = (&j * a - dagger(a) * &j).map(|z| z * I * 0.25);
    let omega = (&omega + dagger(&omega)).scale(0.5);
    GeneralizedOpenOscillator::new(s, k, omega)
}

/// How the creation rows of `C` relate to `K`.
#[derive(Clone, Debug, PartialEq)]
pub enum PairConvention {
    /// `x = (a, a^H; ...)`, creation row `conj(K) Sigma`.
    Standard,
    /// `x = (a, -a^H; ...)`, creation row `-conj(K) Sigma`.
    Alternating,
    /// Per-mode signs `s_k`, creation row `conj(K) diag(s_k Sigma_1)`.
    Signs(Vec<f64>),
}

impl PairConvention {
    fn signs(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            PairConvention::Standard => Ok(vec![1.0; n]),
            PairConvention::Alternating => Ok(vec![-1.0; n]),
            PairConvention::Signs(s) if s.len() == n && s.iter().all(|v| v.abs() == 1.0) => Ok(s.clone()),
            PairConvention::Signs(s) => Err(Error::InvalidParameter(format!(
                "pair signs {s:?} do not match {n} modes"
            ))),
        }
    }
}

/// Builds a realizable state space from `(S, K, Omega)` using the alternating pair convention.
pub fn slh_to_ss(goo: &GeneralizedOpenOscillator) -> Result<StateSpace> {
    slh_to_ss_with(goo, &PairConvention::Alternating)
}

/// `D = S (+) conj(S)`, `C` from `K` and the pair convention,
/// `B = -J C^H D J`, `A = -B J B^H J / 2 - 2i J Omega`.
pub fn slh_to_ss_with(goo: &GeneralizedOpenOscillator, conv: &PairConvention) -> Result<StateSpace> {
    let (m, n) = (goo.m(), goo.n());
    let signs = conv.signs(n)?;
    let pi = signed_sigma(&signs);
    let mut d = CMat::zeros(2 * m, 2 * m);
    for k in 0..m {
        for l in 0..m {
            d[(2 * k, 2 * l)] = goo.s[(k, l)];
            d[(2 * k + 1, 2 * l + 1)] = goo.s[(k, l)].conj();
        }
    }
    let kbar = conj(&goo.k) * &pi;
    let mut c = CMat::zeros(2 * m, 2 * n);
    for k in 0..m {
        c.row_mut(2 * k).copy_from(&goo.k.row(k));
        c.row_mut(2 * k + 1).copy_from(&kbar.row(k));
    }
    let j = j_matrix(n);
    let jm = j_matrix(m);
    let b = -(&j * dagger(&c) * &d * &jm);
    let a = -(&b * &jm * dagger(&b) * &j).scale(0.5) - (&j * &goo.omega).map(|z| z * I * 2.0);
    StateSpace::new(a, b, c, d)
}

/// `Omega_r = (-Theta A_r + A_r^T Theta) / 4`.
pub fn hamiltonian_matrix_quadrature(a_r: &nalgebra::DMatrix<f64>) -> nalgebra::DMatrix<f64> {
    let n = a_r.nrows() / 2;
    let th = real_theta(n);
    (-&th * a_r + a_r.transpose() * &th) * 0.25
}

fn real_theta(n: usize) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i / 2 != j / 2 {
            0.0
        } else if i % 2 == 0 && j == i + 1 {
            1.0
        } else if i % 2 == 1 && j + 1 == i {
            -1.0
        } else {
            0.0
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisDirection {
    LadderToQuadrature,
    QuadratureToLadder,
}

/// With `x = U x_r`: `A = U A_r U^H`, `B = U B_r U_m^H`, `C = U_m C_r U^H`, `D = U_m D_r U_m^H`.
pub fn convert_basis(ss: &StateSpace, dir: BasisDirection) -> Result<StateSpace> {
    let u = repeat_block(&u1(), ss.n());
    let um = repeat_block(&u1(), ss.m());
    let (a, b, c, d) = (ss.a(), ss.b(), ss.c(), ss.d());
    let out = match dir {
        BasisDirection::LadderToQuadrature => StateSpace::new(
            dagger(&u) * a * &u,
            dagger(&u) * b * &um,
            dagger(&um) * c * &u,
            dagger(&um) * d * &um,
        )?,
        BasisDirection::QuadratureToLadder => StateSpace::new(
            &u * a * dagger(&u),
            &u * b * dagger(&um),
            &um * c * dagger(&u),
            &um * d * dagger(&um),
        )?,
    };
    Ok(out.with_scale(ss.scale()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Internal,
    Coupling,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HamiltonianTerm {
    pub kind: TermKind,
    /// Operator product, e.g. `a1^H a2` or `a1 u2^H`.
    pub operators: String,
    #[serde(with = "crate::tfio::cx")]
    pub coefficient: C64,
}

/// Normal-ordered quadratic terms of `x^H Omega x` plus the coupling terms of `i sum_k (L_k^H u_k - L_k u_k^H)`.
///
/// Terms whose coefficient is below `1e-14` times the largest entry are dropped;
/// vacuum constants from reordering are ignored.
pub fn total_hamiltonian_terms(goo: &GeneralizedOpenOscillator) -> Vec<HamiltonianTerm> {
    let (n, m) = (goo.n(), goo.m());
    let o = &goo.omega;
    let k = &goo.k;
    let scale = crate::linalg::max_abs(o).max(crate::linalg::max_abs(k));
    let cut = 1e-14 * scale;
    let mut out = Vec::new();
    let mut push = |kind, operators: String, c: C64| {
        if c.norm() > cut {
            out.push(HamiltonianTerm {
                kind,
                operators,
                coefficient: c,
            });
        }
    };
    let a = |j: usize| format!("a{}", j + 1);
    let ad = |j: usize| format!("a{}^H", j + 1);
    for p in 0..n {
        for q in 0..n {
            let c = o[(2 * p, 2 * q)] + o[(2 * q + 1, 2 * p + 1)];
            push(TermKind::Internal, format!("{} {}", ad(p), a(q)), c);
        }
    }
    for p in 0..n {
        for q in p..n {
            let c = if p == q {
                o[(2 * p, 2 * p + 1)]
            } else {
                o[(2 * p, 2 * q + 1)] + o[(2 * q, 2 * p + 1)]
            };
            push(TermKind::Internal, format!("{} {}", ad(p), ad(q)), c);
            let c = if p == q {
                o[(2 * p + 1, 2 * p)]
            } else {
                o[(2 * p + 1, 2 * q)] + o[(2 * q + 1, 2 * p)]
            };
            push(TermKind::Internal, format!("{} {}", a(p), a(q)), c);
        }
    }
    for ch in 0..m {
        let u = format!("u{}", ch + 1);
        let ud = format!("u{}^H", ch + 1);
        for j in 0..n {
            let alpha = k[(ch, 2 * j)];
            let beta = k[(ch, 2 * j + 1)];
            push(TermKind::Coupling, format!("{} {}", ad(j), u), I * alpha.conj());
            push(TermKind::Coupling, format!("{} {}", a(j), u), I * beta.conj());
            push(TermKind::Coupling, format!("{} {}", a(j), ud), -I * alpha);
            push(TermKind::Coupling, format!("{} {}", ad(j), ud), -I * beta);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    #[test]
    fn theta_identity() {
        for n in 1..4 {
            assert!(BasisMaps::new(n, 1).theta_identity_residual() < 1e-15);
        }
    }

    #[test]
    fn permutation_shapes() {
        for m in 1..=3 {
            let p = interleave_permutation(m);
            assert_eq!(&p * p.transpose(), identity(2 * m));
            let x = CMat::from_fn(2 * m, 1, |i, _| re(i as f64));
            let y = &p * x;
            for k in 0..m {
                assert_eq!(y[(k, 0)], re((2 * k) as f64));
                assert_eq!(y[(m + k, 0)], re((2 * k + 1) as f64));
            }
        }
    }

    #[test]
    fn quadrature_hamiltonian_examples() {
        let th = real_theta(1);
        let o = hamiltonian_matrix_quadrature(&th);
        assert!((o - nalgebra::DMatrix::<f64>::identity(2, 2) * 0.5).norm() < 1e-15);
        let o = hamiltonian_matrix_quadrature(&nalgebra::DMatrix::<f64>::identity(2, 2));
        assert!(o.norm() < 1e-15);
    }

    #[test]
    fn closed_empty_system() {
        let goo = GeneralizedOpenOscillator::new(identity(1), CMat::zeros(1, 2), CMat::zeros(2, 2)).unwrap();
        let ss = slh_to_ss(&goo).unwrap();
        assert_eq!(fro(ss.a()) + fro(ss.b()) + fro(ss.c()), 0.0);
        assert_eq!(ss.d(), &identity(2));
    }

    #[test]
    fn detuned_cavity_round_trip() {
        let delta = 0.7;
        let omega = CMat::from_row_slice(2, 2, &[re(delta / 2.0), c(0.0, 0.0), c(0.0, 0.0), re(delta / 2.0)]);
        let k = CMat::from_row_slice(1, 2, &[re(1.3), c(0.0, 0.0)]);
        let goo = GeneralizedOpenOscillator::new(identity(1), k, omega).unwrap();
        let back = extract_slh(&slh_to_ss(&goo).unwrap()).unwrap();
        let o = back.omega();
        assert!(((o[(0, 0)] + o[(1, 1)]).re - delta).abs() < 1e-12);
    }

    #[test]
    fn invalid_omega_rejected() {
        let omega = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]);
        assert!(GeneralizedOpenOscillator::new(identity(1), CMat::zeros(1, 2), omega).is_err());
    }
}
