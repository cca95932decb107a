//! Dense complex linear-algebra helpers shared by the numeric modules.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `J = diag(1, -1; ...; 1, -1)` with `pairs` conjugate pairs.
pub fn j_matrix(pairs: usize) -> CMat {
    CMat::from_fn(2 * pairs, 2 * pairs, |i, j| {
        if i != j {
            ZERO
        } else if i % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    })
}

/// Block-diagonal pair swap `diag([[0,1],[1,0]], ...)`.
pub fn sigma_matrix(pairs: usize) -> CMat {
    CMat::from_fn(2 * pairs, 2 * pairs, |i, j| {
        if i / 2 == j / 2 && i != j {
            ONE
        } else {
            ZERO
        }
    })
}

/// Block-diagonal `diag(s_k * [[0,1],[1,0]])` for per-pair signs.
pub fn signed_sigma(signs: &[f64]) -> CMat {
    let n = signs.len();
    CMat::from_fn(2 * n, 2 * n, |i, j| {
        if i / 2 == j / 2 && i != j {
            re(signs[i / 2])
        } else {
            ZERO
        }
    })
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Column-stacking vectorization.
pub fn vec_of(m: &CMat) -> DVector<C64> {
    DVector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvec(v: &DVector<C64>, rows: usize, cols: usize) -> CMat {
    CMat::from_iterator(rows, cols, v.iter().copied())
}

pub fn block_diag(blocks: &[CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), b.shape()).copy_from(b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Solve `a x = b` by LU; `None` when `a` is numerically singular.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    if a.nrows() == 0 {
        return Some(CMat::zeros(0, b.ncols()));
    }
    let x = a.clone().lu().solve(b)?;
    if all_finite(&x) {
        Some(x)
    } else {
        None
    }
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    solve(a, &identity(a.nrows()))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Thin SVD `(U, sigma, V^H)` with singular values sorted in descending order.
pub fn svd_sorted(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let mut svd = SVD::new(m.clone(), true, true);
    svd.sort_by_singular_values();
    let s = svd.singular_values.iter().copied().collect();
    (svd.u.unwrap(), s, svd.v_t.unwrap())
}

/// Numerical rank with tolerance `rel * sigma_max`.
pub fn rank(m: &CMat, rel: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&smax) if smax == 0.0 => 0,
        Some(&smax) => s.iter().filter(|&&x| x > rel * smax).count(),
    }
}

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues and unitary eigenvectors.
pub fn hermitian_eig(m: &CMat) -> (Vec<f64>, CMat) {
    if m.nrows() == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Orthonormal basis for the range of `m`, keeping directions above `tol`.
pub fn range_basis(m: &CMat, tol: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let (u, s, _) = svd_sorted(m);
    let r = s.iter().filter(|&&x| x > tol).count();
    u.columns(0, r).into_owned()
}

pub fn hstack(blocks: &[&CMat]) -> CMat {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut c0 = 0;
    for b in blocks {
        out.view_mut((0, c0), b.shape()).copy_from(*b);
        c0 += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&CMat]) -> CMat {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        out.view_mut((r0, 0), b.shape()).copy_from(*b);
        r0 += b.nrows();
    }
    out
}

/// Format a complex number compactly for messages.
pub fn fmt_c(z: C64) -> String {
    // Adding 0.0 turns -0.0 into 0.0 so printed output has no signed zeros.
    let z = C64::new(z.re + 0.0, z.im + 0.0);
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_squares_to_identity() {
        let j = j_matrix(3);
        assert_eq!(&j * &j, identity(6));
    }

    #[test]
    fn kron_vec_identity() {
        let a = CMat::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64));
        let x = CMat::from_fn(2, 2, |i, j| c(j as f64 - 0.5, i as f64));
        let lhs = vec_of(&(&a * &x));
        let rhs = kron(&identity(2), &a) * vec_of(&x);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let m = CMat::from_row_slice(2, 2, &[re(2.0), re(1.0), ZERO, c(0.0, 3.0)]);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(0.0, 3.0)).norm() < 1e-12);
        assert!((ev[1] - re(2.0)).norm() < 1e-12);
    }

    #[test]
    fn rank_detects_deficiency() {
        let m = CMat::from_row_slice(2, 2, &[ONE, re(2.0), re(2.0), re(4.0)]);
        assert_eq!(rank(&m, 1e-10), 1);
    }
}
