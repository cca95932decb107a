//! Complex polynomials in `s`, ascending coefficient order.

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, CMat, C64, ONE, ZERO};

/// Relative tolerance used to drop trailing (highest power) coefficients.
pub const TRIM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    /// Builds a polynomial, trimming leading coefficients below `TRIM_TOL` relative to the largest.
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim(TRIM_TOL);
        p
    }

    /// Builds a polynomial trimming only exact zeros.
    pub fn exact(coeffs: Vec<C64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim(0.0);
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Poly::exact(vec![c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Poly::exact(vec![ZERO, ONE])
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut p = Poly::constant(ONE);
        for &r in roots {
            p = p.mul(&Poly::exact(vec![-r, ONE]));
        }
        p
    }

    fn trim(&mut self, rel: f64) {
        let scale = self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        while let Some(last) = self.coeffs.last() {
            if last.norm() <= rel * scale || *last == ZERO {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn eval(&self, s: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * s + c)
    }

    /// `sum |c_k| |s|^k`, the scale against which `|p(s)|` is judged near zero.
    pub fn magnitude_bound(&self, s: C64) -> f64 {
        let r = s.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::exact((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::exact((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::exact(out)
    }

    pub fn scale(&self, k: C64) -> Poly {
        Poly::exact(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::constant(ONE), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self) -> Poly {
        Poly::exact(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// Coefficient-wise complex conjugate.
    pub fn conj_coeffs(&self) -> Poly {
        Poly::exact(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// `p(k s)`: coefficient `c_j` multiplied by `k^j`.
    pub fn scale_variable(&self, k: C64) -> Poly {
        let mut f = ONE;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c * f);
            f *= k;
        }
        Poly::exact(out)
    }

    /// `p(-s)`.
    pub fn reflect(&self) -> Poly {
        self.scale_variable(C64::new(-1.0, 0.0))
    }

    pub fn monic(&self) -> Poly {
        let l = self.leading();
        if l == ZERO {
            return self.clone();
        }
        self.scale(ONE / l)
    }

    /// Euclidean division; remainder trimmed relative to the dividend's scale.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = match d.degree() {
            Some(k) => k,
            None => return (Poly::zero(), self.clone()),
        };
        let mut r: Vec<C64> = self.coeffs.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let lead = d.leading();
        let mut q = vec![ZERO; r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = r[k + dd] / lead;
            q[k] = f;
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= f * dc;
            }
            r[k + dd] = ZERO;
        }
        r.truncate(dd);
        let scale = self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut rem = Poly::exact(r);
        let rs = rem.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if rs <= TRIM_TOL * scale {
            rem = Poly::zero();
        }
        (Poly::exact(q), rem)
    }

    /// Monic greatest common divisor by the Euclidean algorithm with relative tolerance `tol`.
    pub fn gcd(a: &Poly, b: &Poly, tol: f64) -> Poly {
        let mut x = a.monic();
        let mut y = b.monic();
        if x.degree() < y.degree() {
            std::mem::swap(&mut x, &mut y);
        }
        loop {
            if y.is_zero() {
                return x.monic();
            }
            let (_, r) = x.divrem(&y);
            let scale = x.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let rs = r.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            x = y;
            y = if rs <= tol * scale { Poly::zero() } else { r.monic() };
        }
    }

    /// Roots from the companion-matrix eigenvalues, refined by Newton steps.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let n = match self.degree() {
            None => return Err(Error::Numerical("roots of the zero polynomial".into())),
            Some(0) => return Ok(Vec::new()),
            Some(n) => n,
        };
        let m = self.monic();
        let comp = CMat::from_fn(n, n, |i, j| {
            if i == 0 {
                -m.coeffs[n - 1 - j]
            } else if i == j + 1 {
                ONE
            } else {
                ZERO
            }
        });
        let mut roots = eigenvalues(&comp)?;
        let dp = m.derivative();
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d.norm() == 0.0 {
                    break;
                }
                let cand = *r - m.eval(*r) / d;
                if m.eval(cand).norm() < m.eval(*r).norm() {
                    *r = cand;
                } else {
                    break;
                }
            }
        }
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }
}
