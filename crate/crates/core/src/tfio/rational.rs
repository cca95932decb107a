//! Rational functions of `s` with complex coefficients.

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE};

use super::poly::Poly;

/// Relative tolerance for deciding that `s` sits on a pole.
pub const POLE_TOL: f64 = 1e-12;

/// Coefficient tolerance for common-factor cancellation.
pub const GCD_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if !num.is_finite() || !den.is_finite() {
            return Err(Error::NonFinite("rational function coefficients".into()));
        }
        Ok(RationalFunction { num, den })
    }

    /// Builds from ascending coefficient lists.
    pub fn from_coeffs(num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        Self::new(Poly::new(num), Poly::new(den))
    }

    pub fn constant(c: C64) -> Self {
        RationalFunction {
            num: Poly::constant(c),
            den: Poly::constant(ONE),
        }
    }

    pub fn zero() -> Self {
        RationalFunction {
            num: Poly::zero(),
            den: Poly::constant(ONE),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when `deg num <= deg den`.
    pub fn is_proper(&self) -> bool {
        match self.num.degree() {
            None => true,
            Some(d) => d <= self.den.degree().unwrap_or(0),
        }
    }

    /// `lim_{s -> inf}` for a proper function.
    pub fn limit_at_infinity(&self) -> C64 {
        if self.num.degree() == self.den.degree() && !self.num.is_zero() {
            self.num.leading() / self.den.leading()
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// True when `|den(s)|` is within `POLE_TOL` of the denominator's magnitude scale at `s`.
    pub fn near_pole(&self, s: C64) -> bool {
        self.den.eval(s).norm() <= POLE_TOL * self.den.magnitude_bound(s)
    }

    /// Evaluates at `s`; `None` on a pole.
    pub fn eval(&self, s: C64) -> Option<C64> {
        if self.near_pole(s) {
            None
        } else {
            Some(self.num.eval(s) / self.den.eval(s))
        }
    }

    /// Cancels common polynomial factors.
    pub fn reduce(&self) -> Self {
        if self.num.is_zero() {
            return RationalFunction::zero();
        }
        let g = Poly::gcd(&self.num, &self.den, GCD_TOL);
        if g.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let (n, _) = self.num.divrem(&g);
        let (d, _) = self.den.divrem(&g);
        RationalFunction { num: n, den: d }
    }

    /// Coefficient-conjugate image, the creation-row partner of an annihilation-row entry.
    pub fn sharp(&self) -> Self {
        RationalFunction {
            num: self.num.conj_coeffs(),
            den: self.den.conj_coeffs(),
        }
    }

    /// `g(k s)`.
    pub fn scale_variable(&self, k: C64) -> Self {
        RationalFunction {
            num: self.num.scale_variable(k),
            den: self.den.scale_variable(k),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return RationalFunction {
                num: self.num.add(&o.num),
                den: self.den.clone(),
            };
        }
        RationalFunction {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: self.num.scale(C64::new(-1.0, 0.0)),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        RationalFunction {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.num.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(RationalFunction {
            num: self.num.mul(&o.den),
            den: self.den.mul(&o.num),
        })
    }

    /// Renders an expression that the parser maps back to identical coefficients.
    pub fn to_expression(&self) -> String {
        format!("({})/({})", poly_expr(&self.num), poly_expr(&self.den))
    }
}

fn lit(x: f64) -> String {
    let s = format!("{x:?}");
    if x < 0.0 {
        format!("({s})")
    } else {
        s
    }
}

fn coeff_expr(z: C64) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => lit(z.re),
        (true, false) => format!("{}*i", lit(z.im)),
        (false, false) => format!("({} + {}*i)", lit(z.re), lit(z.im)),
    }
}

fn poly_expr(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let terms: Vec<String> = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &c)| match k {
            0 => coeff_expr(c),
            1 => format!("{}*s", coeff_expr(c)),
            _ => format!("{}*s^{k}", coeff_expr(c)),
        })
        .collect();
    terms.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn sharp_conjugates_coefficients() {
        let g = RationalFunction::from_coeffs(vec![c(1.0, 0.0)], vec![c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        let h = g.sharp();
        assert_eq!(h.den().coeffs(), &[c(0.0, -1.0), c(1.0, 0.0)]);
    }

    #[test]
    fn pole_is_detected() {
        let g = RationalFunction::from_coeffs(vec![c(1.0, 0.0)], vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(g.eval(c(-1.0, 0.0)).is_none());
        assert!(g.eval(c(-1.0 + 1e-6, 0.0)).is_some());
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(
            RationalFunction::from_coeffs(vec![c(1.0, 0.0)], vec![]),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn limit_at_infinity() {
        let g = RationalFunction::from_coeffs(vec![c(-1.0, 0.0), c(2.0, 0.0)], vec![c(1.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert_eq!(g.limit_at_infinity(), c(0.5, 0.0));
    }
}
