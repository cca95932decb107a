//! Numerical tolerances, all relative to the Frobenius norms named on each field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Realizability residuals, times `max(1, |A|)`.
    pub realizability: f64,
    /// Symplectic transfer residual (absolute, `D` is dimensionless).
    pub symplectic: f64,
    /// Eigenvalue pair sums, times `|A|`.
    pub eigen_pair: f64,
    /// `|D^H D - I|` and the feedthrough constraint.
    pub unitary: f64,
    /// Asymmetry of the Sylvester solution, times `max(1, |X|)`.
    pub x_asymmetry: f64,
    /// Output constraint on `X`, times `max(1, |X||C| + |B||D|)`.
    pub output_constraint: f64,
    /// Near-zero eigenvalues of `X`, times `|X|`.
    pub inertia: f64,
    /// `|T J T^H - X|`, times `|X|`.
    pub factorization: f64,
    /// Rank decisions, times the largest singular value.
    pub rank: f64,
    /// Smallest singular value of `-sI - A`, times `max(1, |A|)`.
    pub singular: f64,
    /// Relative distance at which two poles are treated as one.
    pub pole_cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            realizability: 1e-9,
            symplectic: 1e-8,
            eigen_pair: 1e-8,
            unitary: 1e-10,
            x_asymmetry: 1e-10,
            output_constraint: 1e-8,
            inertia: 1e-10,
            factorization: 1e-9,
            rank: 1e-10,
            singular: 1e-10,
            pole_cluster: 1e-7,
        }
    }
}

impl Tolerances {
    /// Overrides one tolerance by name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance `{name}` must be positive")));
        }
        let slot = match name {
            "realizability" => &mut self.realizability,
            "symplectic" => &mut self.symplectic,
            "eigen_pair" => &mut self.eigen_pair,
            "unitary" => &mut self.unitary,
            "x_asymmetry" => &mut self.x_asymmetry,
            "output_constraint" => &mut self.output_constraint,
            "inertia" => &mut self.inertia,
            "factorization" => &mut self.factorization,
            "rank" => &mut self.rank,
            "singular" => &mut self.singular,
            "pole_cluster" => &mut self.pole_cluster,
            _ => return Err(Error::InvalidParameter(format!("unknown tolerance `{name}`"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.realizability,
            self.symplectic,
            self.eigen_pair,
            self.unitary,
            self.x_asymmetry,
            self.output_constraint,
            self.inertia,
            self.factorization,
            self.rank,
            self.singular,
            self.pole_cluster,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("tolerances must be positive and finite".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_by_name() {
        let mut t = Tolerances::default();
        t.set("symplectic", 1e-6).unwrap();
        assert_eq!(t.symplectic, 1e-6);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("rank", -1.0).is_err());
    }
}
