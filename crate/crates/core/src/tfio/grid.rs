use crate::error::{Error, Result};
use crate::linalg::{fmt_c, CMat, C64};

use super::rational::RationalFunction;

/// Row-major matrix of rational functions.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalGrid {
    rows: usize,
    cols: usize,
    entries: Vec<RationalFunction>,
}

impl RationalGrid {
    pub fn new(rows: usize, cols: usize, entries: Vec<RationalFunction>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} grid",
                entries.len()
            )));
        }
        Ok(RationalGrid { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> RationalFunction) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        RationalGrid { rows, cols, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                RationalFunction::constant(C64::new(1.0, 0.0))
            } else {
                RationalFunction::zero()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[RationalFunction] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&RationalFunction) -> RationalFunction) -> Self {
        RationalGrid {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Entrywise evaluation; fails on the first entry with a pole at `s`.
    pub fn evaluate(&self, s: C64) -> Result<CMat> {
        let mut m = CMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self.get(i, j).eval(s).ok_or_else(|| Error::PoleProximity {
                    row: i,
                    col: j,
                    s: fmt_c(s),
                })?;
            }
        }
        Ok(m)
    }

    /// First improper entry, if any.
    pub fn first_improper(&self) -> Option<(usize, usize)> {
        (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .find(|&(i, j)| !self.get(i, j).is_proper())
    }

    /// Substitutes `s -> k s` in every entry.
    pub fn scale_variable(&self, k: C64) -> Self {
        self.map(|g| g.scale_variable(k))
    }
}
