use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::grid::RationalGrid;
use super::parse::parse_rational;
use super::rational::RationalFunction;

/// Names that the expression grammar reserves.
const RESERVED: [&str; 3] = ["s", "i", "j"];

/// Transfer matrix as written in input files: the `u -> y` block and an optional `u^H -> y` block.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    m: usize,
    symbols: BTreeMap<String, f64>,
    entries: Vec<Vec<String>>,
    creation_entries: Option<Vec<Vec<String>>>,
    annihilation: RationalGrid,
    creation: Option<RationalGrid>,
}

#[derive(Serialize, Deserialize)]
struct TransferMatrixDoc {
    m: usize,
    #[serde(default)]
    symbols: BTreeMap<String, f64>,
    entries: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    creation_entries: Option<Vec<Vec<String>>>,
}

fn check_block(path: &str, m: usize, block: &[Vec<String>]) -> Result<()> {
    if block.len() != m {
        return Err(Error::schema(path, format!("expected {m} rows, found {}", block.len())));
    }
    for (i, row) in block.iter().enumerate() {
        if row.len() != m {
            return Err(Error::schema(
                format!("{path}[{i}]"),
                format!("expected {m} columns, found {}", row.len()),
            ));
        }
    }
    Ok(())
}

fn parse_block(path: &str, block: &[Vec<String>], symbols: &BTreeMap<String, f64>, reduce: bool) -> Result<RationalGrid> {
    let m = block.len();
    let mut out = Vec::with_capacity(m * m);
    for (i, row) in block.iter().enumerate() {
        for (j, text) in row.iter().enumerate() {
            let g = parse_rational(text, symbols, reduce).map_err(|e| match e {
                Error::Syntax { pos, msg } => Error::Syntax {
                    pos,
                    msg: format!("{path}[{i}][{j}]: {msg}"),
                },
                other => other,
            })?;
            out.push(g);
        }
    }
    RationalGrid::new(m, m, out)
}

impl TransferMatrix {
    /// Parses expression blocks. With `reduce`, common factors are cancelled entrywise.
    pub fn from_expressions(
        m: usize,
        symbols: BTreeMap<String, f64>,
        entries: Vec<Vec<String>>,
        creation_entries: Option<Vec<Vec<String>>>,
        reduce: bool,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::schema("m", "channel count must be positive"));
        }
        for (name, v) in &symbols {
            if RESERVED.contains(&name.as_str()) {
                return Err(Error::schema(format!("symbols.{name}"), "reserved name"));
            }
            if !v.is_finite() {
                return Err(Error::schema(format!("symbols.{name}"), "value must be finite"));
            }
        }
        check_block("entries", m, &entries)?;
        if let Some(c) = &creation_entries {
            check_block("creation_entries", m, c)
                .map_err(|e| Error::Dimension(format!("creation block does not match annihilation block: {e}")))?;
        }
        let annihilation = parse_block("entries", &entries, &symbols, reduce)?;
        let creation = match &creation_entries {
            Some(c) => Some(parse_block("creation_entries", c, &symbols, reduce)?),
            None => None,
        };
        Ok(TransferMatrix {
            m,
            symbols,
            entries,
            creation_entries,
            annihilation,
            creation,
        })
    }

    /// Builds from numeric blocks by rendering each entry as an expression.
    pub fn from_grids(annihilation: &RationalGrid, creation: Option<&RationalGrid>) -> Result<Self> {
        let m = annihilation.rows();
        let render = |g: &RationalGrid| -> Vec<Vec<String>> {
            (0..g.rows())
                .map(|i| (0..g.cols()).map(|j| g.get(i, j).to_expression()).collect())
                .collect()
        };
        Self::from_expressions(
            m,
            BTreeMap::new(),
            render(annihilation),
            creation.map(render),
            false,
        )
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn symbols(&self) -> &BTreeMap<String, f64> {
        &self.symbols
    }

    pub fn annihilation(&self) -> &RationalGrid {
        &self.annihilation
    }

    pub fn creation(&self) -> Option<&RationalGrid> {
        self.creation.as_ref()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TransferMatrixDoc = serde_json::from_str(text)?;
        Self::from_expressions(doc.m, doc.symbols, doc.entries, doc.creation_entries, false)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TransferMatrixDoc {
            m: self.m,
            symbols: self.symbols.clone(),
            entries: self.entries.clone(),
            creation_entries: self.creation_entries.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// Expands to the interleaved `2m x 2m` form.
///
/// Row `2i` holds `[G-_ij, G+_ij]` pairs and row `2i+1` holds their
/// coefficient-conjugate images `[G+_ij#, G-_ij#]`.
pub fn assemble_doubled_up(tm: &TransferMatrix) -> RationalGrid {
    let m = tm.m;
    let minus = &tm.annihilation;
    RationalGrid::from_fn(2 * m, 2 * m, |r, c| {
        let (i, j) = (r / 2, c / 2);
        let plus = || -> RationalFunction {
            tm.creation
                .as_ref()
                .map(|g| g.get(i, j).clone())
                .unwrap_or_else(RationalFunction::zero)
        };
        match (r % 2, c % 2) {
            (0, 0) => minus.get(i, j).clone(),
            (0, 1) => plus(),
            (1, 0) => plus().sharp(),
            _ => minus.get(i, j).sharp(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn filter() -> TransferMatrix {
        TransferMatrix::from_json(r#"{"m": 1, "symbols": {"s0": 1.0}, "entries": [["(s - s0)/(s + s0)"]]}"#).unwrap()
    }

    #[test]
    fn doubled_filter_is_diagonal() {
        let g = assemble_doubled_up(&filter());
        assert_eq!(g.get(0, 0), g.get(1, 1));
        assert!(g.get(0, 1).is_zero() && g.get(1, 0).is_zero());
    }

    #[test]
    fn evaluation_values() {
        let g = assemble_doubled_up(&filter());
        let e0 = g.evaluate(c(0.0, 0.0)).unwrap();
        assert_eq!(e0[(0, 0)], c(-1.0, 0.0));
        assert_eq!(e0[(1, 1)], c(-1.0, 0.0));
        let e1 = g.evaluate(c(1.0, 0.0)).unwrap();
        assert_eq!(e1[(0, 0)], c(0.0, 0.0));
        let ei = g.evaluate(c(0.0, 1.0)).unwrap();
        assert!((ei[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_channel() {
        let tm = TransferMatrix::from_json(r#"{"m": 1, "entries": [["1"]]}"#).unwrap();
        assert_eq!(assemble_doubled_up(&tm), RationalGrid::identity(2));
    }

    #[test]
    fn creation_block_dimension_mismatch() {
        let r = TransferMatrix::from_json(
            r#"{"m": 1, "entries": [["1"]], "creation_entries": [["0", "0"]]}"#,
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let tm = filter();
        let a = tm.to_json().unwrap();
        let b = TransferMatrix::from_json(&a).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }
}
