use serde::{Deserialize, Serialize};

use crate::dynamics::TwoModeModel;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::oscillator::GeneralizedOpenOscillator;
use crate::statespace::{Scale, StateSpace};
use crate::synthesis::PhysicalRealization;

pub const STATE_SPACE_FORMAT: &str = "qfilt.statespace";
pub const GOO_FORMAT: &str = "qfilt.goo";
pub const REALIZATION_FORMAT: &str = "qfilt.realization";
/// Marks `G(s) = C(-sI - A)^{-1} B + D` so models are not mixed with `(sI - A)` tools.
pub const SIGN_CONVENTION: &str = "paper_negative_s";

/// Row-major complex matrix with explicit dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

pub fn matrix_to_doc(m: &CMat) -> MatrixDoc {
    let mut data = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            data.push([z.re, z.im]);
        }
    }
    MatrixDoc {
        rows: m.nrows(),
        cols: m.ncols(),
        data,
    }
}

/// Converts and checks the declared shape against `expect`.
pub fn matrix_from_doc(doc: &MatrixDoc, path: &str, expect: (usize, usize)) -> Result<CMat> {
    if (doc.rows, doc.cols) != expect {
        return Err(Error::schema(
            path,
            format!("declared {}x{}, expected {}x{}", doc.rows, doc.cols, expect.0, expect.1),
        ));
    }
    if doc.data.len() != doc.rows * doc.cols {
        return Err(Error::schema(
            path,
            format!("{} entries for {}x{}", doc.data.len(), doc.rows, doc.cols),
        ));
    }
    if doc.data.iter().any(|[a, b]| !a.is_finite() || !b.is_finite()) {
        return Err(Error::schema(path, "non-finite entry"));
    }
    Ok(CMat::from_row_iterator(
        doc.rows,
        doc.cols,
        doc.data.iter().map(|&[a, b]| C64::new(a, b)),
    ))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateSpaceDoc {
    format: String,
    sign_convention: String,
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: MatrixDoc,
    #[serde(rename = "B")]
    b: MatrixDoc,
    #[serde(rename = "C")]
    c: MatrixDoc,
    #[serde(rename = "D")]
    d: MatrixDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<Scale>,
}

pub fn serialize_state_space(ss: &StateSpace) -> Result<String> {
    let doc = StateSpaceDoc {
        format: STATE_SPACE_FORMAT.into(),
        sign_convention: SIGN_CONVENTION.into(),
        n: ss.n(),
        m: ss.m(),
        a: matrix_to_doc(ss.a()),
        b: matrix_to_doc(ss.b()),
        c: matrix_to_doc(ss.c()),
        d: matrix_to_doc(ss.d()),
        scale: ss.scale(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

fn check_format(found: &str, want: &str) -> Result<()> {
    if found != want {
        return Err(Error::schema("format", format!("expected `{want}`, found `{found}`")));
    }
    Ok(())
}

pub fn deserialize_state_space(text: &str) -> Result<StateSpace> {
    let doc: StateSpaceDoc = serde_json::from_str(text)?;
    check_format(&doc.format, STATE_SPACE_FORMAT)?;
    if doc.sign_convention != SIGN_CONVENTION {
        return Err(Error::schema(
            "sign_convention",
            format!("expected `{SIGN_CONVENTION}`, found `{}`", doc.sign_convention),
        ));
    }
    let (ns, ms) = (2 * doc.n, 2 * doc.m);
    if doc.m == 0 {
        return Err(Error::schema("m", "channel count must be positive"));
    }
    let a = matrix_from_doc(&doc.a, "A", (ns, ns))?;
    let b = matrix_from_doc(&doc.b, "B", (ns, ms))?;
    let c = matrix_from_doc(&doc.c, "C", (ms, ns))?;
    let d = matrix_from_doc(&doc.d, "D", (ms, ms))?;
    if let Some(sc) = doc.scale {
        if !(sc.s0 > 0.0 && sc.s0.is_finite()) {
            return Err(Error::schema("scale.s0", "must be positive"));
        }
    }
    Ok(StateSpace::new(a, b, c, d)?.with_scale(doc.scale))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GooDoc {
    format: String,
    n: usize,
    m: usize,
    #[serde(rename = "S")]
    s: MatrixDoc,
    #[serde(rename = "K")]
    k: MatrixDoc,
    #[serde(rename = "Omega")]
    omega: MatrixDoc,
}

pub fn serialize_goo(goo: &GeneralizedOpenOscillator) -> Result<String> {
    let doc = GooDoc {
        format: GOO_FORMAT.into(),
        n: goo.n(),
        m: goo.m(),
        s: matrix_to_doc(goo.s()),
        k: matrix_to_doc(goo.k()),
        omega: matrix_to_doc(goo.omega()),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn deserialize_goo(text: &str) -> Result<GeneralizedOpenOscillator> {
    let doc: GooDoc = serde_json::from_str(text)?;
    check_format(&doc.format, GOO_FORMAT)?;
    let s = matrix_from_doc(&doc.s, "S", (doc.m, doc.m))?;
    let k = matrix_from_doc(&doc.k, "K", (doc.m, 2 * doc.n))?;
    let omega = matrix_from_doc(&doc.omega, "Omega", (2 * doc.n, 2 * doc.n))?;
    GeneralizedOpenOscillator::new(s, k, omega)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealizationDoc {
    format: String,
    #[serde(flatten)]
    body: PhysicalRealization,
}

pub fn serialize_realization(r: &PhysicalRealization) -> Result<String> {
    let doc = RealizationDoc {
        format: REALIZATION_FORMAT.into(),
        body: r.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn deserialize_realization(text: &str) -> Result<PhysicalRealization> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    match v.get("format").and_then(|f| f.as_str()) {
        Some(f) => check_format(f, REALIZATION_FORMAT)?,
        None => return Err(Error::schema("format", "missing")),
    }
    let mut obj = v;
    if let Some(map) = obj.as_object_mut() {
        map.remove("format");
    }
    Ok(serde_json::from_value(obj)?)
}

pub fn serialize_two_mode_model(m: &TwoModeModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(m)?)
}

pub fn deserialize_two_mode_model(text: &str) -> Result<TwoModeModel> {
    let m: TwoModeModel = serde_json::from_str(text)?;
    m.validate()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, re};

    #[test]
    fn malformed_a_is_named() {
        let ss = StateSpace::new(identity(2), identity(2), identity(2), identity(2)).unwrap();
        let text = serialize_state_space(&ss).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["A"] = serde_json::json!({"rows": 3, "cols": 2, "data": vec![[0.0, 0.0]; 6]});
        match deserialize_state_space(&v.to_string()) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "A"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn state_space_round_trip_exact() {
        let s0 = 1.7f64;
        let k = (2.0 * s0).sqrt();
        let b = CMat::from_row_slice(2, 2, &[re(0.0), re(k), re(-k), re(0.0)]);
        let ss = StateSpace::new(identity(2).scale(s0), b.clone(), -b, identity(2)).unwrap();
        let back = deserialize_state_space(&serialize_state_space(&ss).unwrap()).unwrap();
        assert_eq!(back, ss);
    }

    #[test]
    fn wrong_sign_convention_rejected() {
        let ss = StateSpace::static_gain(identity(2)).unwrap();
        let text = serialize_state_space(&ss).unwrap().replace(SIGN_CONVENTION, "standard");
        assert!(matches!(
            deserialize_state_space(&text),
            Err(Error::Schema { path, .. }) if path == "sign_convention"
        ));
    }
}
