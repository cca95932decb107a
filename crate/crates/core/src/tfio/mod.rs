//! Rational transfer matrices and the JSON documents exchanged between pipeline stages.

mod document;
mod grid;
mod parse;
mod poly;
mod rational;
mod transfer;

pub use document::{
    deserialize_goo, deserialize_realization, deserialize_state_space, deserialize_two_mode_model,
    matrix_from_doc, matrix_to_doc, serialize_goo, serialize_realization, serialize_state_space,
    serialize_two_mode_model, MatrixDoc, GOO_FORMAT, SIGN_CONVENTION, STATE_SPACE_FORMAT,
};
pub use grid::RationalGrid;
pub use parse::parse_rational;
pub use poly::Poly;
pub use rational::RationalFunction;
pub use transfer::{assemble_doubled_up, TransferMatrix};

/// Serde adapter storing a complex number as `[re, im]`.
pub mod cx {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
