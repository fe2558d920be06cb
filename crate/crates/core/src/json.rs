//! JSON encodings.
//!
//! A complex scalar is `[re, im]` (a bare real number is also accepted on
//! input), a matrix is a row-major array of rows. Tuples, polynomials and
//! colligations carry their dimensions next to the data:
//!
//! ```json
//! {"d": 1, "n": 1, "components": [[[[0.5, 0.0]]]]}
//! {"d": 1, "s": 1, "r": 1, "terms": [{"word": [1], "coeff": [[[1, 0]]]}]}
//! ```

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};
use crate::poly::NcPoly;
use crate::tuple::MatrixTuple;
use crate::word::Word;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Scalar> for C64 {
    fn from(s: Scalar) -> C64 {
        match s {
            Scalar::Pair([re, im]) => c(re, im),
            Scalar::Real(re) => c(re, 0.0),
        }
    }
}

fn rows_of(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn from_rows(rows: Vec<Vec<Scalar>>, cols_hint: Option<usize>) -> Result<CMat> {
    let nr = rows.len();
    let nc = rows.first().map_or(cols_hint.unwrap_or(0), Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::InvalidArgument("matrix rows have different lengths".into()));
    }
    let m = CMat::from_fn(nr, nc, |i, j| rows[i][j].into());
    if !crate::linalg::is_finite(&m) {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

/// `#[serde(with = "crate::json::matrix")]` support for [`CMat`] fields.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        rows_of(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = Vec::<Vec<Scalar>>::deserialize(d)?;
        from_rows(rows, None).map_err(D::Error::custom)
    }
}

/// Transparent serde wrapper around a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JsonMatrix(#[serde(with = "matrix")] pub CMat);

pub fn matrix_to_value(m: &CMat) -> serde_json::Value {
    serde_json::to_value(rows_of(m)).expect("matrices serialize")
}

/// Parses a matrix; `cols` fixes the column count of an empty row list.
pub fn matrix_from_value(v: &serde_json::Value, cols: Option<usize>) -> Result<CMat> {
    let rows: Vec<Vec<Scalar>> = serde_json::from_value(v.clone())
        .map_err(|e| Error::InvalidArgument(format!("bad matrix: {e}")))?;
    let m = from_rows(rows, cols)?;
    Ok(m)
}

#[derive(Serialize, Deserialize)]
struct TupleRepr {
    d: usize,
    n: usize,
    components: Vec<JsonMatrix>,
}

impl Serialize for MatrixTuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TupleRepr {
            d: self.d(),
            n: self.level(),
            components: self.components().iter().cloned().map(JsonMatrix).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixTuple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TupleRepr::deserialize(d)?;
        if r.components.len() != r.d {
            return Err(D::Error::custom(format!(
                "declared d = {} but {} components given",
                r.d,
                r.components.len()
            )));
        }
        let t = MatrixTuple::new(r.components.into_iter().map(|m| m.0).collect())
            .map_err(D::Error::custom)?;
        if t.level() != r.n {
            return Err(D::Error::custom(format!("declared n = {} but components are {}x{}", r.n, t.level(), t.level())));
        }
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    word: Word,
    coeff: JsonMatrix,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    d: usize,
    s: usize,
    r: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for NcPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            d: self.d(),
            s: self.s(),
            r: self.r(),
            terms: self
                .terms()
                .iter()
                .map(|(w, m)| TermRepr { word: w.clone(), coeff: JsonMatrix(m.clone()) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NcPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PolyRepr::deserialize(d)?;
        NcPoly::new(r.d, r.s, r.r, r.terms.into_iter().map(|t| (t.word, t.coeff.0)))
            .map_err(D::Error::custom)
    }
}
