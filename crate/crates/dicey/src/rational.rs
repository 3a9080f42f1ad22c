//! Exact rational scalars used throughout evaluation and slicing.
//!
//! Cut lengths and expectations are `BigRational` internally. Documents may
//! write them either as JSON numbers (converted exactly: every finite f64 is
//! a rational) or as strings `"p/q"` / `"p"`; canonical serialization always
//! emits the string form, reduced.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

pub type Q = BigRational;

/// Exact conversion; fails only on NaN/infinite input.
pub fn q_from_f64(x: f64) -> crate::Result<Q> {
    BigRational::from_f64(x).ok_or_else(|| Error::Semantic(format!("non-finite number {x}")))
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn q_from_i64(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"`, or a decimal-free integer string. Denominator 0 is
/// a semantic error, as is anything with a decimal point (use `p/q`).
pub fn q_from_str(s: &str) -> crate::Result<Q> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Syntax(format!("bad rational {s:?}")))?;
    let d: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| Error::Syntax(format!("bad rational {s:?}")))?,
        None => BigInt::from(1),
    };
    if d.is_zero() {
        return Err(Error::Semantic(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Canonical text form: `"p"` for integers, reduced `"p/q"` otherwise.
pub fn q_to_string(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serde adapter for rational-valued document fields.
///
/// Accepts a JSON number or a `"p/q"` string on input; always writes the
/// canonical string form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QField(pub Q);

impl Serialize for QField {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&q_to_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for QField {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(de)?;
        let q = match &v {
            serde_json::Value::String(s) => q_from_str(s).map_err(D::Error::custom)?,
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    q_from_i64(i)
                } else {
                    let f = n
                        .as_f64()
                        .ok_or_else(|| D::Error::custom(format!("bad number {n}")))?;
                    q_from_f64(f).map_err(D::Error::custom)?
                }
            }
            other => return Err(D::Error::custom(format!("expected rational, got {other}"))),
        };
        Ok(QField(q))
    }
}

/// `true` iff `|a − b| ≤ tol`, all exact.
pub fn q_close(a: &Q, b: &Q, tol: &Q) -> bool {
    (a - b).abs() <= *tol
}
