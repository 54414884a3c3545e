//! JSON I/O: the canonical polynomial format and a float formatter that
//! writes every `f64` with 17 significant digits.
//!
//! ```json
//! {"n": 2, "d": 2, "terms": [{"alpha": [1, 1], "c": 1.0}]}
//! ```
//!
//! Terms are written leading term first (descending graded-lex order).

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::poly::{HomPoly, MAX_DEGREE};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<u32>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub n: usize,
    pub d: u32,
    pub terms: Vec<TermJson>,
}

impl<T: Scalar> From<&HomPoly<T>> for PolyJson {
    fn from(p: &HomPoly<T>) -> Self {
        PolyJson {
            n: p.n(),
            d: p.d(),
            terms: p
                .terms()
                .rev()
                .map(|(e, c)| TermJson {
                    alpha: e.as_slice().to_vec(),
                    c: c.to_f64_lossy(),
                })
                .collect(),
        }
    }
}

impl PolyJson {
    /// Validates and converts. Unlike [`HomPoly::from_terms`] this rejects
    /// duplicates and explicit zeros, since the file format forbids them.
    pub fn to_poly(&self) -> Result<HomPoly<f64>> {
        if self.d == 0 || self.d > MAX_DEGREE {
            return Err(Error::Parse(format!(
                "d = {} not in 1..={MAX_DEGREE}",
                self.d
            )));
        }
        if self.n == 0 {
            return Err(Error::Parse("n must be at least 1".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, t) in self.terms.iter().enumerate() {
            if t.alpha.len() != self.n {
                return Err(Error::Parse(format!(
                    "term {i}: alpha has length {}, expected {}",
                    t.alpha.len(),
                    self.n
                )));
            }
            let w: u64 = t.alpha.iter().map(|&a| a as u64).sum();
            if w != self.d as u64 {
                return Err(Error::Parse(format!(
                    "term {i}: alpha has weight {w}, expected {}",
                    self.d
                )));
            }
            if t.c == 0.0 {
                return Err(Error::Parse(format!("term {i}: zero coefficient")));
            }
            if !t.c.is_finite() {
                return Err(Error::Parse(format!("term {i}: non-finite coefficient")));
            }
            if !seen.insert(&t.alpha) {
                return Err(Error::Parse(format!(
                    "term {i}: duplicate alpha {:?}",
                    t.alpha
                )));
            }
        }
        HomPoly::from_terms(
            self.n,
            self.d,
            self.terms.iter().map(|t| (t.alpha.clone(), t.c)),
        )
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field \"{key}\"")))
}

/// Parses the canonical format. Errors name the offending term index.
pub fn parse_poly(s: &str) -> Result<HomPoly<f64>> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    parse_poly_value(&v)
}

pub fn parse_poly_value(v: &Value) -> Result<HomPoly<f64>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("polynomial must be a JSON object".into()))?;
    let n = field(obj, "n")?
        .as_u64()
        .ok_or_else(|| Error::Parse("\"n\" must be a non-negative integer".into()))?;
    let d = field(obj, "d")?
        .as_u64()
        .filter(|&d| d <= u32::MAX as u64)
        .ok_or_else(|| Error::Parse("\"d\" must be a non-negative integer".into()))?;
    let raw_terms = field(obj, "terms")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"terms\" must be an array".into()))?;
    let mut terms = Vec::with_capacity(raw_terms.len());
    for (i, t) in raw_terms.iter().enumerate() {
        let t: TermJson = serde_json::from_value(t.clone())
            .map_err(|e| Error::Parse(format!("term {i}: {e}")))?;
        terms.push(t);
    }
    PolyJson {
        n: n as usize,
        d: d as u32,
        terms,
    }
    .to_poly()
}

/// Writes finite floats as `d.dddddddddddddddde±x` (17 significant digits).
#[derive(Debug, Clone, Copy, Default)]
pub struct Sig17<F>(pub F);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

/// Serializes with [`Sig17`] floats; `pretty` adds two-space indentation.
pub fn to_string<S: Serialize + ?Sized>(value: &S, pretty: bool) -> Result<String> {
    let mut buf = Vec::new();
    let res = if pretty {
        let mut ser =
            serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
        value.serialize(&mut ser)
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(CompactFormatter));
        value.serialize(&mut ser)
    };
    res.map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn poly_to_string<T: Scalar>(p: &HomPoly<T>, pretty: bool) -> Result<String> {
    to_string(&PolyJson::from(p), pretty)
}
