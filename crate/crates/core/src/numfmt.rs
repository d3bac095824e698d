//! Fixed float formatting for machine-readable output: 17 significant digits,
//! enough to round-trip every `f64`.

use serde::Serializer;
use serde_json::Number;

/// `x` in scientific notation with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serialize a float as a raw JSON number with 17 significant digits.
/// Non-finite values become `null`.
pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    match to_number(*x) {
        Some(n) => s.serialize_some(&n),
        None => s.serialize_none(),
    }
}

pub fn serialize_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x.and_then(to_number) {
        Some(n) => s.serialize_some(&n),
        None => s.serialize_none(),
    }
}

pub fn serialize_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| to_number(x)))
}

fn to_number(x: f64) -> Option<Number> {
    x.is_finite().then(|| {
        format_f64(x)
            .parse()
            .expect("formatted float is a valid JSON number")
    })
}
