//! Byte-stable CSV and JSON renderings of gain curves.

use serde_json::{Map, Value};

use crate::dp::GainCurve;

/// Positional decimal with 17 significant digits, `.` separator, no exponent.
/// Zero (of either sign) renders as `0`.
pub fn format_sig17(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.16e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let mut out = String::with_capacity(24);
    if v < 0.0 {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat('0').take(int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    out
}

/// Header `N,<columns...>` followed by one LF-terminated row per horizon.
pub fn curve_to_csv(curve: &GainCurve) -> String {
    let mut out = String::from("N");
    for label in curve.labels() {
        out.push(',');
        out.push_str(label.column());
    }
    out.push('\n');
    for (n, gains) in curve.rows() {
        out.push_str(&n.to_string());
        for g in gains {
            out.push(',');
            out.push_str(&format_sig17(g));
        }
        out.push('\n');
    }
    out
}

/// Array of row objects keyed by the CSV column names.
pub fn curve_to_json(curve: &GainCurve) -> Value {
    let labels: Vec<_> = curve.labels().collect();
    let rows = curve
        .rows()
        .map(|(n, gains)| {
            let mut obj = Map::new();
            obj.insert("N".to_string(), Value::from(n));
            for (label, g) in labels.iter().zip(gains) {
                obj.insert(label.column().to_string(), Value::from(g));
            }
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}
