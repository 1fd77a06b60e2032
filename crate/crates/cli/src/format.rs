//! Number formatting shared by the TSV and JSON reports.

use serde_json::Value;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// TSV cell: 12 significant digits, `+inf` / `-inf` for infinities.
pub fn cell(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        let r = round12(x);
        // avoid "-0"
        format!("{}", if r == 0.0 { 0.0 } else { r })
    }
}

/// JSON number with 12 significant digits; non-finite values become strings.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        let r = round12(x);
        Value::from(if r == 0.0 { 0.0 } else { r })
    } else {
        Value::String(cell(x))
    }
}

pub fn to_json_line(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}
