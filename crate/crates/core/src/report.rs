//! Output formatting shared by the JSON and CSV writers.

/// Rounds to 9 significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Compact JSON with a trailing newline.
pub fn to_json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("value serializes") + "\n"
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

/// Decimal rendering for CSV cells.
pub fn cell(x: f64) -> String {
    let v = sig9(x);
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}
