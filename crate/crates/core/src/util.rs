//! Small numeric helpers shared by the serialization paths.

/// Round to 12 significant decimal digits.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    // 11 fractional digits in scientific notation = 12 significant digits.
    format!("{:.11e}", x).parse().expect("re-parse of formatted float")
}

/// Format with 12 significant digits, shortest round-trip spelling.
///
/// All analysis artifacts (matrices, spectra, features, plot data) are written
/// through this so reruns produce byte-identical files.
pub fn fmt_sig12(x: f64) -> String {
    let r = round_sig12(x);
    if r == 0.0 {
        // collapses -0.0 as well
        return "0".to_string();
    }
    format!("{r}")
}
