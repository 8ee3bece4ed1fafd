//! Locale-independent number formatting for CSV output.

/// `v` with 12 significant digits, like C's `%.12g`.
pub fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v == 0.0 { "0".into() } else { format!("{v}") };
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if !(-5..12).contains(&exp) {
        let m = format!("{v:.11e}");
        let (mant, e) = m.split_once('e').unwrap();
        format!("{}e{}", trim(mant), e)
    } else {
        trim(&format!("{:.*}", (11 - exp).max(0) as usize, v)).to_string()
    };
    if s == "-0" { "0".into() } else { s }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
