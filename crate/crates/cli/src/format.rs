//! Decimal renderings shared by the file formats.

/// Shortest string that parses back to exactly `v`.
pub fn exact(v: f64) -> String {
    v.to_string()
}

pub fn parse_exact(s: &str) -> Option<f64> {
    s.parse().ok()
}

/// `v` rounded to 6 significant digits, written positionally for magnitudes
/// in `[1e-6, 1e21)` and in scientific notation otherwise.
pub fn sig6(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if v == 0.0 {
        return "0.00000".into();
    }
    if !(-6..21).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}
