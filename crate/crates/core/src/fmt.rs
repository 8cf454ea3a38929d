//! C `printf`-compatible float formatting for the text outputs.

/// `%.<prec>e`: mantissa with `prec` decimals, signed exponent of at least
/// two digits (`9.060000e-01`).
pub fn format_exp(v: f64, prec: usize) -> String {
    if !v.is_finite() {
        return non_finite(v);
    }
    let s = format!("{v:.prec$e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

/// `%.6e`
pub fn format_e6(v: f64) -> String {
    format_exp(v, 6)
}

/// `%.17g`: 17 significant digits, trailing zeros removed, exponential form
/// when the decimal exponent is below -4 or at least 17.
pub fn format_g17(v: f64) -> String {
    const P: i32 = 17;
    if !v.is_finite() {
        return non_finite(v);
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let s = format!("{:.*e}", (P - 1) as usize, v);
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let x: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&x) {
        let mant = strip_zeros(mant);
        let sign = if x < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", x.abs())
    } else {
        let decimals = (P - 1 - x) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn non_finite(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
