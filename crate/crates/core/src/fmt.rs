//! Deterministic 6-significant-digit number rendering shared by the CSV
//! emitter and the CLI (printf "%.6g" semantics, trailing zeros trimmed).

/// Render with 6 significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // exponent after rounding to 6 significant digits
    let sci = format!("{:.5e}", x);
    let exp: i32 = sci
        .split('e')
        .nth(1)
        .expect("{:e} always contains an exponent")
        .parse()
        .expect("exponent is an integer");
    if !(-4..6).contains(&exp) {
        let mantissa = sci.split('e').next().unwrap();
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x))
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}
