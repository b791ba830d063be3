//! Number formatting for CSV output.

/// Formats `x` with 12 significant digits in the style of C's `%.12g`.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(0.05), "0.05");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(123456.789), "123456.789");
        assert_eq!(fmt12(1e-7), "1e-07");
        assert_eq!(fmt12(2.5e15), "2.5e+15");
        assert_eq!(fmt12(-0.125), "-0.125");
        assert_eq!(fmt12(0.0001), "0.0001");
        assert_eq!(fmt12(0.00001), "1e-05");
        assert_eq!(fmt12(f64::INFINITY), "inf");
    }

    #[test]
    fn twelve_digit_round_trip() {
        for &x in &[0.1234567890123, 17.0 / 7.0, 9.87654321e-9, 3.0e20] {
            let back: f64 = fmt12(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-12 * x.abs());
        }
    }
}
