//! Number formatting for reports. Non-finite values print as `NA`.

/// Six significant digits, `%g` style.
pub fn human(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        trim_zeros(format!("{:.*}", (5 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

pub fn human_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), human)
}

/// Shortest representation that reads back to the same `f64`.
pub fn full(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        "NA".into()
    }
}

pub fn full_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), full)
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(human(-39.99123456), "-39.9912");
        assert_eq!(human(10.0), "10");
        assert_eq!(human(0.000123456789), "0.000123457");
        assert_eq!(human(1.5e-7), "1.5e-7");
        assert_eq!(human(123456789.0), "1.23457e8");
        assert_eq!(human(999999.5), "1e6");
        assert_eq!(human(0.0), "0");
        assert_eq!(human(f64::NAN), "NA");
        assert_eq!(human(f64::NEG_INFINITY), "NA");
    }

    #[test]
    fn full_precision_round_trips() {
        for x in [0.1, -39.991_234_567_891_23, 1e-300, 2.0f64.sqrt()] {
            assert_eq!(full(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(full(f64::INFINITY), "NA");
        assert_eq!(full_opt(None), "NA");
    }
}
