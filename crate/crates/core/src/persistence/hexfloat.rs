//! C99 `%a`-style hexadecimal text for `f64`, exact in both directions.

/// `1.5` becomes `0x1.8p+0`; infinities are `inf`/`-inf` and NaN is `nan`.
pub fn format_hex(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    let sign = if v.is_sign_negative() { "-" } else { "" };
    if v.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = v.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = bits & ((1u64 << 52) - 1);
    let (lead, exp) = match (exp_bits, mantissa) {
        (0, 0) => (0, 0),
        (0, _) => (0, -1022),
        _ => (1, exp_bits - 1023),
    };
    let mut frac = format!("{mantissa:013x}");
    while frac.ends_with('0') {
        frac.pop();
    }
    let dot = if frac.is_empty() {
        String::new()
    } else {
        format!(".{frac}")
    };
    format!("{sign}0x{lead}{dot}p{exp:+}")
}

pub fn parse_hex(s: &str) -> Option<f64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let value = match body {
        "inf" => f64::INFINITY,
        "nan" if !neg => return Some(f64::NAN),
        _ => {
            let body = body.strip_prefix("0x")?;
            let (mant, exp) = body.split_once('p')?;
            let exp: i32 = exp.parse().ok()?;
            let (lead, frac) = mant.split_once('.').unwrap_or((mant, ""));
            if frac.len() > 13
                || !frac.bytes().all(|b| b.is_ascii_hexdigit())
                || frac.bytes().any(|b| b.is_ascii_uppercase())
            {
                return None;
            }
            let mut digits = frac.to_string();
            while digits.len() < 13 {
                digits.push('0');
            }
            let m = u64::from_str_radix(&digits, 16).ok()?;
            let bits = match lead {
                "1" if (-1022..=1023).contains(&exp) => ((exp + 1023) as u64) << 52 | m,
                "0" if m == 0 && exp == 0 => 0,
                "0" if exp == -1022 => m,
                _ => return None,
            };
            f64::from_bits(bits)
        }
    };
    Some(if neg { -value } else { value })
}
