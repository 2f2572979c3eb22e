//! Exact rational helpers: parsing, `p/q` formatting and decimal rendering.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational used for every density, distance and weight.
pub type Rational = num_rational::Ratio<i64>;

/// Parses `p/q`, a plain integer or a finite decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::ParameterOutOfRange(format!("not a rational number: `{text}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) || frac_part.len() > 17 {
            return Err(bad());
        }
        let whole: i64 = if int_digits.is_empty() { 0 } else { int_digits.parse().map_err(|_| bad())? };
        let frac: i64 = frac_part.parse().map_err(|_| bad())?;
        let denom = 10i64.checked_pow(frac_part.len() as u32).ok_or_else(bad)?;
        let magnitude = Rational::from_integer(whole) + Rational::new(frac, denom);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    s.parse::<i64>().map(Rational::from_integer).map_err(|_| bad())
}

/// Always `p/q`, including integers (`1/1`, `0/1`).
pub fn format_pq(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn to_f64(value: &Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

/// Renders `value` with 12 significant decimal digits (trailing zeros
/// trimmed). The flag is true iff the rendering equals `value` exactly.
pub fn format_decimal(value: &Rational) -> (String, bool) {
    const DIGITS: u32 = 12;
    if value.is_zero() {
        return ("0".to_string(), true);
    }
    let numer = BigInt::from(*value.numer()).abs();
    let denom = BigInt::from(*value.denom());
    let ten = BigInt::from(10);
    let lower = ten.pow(DIGITS - 1);
    let upper = ten.pow(DIGITS);

    // Find `shift` with 10^11 <= |value| * 10^shift < 10^12.
    let mut shift: i32 = 0;
    let scaled = |shift: i32| -> (BigInt, BigInt) {
        if shift >= 0 {
            (&numer * ten.pow(shift as u32), denom.clone())
        } else {
            (numer.clone(), &denom * ten.pow((-shift) as u32))
        }
    };
    loop {
        let (n, d) = scaled(shift);
        let q = &n / &d;
        if q >= upper {
            shift -= 1;
        } else if q < lower {
            shift += 1;
        } else {
            break;
        }
    }
    let (n, d) = scaled(shift);
    let (mut digits, remainder) = n.div_rem(&d);
    let exact = remainder.is_zero();
    if &remainder * BigInt::from(2) >= d {
        digits += BigInt::one();
        if digits >= upper {
            digits /= &ten;
            shift -= 1;
        }
    }
    let mut text = digits.to_string();
    // value ~= digits * 10^-shift
    let rendered = if shift <= 0 {
        text.push_str(&"0".repeat((-shift) as usize));
        text
    } else {
        let shift = shift as usize;
        if text.len() <= shift {
            let mut s = "0.".to_string();
            s.push_str(&"0".repeat(shift - text.len()));
            s.push_str(&text);
            s
        } else {
            let split = text.len() - shift;
            format!("{}.{}", &text[..split], &text[split..])
        }
    };
    let rendered = if rendered.contains('.') {
        rendered.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        rendered
    };
    let sign = if value.is_negative() { "-" } else { "" };
    (format!("{sign}{rendered}"), exact)
}

/// `num / den` as an exact rational, panicking only on a zero denominator.
pub fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(num as i64, den as i64)
}

pub fn floor_to_i64(value: &Rational) -> i64 {
    value.floor().to_integer().to_i64().unwrap_or(i64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), Rational::new(1, 3));
        assert_eq!(parse_rational("7").unwrap(), Rational::from_integer(7));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(format_decimal(&Rational::new(1, 3)), ("0.333333333333".to_string(), false));
        assert_eq!(format_decimal(&Rational::new(1, 2)), ("0.5".to_string(), true));
        assert_eq!(format_decimal(&Rational::new(2, 3)), ("0.666666666667".to_string(), false));
        assert_eq!(format_decimal(&Rational::from_integer(1)), ("1".to_string(), true));
        assert_eq!(format_decimal(&Rational::new(5, 16)), ("0.3125".to_string(), true));
        assert_eq!(format_decimal(&Rational::new(1, 256)), ("0.00390625".to_string(), true));
        assert_eq!(format_decimal(&Rational::from_integer(0)), ("0".to_string(), true));
        assert_eq!(format_decimal(&Rational::new(-1, 4)), ("-0.25".to_string(), true));
    }

    #[test]
    fn pq_format_keeps_denominator() {
        assert_eq!(format_pq(&Rational::from_integer(1)), "1/1");
        assert_eq!(format_pq(&Rational::new(2, 4)), "1/2");
    }
}
