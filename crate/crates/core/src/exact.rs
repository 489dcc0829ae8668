//! Exact complex-rational scalars used by the symbolic polynomial layer.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Gaussian rational `re + i im` with arbitrary-precision parts.
pub type CRational = Complex<BigRational>;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn crat(re: BigRational, im: BigRational) -> CRational {
    Complex::new(re, im)
}

pub fn creal(re: BigRational) -> CRational {
    Complex::new(re, BigRational::zero())
}

pub fn c_is_zero(c: &CRational) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

pub fn to_c64(c: &CRational) -> Complex64 {
    Complex64::new(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// Exact conversion of a finite double. Fails on NaN and infinities.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")))
}

/// Parses `3`, `-0.25`, `1/3`, `1.5e-2` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// Renders a rational as a terminating decimal when the denominator is
/// of the form 2^a 5^b, otherwise as `n/d`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (ip, fp) = digits.split_at(digits.len() - places);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{ip}.{fp}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("0.2").unwrap(), rat(1, 5));
        assert_eq!(parse_rational("-1/3").unwrap(), rat(-1, 3));
        assert_eq!(parse_rational("1.5e-2").unwrap(), rat(3, 200));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn formats_terminating_decimals() {
        assert_eq!(format_rational(&rat(3, 50)), "0.06");
        assert_eq!(format_rational(&rat(-3, 2)), "-1.5");
        assert_eq!(format_rational(&rat(1, 3)), "1/3");
        assert_eq!(format_rational(&rat(12, 1)), "12");
        assert_eq!(format_rational(&rat(1, 1000)), "0.001");
    }
}
