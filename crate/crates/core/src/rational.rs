//! Exact rational helpers shared by the model and the exact engines.

use alloc::format;
use alloc::string::String;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.25"` into an
/// exact rational. Decimals are read exactly, never through binary64.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse(String::from("empty number")));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = parse_int(num)?;
        let den: BigInt = parse_int(den)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.starts_with('-');
        let digits = int_part.trim_start_matches(['-', '+']);
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("malformed decimal {s:?}")));
        }
        let whole: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            parse_int(digits)?
        };
        let frac: BigInt = parse_int(frac_part)?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let mut value = BigRational::new(whole * &scale + frac, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    Ok(BigRational::from_integer(parse_int(s)?))
}

fn parse_int(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let body = t.trim_start_matches(['-', '+']);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) || t.len() - body.len() > 1 {
        return Err(Error::Parse(format!("malformed integer {t:?}")));
    }
    t.parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("malformed integer {t:?}")))
}

/// Always renders `num/den`, including for integers (`1/1`).
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio_from_biguint(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `num / den` in binary64 without overflowing either operand.
pub fn biguint_ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    ratio_from_biguint(num, den).to_f64().unwrap_or(f64::NAN)
}
