//! Exact rational helpers shared by the model, the solvers and the text formats.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `2^-k` as an exact rational.
pub fn pow2_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

pub fn is_probability(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// Formats as `p/q` in lowest terms, always with an explicit denominator.
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator or denominator too large for a direct conversion
        let shift = r.denom().bits().max(r.numer().bits()) as i64 - 1000;
        if shift <= 0 {
            return f64::NAN;
        }
        let n = r.numer() >> shift as usize;
        let d = r.denom() >> shift as usize;
        if d.is_zero() {
            f64::INFINITY
        } else {
            n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

/// Parses `p/q`, an integer, or a finite decimal such as `0.6`.
pub fn parse(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n).map_err(|_| err())?;
        let d = BigInt::from_str(d).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let whole = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| err())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac = BigInt::from_str(frac).map_err(|_| err())?;
        let magnitude = whole.abs() * &scale + frac;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(numer, scale));
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| err())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse("1").unwrap(), int(1));
        assert_eq!(parse("0.6").unwrap(), ratio(3, 5));
        assert_eq!(parse(".25").unwrap(), ratio(1, 4));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert!(parse("1.").is_err());
    }

    #[test]
    fn formats_lowest_terms() {
        assert_eq!(format(&ratio(14, 16)), "7/8");
        assert_eq!(format(&int(1)), "1/1");
        assert_eq!(format(&int(0)), "0/1");
    }

    #[test]
    fn huge_rationals_convert() {
        let r = Rational::new(BigInt::one() << 3000usize, (BigInt::one() << 3001usize) + 1);
        assert!((to_f64(&r) - 0.5).abs() < 1e-12);
        assert_eq!(to_f64(&pow2_neg(3)), 0.125);
    }
}
