//! Exact rational scalars and their textual forms.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

use crate::error::{Error, Result};

pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Scalar {
    Scalar::new(BigInt::from(n), BigInt::from(d))
}

/// `"num/den"`, always with an explicit denominator.
pub fn to_fraction_string(x: &Scalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_fraction(s: &str) -> Result<Scalar> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let d: BigInt = d.parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Scalar::new(n, d))
}

pub fn from_parts(numer: &str, denom: &str) -> Result<Scalar> {
    parse_fraction(&format!("{numer}/{denom}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_strings() {
        assert_eq!(to_fraction_string(&ratio(6, -4)), "-3/2");
        assert_eq!(to_fraction_string(&int(5)), "5/1");
        assert_eq!(parse_fraction("-3/2").unwrap(), ratio(-3, 2));
        assert_eq!(parse_fraction("7").unwrap(), int(7));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("x/2").is_err());
    }
}
