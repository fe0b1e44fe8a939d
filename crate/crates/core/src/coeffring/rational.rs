use num_bigint::BigInt;
use num_rational::BigRational;

use super::CoeffError;

/// Arbitrary precision rational in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `a` or `a/b` (optionally signed).
pub fn parse_rational(s: &str) -> Result<Rational, CoeffError> {
    let s = s.trim();
    let bad = |msg: &str| CoeffError::Parse {
        pos: 0,
        msg: format!("{msg}: `{s}`"),
    };
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad("invalid rational"))?;
    let d: BigInt = d.parse().map_err(|_| bad("invalid rational"))?;
    if d == BigInt::from(0) {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    #[test]
    fn canonical_form() {
        let r = rat(4, -6);
        assert_eq!(r.numer(), &BigInt::from(-2));
        assert_eq!(r.denom(), &BigInt::from(3));
        let z = rat(0, 5);
        assert!(z.is_zero());
        assert!(z.denom().is_one());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3").unwrap(), rat_int(3));
        assert_eq!(parse_rational(" -10/4 ").unwrap(), rat(-5, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn rational_sum_oracle() {
        // 1/2 + 1/3 = (3 + 2)/6
        assert_eq!(rat(1, 2) + rat(1, 3), rat(5, 6));
    }
}
