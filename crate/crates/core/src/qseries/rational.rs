use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::SeriesError;

pub type ExactRational = BigRational;

/// Parity of the reduced fraction `q^{-1} = P/Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParityClass {
    OddOdd,
    EvenOverOdd,
    OddOverEven,
}

impl fmt::Display for ParityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParityClass::OddOdd => "odd/odd",
            ParityClass::EvenOverOdd => "even/odd",
            ParityClass::OddOverEven => "odd/even",
        };
        f.write_str(s)
    }
}

/// A positive rational deformation parameter `q != 1`, kept in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalQ(BigRational);

impl RationalQ {
    pub fn new(num: i64, den: i64) -> Result<Self, SeriesError> {
        if den == 0 {
            return Err(SeriesError::InvalidQ(format!("{num}/{den}")));
        }
        Self::from_ratio(BigRational::new(num.into(), den.into()))
    }

    pub fn from_ratio(q: BigRational) -> Result<Self, SeriesError> {
        if !q.is_positive() || q.is_one() {
            return Err(SeriesError::InvalidQ(q.to_string()));
        }
        Ok(RationalQ(q))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    /// `(P, Q)` with `q^{-1} = P/Q` in lowest terms.
    pub fn inverse_parts(&self) -> (BigInt, BigInt) {
        (self.0.denom().clone(), self.0.numer().clone())
    }

    pub fn parity_class(&self) -> ParityClass {
        let (p, q) = self.inverse_parts();
        match (p.is_odd(), q.is_odd()) {
            (true, true) => ParityClass::OddOdd,
            (false, _) => ParityClass::EvenOverOdd,
            (_, false) => ParityClass::OddOverEven,
        }
    }

    pub fn is_below_one(&self) -> bool {
        self.0 < BigRational::one()
    }

    pub fn to_f64(&self) -> f64 {
        super::field::ratio_to_f64(&self.0)
    }
}

impl fmt::Display for RationalQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `2`-adic valuation of a nonzero integer.
pub fn two_adic_valuation(n: &BigInt) -> u64 {
    if n.is_zero() {
        return 0;
    }
    n.trailing_zeros().unwrap_or(0)
}

/// Parse `"a/b"`, `"a"` or a plain decimal such as `"0.37"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once('/') {
        let a = parse_rational(a)?;
        let b = parse_rational(b)?;
        return (!b.is_zero()).then(|| a / b);
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().ok()? / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let value = BigRational::from_integer(all) * num_traits::Pow::pow(&ten, scale);
    Some(if neg { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_inverse_parity() {
        assert_eq!(RationalQ::new(1, 3).unwrap().parity_class(), ParityClass::OddOdd);
        assert_eq!(RationalQ::new(5, 3).unwrap().parity_class(), ParityClass::OddOdd);
        assert_eq!(RationalQ::new(1, 2).unwrap().parity_class(), ParityClass::EvenOverOdd);
        assert_eq!(RationalQ::new(2, 1).unwrap().parity_class(), ParityClass::OddOverEven);
        assert_eq!(RationalQ::new(3, 4).unwrap().parity_class(), ParityClass::EvenOverOdd);
        assert_eq!(RationalQ::new(6, 9).unwrap().parity_class(), ParityClass::OddOverEven);
    }

    #[test]
    fn rejects_degenerate_q() {
        assert!(RationalQ::new(1, 1).is_err());
        assert!(RationalQ::new(0, 5).is_err());
        assert!(RationalQ::new(-1, 3).is_err());
        assert!(RationalQ::new(1, 0).is_err());
    }

    #[test]
    fn parses_fractions_and_decimals() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(parse_rational("1/9"), Some(r(1, 9)));
        assert_eq!(parse_rational("0.37"), Some(r(37, 100)));
        assert_eq!(parse_rational("-2.5e-1"), Some(r(-1, 4)));
        assert_eq!(parse_rational("12"), Some(r(12, 1)));
        assert_eq!(parse_rational("3/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }
}
