use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::SeriesError;

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Products of many q-Pochhammer factors overflow `f64` long before the
/// final normalised quantity does, so weights and norms travel in this form.
#[derive(Clone, Copy, PartialEq)]
pub struct LogSign {
    sign: i8,
    log_abs: f64,
}

impl LogSign {
    pub const ZERO: LogSign = LogSign { sign: 0, log_abs: f64::NEG_INFINITY };
    pub const ONE: LogSign = LogSign { sign: 1, log_abs: 0.0 };

    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            LogSign::ZERO
        } else {
            LogSign { sign: sign.signum(), log_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogSign::ZERO
        } else {
            LogSign::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        match n.sign() {
            Sign::NoSign => LogSign::ZERO,
            s => LogSign::new(if s == Sign::Plus { 1 } else { -1 }, ln_bigint(n)),
        }
    }

    pub fn from_ratio(r: &BigRational) -> Self {
        if r.is_zero() {
            return LogSign::ZERO;
        }
        let sign = if r.is_negative() { -1 } else { 1 };
        LogSign::new(sign, ln_bigint(r.numer()) - ln_bigint(r.denom()))
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_abs(&self) -> f64 {
        self.log_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log_abs.exp()
        }
    }

    pub fn abs(&self) -> Self {
        LogSign::new(self.sign.abs(), self.log_abs)
    }

    pub fn powi(&self, e: i64) -> Self {
        if e == 0 {
            return LogSign::ONE;
        }
        if self.sign == 0 {
            return if e > 0 { LogSign::ZERO } else { LogSign::new(1, f64::INFINITY) };
        }
        let sign = if self.sign < 0 && e % 2 != 0 { -1 } else { 1 };
        LogSign::new(sign, self.log_abs * e as f64)
    }

    pub fn sqrt(&self) -> Result<Self, SeriesError> {
        match self.sign {
            0 => Ok(LogSign::ZERO),
            1 => Ok(LogSign::new(1, 0.5 * self.log_abs)),
            _ => Err(SeriesError::NegativeRadicand(self.to_f64())),
        }
    }

    pub fn recip(&self) -> Self {
        if self.sign == 0 {
            LogSign::new(1, f64::INFINITY)
        } else {
            LogSign::new(self.sign, -self.log_abs)
        }
    }

    /// Signed sum of several values, scaled by the largest magnitude first.
    pub fn sum<I: IntoIterator<Item = LogSign>>(terms: I) -> Self {
        let terms: Vec<LogSign> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let Some(max) = terms
            .iter()
            .map(|t| t.log_abs)
            .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        else {
            return LogSign::ZERO;
        };
        if !max.is_finite() {
            return LogSign::new(1, max);
        }
        let scaled: f64 = terms.iter().map(|t| t.sign as f64 * (t.log_abs - max).exp()).sum();
        let s = LogSign::from_f64(scaled);
        LogSign::new(s.sign, s.log_abs + max)
    }
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.abs().to_f64().map(f64::ln).unwrap_or(f64::INFINITY)
    } else {
        let shift = bits - 64;
        let top = (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

impl Mul for LogSign {
    type Output = LogSign;
    fn mul(self, rhs: LogSign) -> LogSign {
        if self.sign == 0 || rhs.sign == 0 {
            return LogSign::ZERO;
        }
        LogSign::new(self.sign * rhs.sign, self.log_abs + rhs.log_abs)
    }
}

impl Div for LogSign {
    type Output = LogSign;
    fn div(self, rhs: LogSign) -> LogSign {
        self * rhs.recip()
    }
}

impl Neg for LogSign {
    type Output = LogSign;
    fn neg(self) -> LogSign {
        LogSign::new(-self.sign, self.log_abs)
    }
}

impl fmt::Debug for LogSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogSign({}, ln|x| = {})", self.sign, self.log_abs)
    }
}

impl From<f64> for LogSign {
    fn from(x: f64) -> Self {
        LogSign::from_f64(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn round_trips_ordinary_values() {
        for x in [1.5, -2.25, 1e-300, -7e200] {
            let back = LogSign::from_f64(x).to_f64();
            assert!((back - x).abs() <= 1e-12 * x.abs());
        }
        assert!(LogSign::from_f64(0.0).is_zero());
    }

    #[test]
    fn huge_integers_keep_their_logarithm() {
        let n = BigInt::from(7).pow(2016u32);
        let ls = LogSign::from_bigint(&n);
        assert!((ls.log_abs() - 2016.0 * 7f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn sum_cancels_signs() {
        let s = LogSign::sum([LogSign::from_f64(3.0), LogSign::from_f64(-1.0), LogSign::from_f64(0.5)]);
        assert!((s.to_f64() - 2.5).abs() < 1e-15);
        assert!(LogSign::sum([]).is_zero());
    }

    #[test]
    fn negative_square_root_is_rejected() {
        assert!(LogSign::from_f64(-4.0).sqrt().is_err());
        assert!((LogSign::from_f64(4.0).sqrt().unwrap().to_f64() - 2.0).abs() < 1e-15);
    }
}
