use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{LogSign, SeriesError};

pub(crate) const UNIT_TOL: f64 = 1e-12;
pub(crate) const MAX_TERMINATION: i64 = 4096;

/// Scalars the series and family formulas are generic over.
///
/// `f64` compares against one with a `1e-12` tolerance; `BigRational` is exact.
pub trait Field:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn as_f64(&self) -> f64;
    fn to_log_sign(&self) -> LogSign;
    fn powi(&self, e: i64) -> Self;
    /// Exactly zero (rational) or bitwise zero (float).
    fn is_exact_zero(&self) -> bool;
    /// Equal to one, within `UNIT_TOL` for floats.
    fn is_unit(&self) -> bool;
    fn is_pos(&self) -> bool;

    /// Smallest `m` in `0..=4096` with `self * q^m == 1`.
    fn q_power_index(&self, q: &Self) -> Option<usize>;

    /// Terminating basic hypergeometric series as sign and log-magnitude.
    fn series_log(numer: &[Self], denom: &[Self], q: &Self, z: &Self) -> Result<LogSign, SeriesError>;

    fn magnitude(&self) -> Self {
        if self.is_pos() || self.is_exact_zero() {
            self.clone()
        } else {
            -self.clone()
        }
    }
}

fn candidate_index(a: f64, q: f64) -> Option<i64> {
    if a <= 0.0 || q <= 0.0 || q == 1.0 {
        return None;
    }
    let m = (-a.ln() / q.ln()).round();
    if !(0.0..=MAX_TERMINATION as f64).contains(&m) {
        return None;
    }
    Some(m as i64)
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn to_log_sign(&self) -> LogSign {
        LogSign::from_f64(*self)
    }
    fn powi(&self, e: i64) -> Self {
        f64::powf(*self, e as f64)
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_unit(&self) -> bool {
        (self - 1.0).abs() < UNIT_TOL
    }
    fn is_pos(&self) -> bool {
        *self > 0.0
    }
    fn q_power_index(&self, q: &Self) -> Option<usize> {
        let m = candidate_index(*self, *q)?;
        (self * q.powf(m as f64)).is_unit().then_some(m as usize)
    }
    fn series_log(numer: &[Self], denom: &[Self], q: &Self, z: &Self) -> Result<LogSign, SeriesError> {
        super::series_log_float(numer, denom, q, z)
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn as_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn to_log_sign(&self) -> LogSign {
        LogSign::from_ratio(self)
    }
    fn powi(&self, e: i64) -> Self {
        num_traits::Pow::pow(self, e as i32)
    }
    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        One::is_one(self)
    }
    fn is_pos(&self) -> bool {
        Signed::is_positive(self)
    }
    fn q_power_index(&self, q: &Self) -> Option<usize> {
        let m = candidate_index(self.as_f64(), q.as_f64())?;
        let prod = self * num_traits::Pow::pow(q, m as i32);
        One::is_one(&prod).then_some(m as usize)
    }
    fn series_log(numer: &[Self], denom: &[Self], q: &Self, z: &Self) -> Result<LogSign, SeriesError> {
        super::basic_hypergeometric_exact(numer, denom, q, z).map(|v| LogSign::from_ratio(&v))
    }
}

/// Best-effort conversion of a rational to `f64` without overflow in the intermediate parts.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    ToPrimitive::to_f64(r).filter(|v| v.is_finite()).unwrap_or_else(|| LogSign::from_ratio(r).to_f64())
}
