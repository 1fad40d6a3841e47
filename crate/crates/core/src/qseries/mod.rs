//! q-numbers, q-Pochhammer symbols and terminating basic hypergeometric series.

mod field;
mod logsign;
mod rational;

pub use field::{ratio_to_f64, Field};
pub use logsign::LogSign;
pub use rational::{parse_rational, two_adic_valuation, ExactRational, ParityClass, RationalQ};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series does not terminate: no numerator parameter is q^-m with m <= 4096")]
    NonTerminating,
    #[error("denominator parameter {index} vanishes at term {term}")]
    DenominatorZero { index: usize, term: usize },
    #[error("paired Pochhammer reduction has a pole at a = 1")]
    PoleAtOne,
    #[error("square root of negative quantity {0}")]
    NegativeRadicand(f64),
    #[error("invalid deformation parameter q = {0}")]
    InvalidQ(String),
}

/// The q-number `[n] = (1 - q^n)/(1 - q)`.
pub fn q_number<T: Field>(n: i64, q: &T) -> T {
    (T::one() - q.powi(n)) / (T::one() - q.clone())
}

/// The q-Pochhammer symbol `(a;q)_n` evaluated in the scalar type.
pub fn q_pochhammer<T: Field>(a: &T, q: &T, n: usize) -> T {
    let mut acc = T::one();
    let mut aq = a.clone();
    for _ in 0..n {
        acc = acc * (T::one() - aq.clone());
        aq = aq * q.clone();
    }
    acc
}

/// `(a;q)_n` as a sign and log-magnitude, factor by factor.
pub fn q_pochhammer_log<T: Field>(a: &T, q: &T, n: usize) -> LogSign {
    let mut acc = LogSign::ONE;
    let mut aq = a.clone();
    for _ in 0..n {
        acc = acc * (T::one() - aq.clone()).to_log_sign();
        aq = aq * q.clone();
    }
    acc
}

/// Product `(a_1, ..., a_k; q)_n` as a sign and log-magnitude.
pub fn q_pochhammer_multi_log<T: Field>(params: &[T], q: &T, n: usize) -> LogSign {
    params.iter().fold(LogSign::ONE, |acc, a| acc * q_pochhammer_log(a, q, n))
}

/// `(1 - a q^{2n})/(1 - a)`, the ratio `(q sqrt a, -q sqrt a; q)_n / (sqrt a, -sqrt a; q)_n`.
pub fn vwp_pair_reduce<T: Field>(a: &T, q: &T, n: usize) -> Result<T, SeriesError> {
    if a.is_unit() {
        return Err(SeriesError::PoleAtOne);
    }
    Ok((T::one() - a.clone() * q.powi(2 * n as i64)) / (T::one() - a.clone()))
}

/// Number of terms after which the series stops, and a check that no
/// denominator factor vanishes before then.
pub fn termination_index<T: Field>(numer: &[T], denom: &[T], q: &T) -> Result<usize, SeriesError> {
    let m = numer
        .iter()
        .filter_map(|a| a.q_power_index(q))
        .min()
        .ok_or(SeriesError::NonTerminating)?;
    for (index, b) in denom.iter().enumerate() {
        let mut bq = b.clone();
        for j in 0..m {
            if bq.is_unit() {
                return Err(SeriesError::DenominatorZero { index, term: j + 1 });
            }
            bq = bq * q.clone();
        }
    }
    Ok(m)
}

/// Individual terms of the terminating series
/// `sum_k (a;q)_k / (q, b;q)_k [(-1)^k q^{k(k-1)/2}]^{1+s-r} z^k`.
fn series_terms<T: Field>(
    numer: &[T],
    denom: &[T],
    q: &T,
    z: &T,
) -> Result<Vec<LogSign>, SeriesError> {
    let m = termination_index(numer, denom, q)?;
    let excess = 1 + denom.len() as i64 - numer.len() as i64;
    let zl = z.to_log_sign();
    let ql = q.to_log_sign();
    let mut terms = Vec::with_capacity(m + 1);
    let mut term = LogSign::ONE;
    terms.push(term);
    let mut qk = T::one();
    for k in 1..=m {
        let mut ratio = LogSign::ONE;
        for a in numer {
            ratio = ratio * (T::one() - a.clone() * qk.clone()).to_log_sign();
        }
        for b in denom {
            ratio = ratio / (T::one() - b.clone() * qk.clone()).to_log_sign();
        }
        qk = qk * q.clone();
        ratio = ratio / (T::one() - qk.clone()).to_log_sign();
        if excess != 0 {
            let sign = if excess % 2 != 0 { -1.0 } else { 1.0 };
            ratio = ratio * LogSign::from_f64(sign) * ql.powi((k as i64 - 1) * excess);
        }
        term = term * ratio * zl;
        terms.push(term);
    }
    Ok(terms)
}

/// Terminating `_rphi_s` evaluated in floating point; terms are accumulated
/// in sign/log form before the final sum.
pub fn basic_hypergeometric(numer: &[f64], denom: &[f64], q: f64, z: f64) -> Result<f64, SeriesError> {
    basic_hypergeometric_log(numer, denom, &q, &z).map(|v| v.to_f64())
}

/// Terminating `_rphi_s` for any scalar, returned as sign and log-magnitude.
pub fn basic_hypergeometric_log<T: Field>(
    numer: &[T],
    denom: &[T],
    q: &T,
    z: &T,
) -> Result<LogSign, SeriesError> {
    T::series_log(numer, denom, q, z)
}

pub(crate) fn series_log_float<T: Field>(
    numer: &[T],
    denom: &[T],
    q: &T,
    z: &T,
) -> Result<LogSign, SeriesError> {
    Ok(LogSign::sum(series_terms(numer, denom, q, z)?))
}

/// Terminating `_rphi_s` in exact rational arithmetic.
pub fn basic_hypergeometric_exact(
    numer: &[ExactRational],
    denom: &[ExactRational],
    q: &ExactRational,
    z: &ExactRational,
) -> Result<ExactRational, SeriesError> {
    let m = termination_index(numer, denom, q)?;
    let excess = 1 + denom.len() as i64 - numer.len() as i64;
    let one = <ExactRational as Field>::one();
    let mut sum = one.clone();
    let mut term = one.clone();
    let mut qk = one.clone();
    for k in 1..=m {
        let mut num = one.clone();
        let mut den = one.clone();
        for a in numer {
            num *= &one - a * &qk;
        }
        for b in denom {
            den *= &one - b * &qk;
        }
        qk *= q;
        den *= &one - &qk;
        let mut ratio = num / den * z;
        if excess != 0 {
            ratio *= Field::powi(q, (k as i64 - 1) * excess);
            if excess % 2 != 0 {
                ratio = -ratio;
            }
        }
        term *= ratio;
        sum += &term;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn q_numbers() {
        assert_eq!(q_number(3, &r(1, 3)), r(13, 9));
        assert_eq!(q_number(-2, &r(3, 1)), r(-4, 9));
        assert_eq!(q_number(0, &r(5, 7)), r(0, 1));
        assert!((q_number(3, &0.5) - 1.75).abs() < 1e-15);
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(q_pochhammer(&r(1, 3), &r(1, 3), 2), r(16, 27));
        assert_eq!(q_pochhammer(&r(5, 1), &r(2, 1), 0), r(1, 1));
        let q = r(1, 3);
        let qn = Field::powi(&q, -3);
        assert_eq!(q_pochhammer(&qn, &q, 4), r(0, 1));
        assert!(q_pochhammer_log(&qn, &q, 4).is_zero());
        let ls = q_pochhammer_log(&r(1, 3), &r(1, 3), 2);
        assert!((ls.to_f64() - 16.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_series_is_one() {
        let q = r(1, 3);
        let one = r(1, 1);
        let v = basic_hypergeometric_exact(&[one, r(1, 9), r(-2, 1)], &[r(27, 1), r(0, 1)], &q, &q).unwrap();
        assert_eq!(v, r(1, 1));
    }

    #[test]
    fn q_chu_vandermonde() {
        // 2phi1(q^-n, b; c; q, c q^n / b) = (c/b;q)_n/(c;q)_n
        let q = r(2, 5);
        let b = r(3, 7);
        let c = r(5, 11);
        for n in 0..6i64 {
            let a = Field::powi(&q, -n);
            let z = &c * Field::powi(&q, n) / &b;
            let lhs = basic_hypergeometric_exact(&[a, b.clone()], &[c.clone()], &q, &z).unwrap();
            let rhs = q_pochhammer(&(&c / &b), &q, n as usize) / q_pochhammer(&c, &q, n as usize);
            assert_eq!(lhs, rhs);
            let fl = basic_hypergeometric(
                &[0.4f64.powi(-n as i32), 3.0 / 7.0],
                &[5.0 / 11.0],
                0.4,
                (5.0 / 11.0) * 0.4f64.powi(n as i32) / (3.0 / 7.0),
            )
            .unwrap();
            assert!((fl - rhs.as_f64()).abs() < 1e-12 * (1.0 + fl.abs()));
        }
    }

    #[test]
    fn series_errors() {
        let q = r(1, 2);
        assert_eq!(
            basic_hypergeometric_exact(&[r(3, 1)], &[r(5, 1)], &q, &q),
            Err(SeriesError::NonTerminating)
        );
        let err = basic_hypergeometric_exact(&[Field::powi(&q, -3)], &[Field::powi(&q, -1)], &q, &q);
        assert!(matches!(err, Err(SeriesError::DenominatorZero { index: 0, .. })));
        assert!(basic_hypergeometric(&[5.0], &[2.0], 0.5, 0.5).is_err());
    }

    #[test]
    fn paired_pochhammer_reduction() {
        let q = r(1, 3);
        let a = r(2, 5);
        for n in 0..5usize {
            let lhs = vwp_pair_reduce(&a, &q, n).unwrap();
            let rhs = (r(1, 1) - &a * Field::powi(&q, 2 * n as i64)) / (r(1, 1) - &a);
            assert_eq!(lhs, rhs);
        }
        assert_eq!(vwp_pair_reduce(&r(1, 1), &q, 2), Err(SeriesError::PoleAtOne));
    }
}
