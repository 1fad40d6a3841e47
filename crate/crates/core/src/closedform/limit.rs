//! Leading-order arithmetic in a perturbation `ε` for double sums whose terms
//! are individually of the form `0 · ∞`.
//!
//! A perturbed quantity is `v0 (1+ε)^a (1+κε)^b`; every `(1 - x)` factor becomes
//! `coeff · ε^ord` with `ord` 0 or 1, and products keep only the leading term.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ClosedFormError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Lead {
    pub coeff: BigRational,
    pub ord: i32,
}

impl Lead {
    pub fn one() -> Self {
        Lead { coeff: BigRational::one(), ord: 0 }
    }

    pub fn scalar(v: BigRational) -> Self {
        Lead { coeff: v, ord: 0 }
    }

    pub fn mul(&self, other: &Lead) -> Lead {
        Lead { coeff: &self.coeff * &other.coeff, ord: self.ord + other.ord }
    }

    pub fn div(&self, other: &Lead) -> Result<Lead, ClosedFormError> {
        if other.coeff.is_zero() {
            return Err(ClosedFormError::Pole);
        }
        Ok(Lead { coeff: &self.coeff / &other.coeff, ord: self.ord - other.ord })
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }
}

/// `v0 (1+ε)^a (1+κε)^b`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Pert {
    pub v0: BigRational,
    pub a: i32,
    pub b: i32,
}

impl Pert {
    pub fn constant(v0: BigRational) -> Self {
        Pert { v0, a: 0, b: 0 }
    }

    pub fn scale(&self, v: &BigRational) -> Pert {
        Pert { v0: &self.v0 * v, a: self.a, b: self.b }
    }

    pub fn recip(&self) -> Pert {
        Pert { v0: BigRational::one() / &self.v0, a: -self.a, b: -self.b }
    }
}

/// Perturbation direction `κ` for the second index.
#[derive(Clone, Debug)]
pub(crate) struct Limit {
    pub kappa: BigRational,
}

impl Limit {
    pub fn new(kappa: i64) -> Self {
        Limit { kappa: BigRational::from_integer(kappa.into()) }
    }

    /// Leading term of `1 - x`.
    pub fn one_minus(&self, x: &Pert) -> Result<Lead, ClosedFormError> {
        let w = BigRational::one() - &x.v0;
        if !w.is_zero() {
            return Ok(Lead::scalar(w));
        }
        let slope = BigRational::from_integer(x.a.into()) + &self.kappa * BigRational::from_integer(x.b.into());
        if x.a == 0 && x.b == 0 {
            return Ok(Lead::scalar(BigRational::zero()));
        }
        if slope.is_zero() {
            return Err(ClosedFormError::DegenerateLimit);
        }
        Ok(Lead { coeff: -slope, ord: 1 })
    }

    /// `(x; q)_n` to leading order.
    pub fn poch(&self, x: &Pert, q: &BigRational, n: usize) -> Result<Lead, ClosedFormError> {
        let mut acc = Lead::one();
        let mut cur = x.clone();
        for _ in 0..n {
            acc = acc.mul(&self.one_minus(&cur)?);
            cur = cur.scale(q);
        }
        Ok(acc)
    }

    pub fn pochs(&self, xs: &[Pert], q: &BigRational, n: usize) -> Result<Lead, ClosedFormError> {
        let mut acc = Lead::one();
        for x in xs {
            acc = acc.mul(&self.poch(x, q, n)?);
        }
        Ok(acc)
    }
}

/// Accumulates the `ε^0` part of a sum of leading-order terms.
#[derive(Default)]
pub(crate) struct OrderZeroSum {
    pub total: BigRational,
}

impl OrderZeroSum {
    pub fn add(&mut self, term: Lead) -> Result<(), ClosedFormError> {
        if term.is_zero() || term.ord > 0 {
            return Ok(());
        }
        if term.ord < 0 {
            return Err(ClosedFormError::DivergentTerm);
        }
        self.total += term.coeff;
        Ok(())
    }
}
