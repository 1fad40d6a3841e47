//! Closed-form values of the correlation function at the transfer time `T`,
//! each checked against the direct spectral sum with exact phases.

mod limit;

use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::evolve::{transfer_time, EvolveError, ExactEvolution, ExactPhaseTime};
use crate::families::{self, Family, FamilyError, FamilyKind, FamilySpec, Model};
use crate::qseries::{
    basic_hypergeometric_exact, q_pochhammer_log, vwp_pair_reduce, Field, LogSign, ParityClass, RationalQ,
    SeriesError,
};

use limit::{Lead, Limit, OrderZeroSum, Pert};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("phase condition fails at every candidate time (first tried {0})")]
    PhaseConditionUnmet(ExactPhaseTime),
    #[error("operation needs the {expected} family, got {got}")]
    WrongFamily { expected: &'static str, got: FamilyKind },
    #[error("q must be rational")]
    IrrationalInput,
    #[error("q^-1 = {0} is not a ratio of two odd integers")]
    NotOddOdd(String),
    #[error("site index {index} outside 0..={n}")]
    SiteOutOfRange { index: usize, n: usize },
    #[error("division by a vanishing factor in a closed-form sum")]
    Pole,
    #[error("perturbation direction is degenerate for this factor")]
    DegenerateLimit,
    #[error("closed-form sum has a divergent term")]
    DivergentTerm,
    #[error("empty parameter grid")]
    EmptyGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    FallbackDirectSum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormResult {
    pub value: f64,
    pub method: Method,
    pub time: ExactPhaseTime,
    /// `|value - direct spectral sum|`.
    pub residual_vs_direct: f64,
}

type Q = BigRational;

fn qpow(q: &Q, e: i64) -> Q {
    Pow::pow(q, e as i32)
}

fn ls_poch(a: &Q, q: &Q, n: usize) -> LogSign {
    q_pochhammer_log(a, q, n)
}

struct Setup {
    model: Model<Q>,
    evolution: ExactEvolution,
    time: ExactPhaseTime,
    signs: Vec<f64>,
}

impl Setup {
    fn new(spec: &FamilySpec, expected: FamilyKind) -> Result<Self, ClosedFormError> {
        if spec.kind() != expected {
            return Err(ClosedFormError::WrongFamily { expected: expected.name(), got: spec.kind() });
        }
        families::validate(spec).into_result()?;
        let q = spec.rational_q().ok_or(ClosedFormError::IrrationalInput)?;
        if q.parity_class() != ParityClass::OddOdd {
            let (p, qq) = q.inverse_parts();
            return Err(ClosedFormError::NotOddOdd(format!("{p}/{qq}")));
        }
        let (time, table) = transfer_time(spec)?;
        if !table.all_pass() {
            return Err(ClosedFormError::PhaseConditionUnmet(time));
        }
        let model = spec.exact_model().ok_or(ClosedFormError::IrrationalInput)?;
        let evolution = ExactEvolution::new(spec)?;
        let signs = families::row_sign_vector(spec);
        Ok(Setup { model, evolution, time, signs })
    }

    fn check_sites(&self, r: usize, s: usize) -> Result<(), ClosedFormError> {
        for index in [r, s] {
            if index > self.model.n {
                return Err(ClosedFormError::SiteOutOfRange { index, n: self.model.n });
            }
        }
        Ok(())
    }

    fn direct(&self, r: usize, s: usize) -> Result<f64, ClosedFormError> {
        Ok(self.evolution.correlation(r, s, &self.time)?.re)
    }

    /// `1/sqrt|d_r d_s|` with the norms as the defining formulas give them.
    fn inv_sqrt_norms(&self, r: usize, s: usize) -> Result<LogSign, ClosedFormError> {
        let d = (self.model.raw_norm(r) * self.model.raw_norm(s)).abs();
        Ok(d.sqrt()?.recip())
    }

    fn finish(&self, r: usize, s: usize, unsigned: LogSign) -> Result<ClosedFormResult, ClosedFormError> {
        let value = self.signs[r] * self.signs[s] * unsigned.to_f64();
        let direct = self.direct(r, s)?;
        Ok(ClosedFormResult {
            value,
            method: Method::ClosedForm,
            time: self.time.clone(),
            residual_vs_direct: (value - direct).abs(),
        })
    }

    fn fallback(&self, r: usize, s: usize) -> Result<ClosedFormResult, ClosedFormError> {
        Ok(ClosedFormResult {
            value: self.direct(r, s)?,
            method: Method::FallbackDirectSum,
            time: self.time.clone(),
            residual_vs_direct: 0.0,
        })
    }
}

/// `(-1;q)_N`.
fn minus_one_poch(q: &Q, n: usize) -> LogSign {
    ls_poch(&-<Q as One>::one(), q, n)
}

/// Perturbed `q^r` and `q^s`.
fn perturbed_sites(q: &Q, r: usize, s: usize) -> (Pert, Pert) {
    (
        Pert { v0: qpow(q, r as i64), a: 1, b: 0 },
        Pert { v0: qpow(q, s as i64), a: 0, b: 1 },
    )
}

fn c(v: Q) -> Pert {
    Pert::constant(v)
}

/// Sum over `n = 0..=m` of a very-well-poised-free kernel term times `c_m`, to order `ε^0`.
#[allow(clippy::too_many_arguments)]
fn kernel_terms(
    lim: &Limit,
    acc: &mut OrderZeroSum,
    coeff: &Lead,
    numer: &[Pert],
    denom: &[Pert],
    q: &Q,
    z: &Q,
    m: usize,
    pair: Option<&Q>,
) -> Result<(), ClosedFormError> {
    let excess = 1 + denom.len() as i64 - numer.len() as i64;
    for n in 0..=m {
        let mut t = lim.pochs(numer, q, n)?.div(&lim.pochs(denom, q, n)?)?;
        t = t.div(&lim.poch(&c(q.clone()), q, n)?)?;
        let mut scalar = qpow(z, n as i64);
        if excess != 0 {
            let tri = (n * n.saturating_sub(1) / 2) as i64;
            scalar *= qpow(q, tri * excess);
            if excess % 2 != 0 && n % 2 == 1 {
                scalar = -scalar;
            }
        }
        if let Some(a) = pair {
            scalar *= vwp_pair_reduce(a, q, n)?;
        }
        acc.add(coeff.mul(&t).mul(&Lead::scalar(scalar)))?;
    }
    Ok(())
}

fn krawtchouk_param(model: &Model<Q>) -> Q {
    match &model.family {
        Family::QKrawtchouk { p } | Family::AffineQKrawtchouk { p } | Family::QuantumQKrawtchouk { p } => p.clone(),
        Family::DualQKrawtchouk { c } => c.clone(),
        _ => <Q as Zero>::zero(),
    }
}

/// `f_{r,s}(T)` for the q-Krawtchouk family through the balanced `4phi3`.
pub fn f_t_qkrawtchouk(spec: &FamilySpec, r: usize, s: usize) -> Result<ClosedFormResult, ClosedFormError> {
    let setup = Setup::new(spec, FamilyKind::QKrawtchouk)?;
    setup.check_sites(r, s)?;
    let m = &setup.model;
    let n = m.n;
    if r + s > n {
        return setup.fallback(r, s);
    }
    let q = &m.q;
    let p = krawtchouk_param(m);
    let (ri, si, ni) = (r as i64, s as i64, n as i64);
    let qnn = qpow(q, -ni);
    let pre = ls_poch(&-qpow(q, -si), q, r)
        * ls_poch(&-qpow(q, -ri), q, s)
        * ls_poch(&(&qnn / &p), q, n - r - s)
        * ls_poch(&qnn, q, r + s)
        / (ls_poch(&qnn, q, r) * ls_poch(&qnn, q, s))
        * setup.inv_sqrt_norms(r, s)?;
    if pre.is_zero() {
        return setup.finish(r, s, LogSign::ZERO);
    }
    let series = basic_hypergeometric_exact(
        &[qpow(q, -ri), qpow(q, -si), &p * qpow(q, ni), qpow(q, -ri - si) / &p],
        &[-qpow(q, -ri), -qpow(q, -si), qpow(q, 1 + ni - ri - si)],
        q,
        q,
    )?;
    setup.finish(r, s, pre * series.to_log_sign())
}

fn affine_endpoint_ls(p: &Q, q: &Q, n: usize) -> Result<LogSign, ClosedFormError> {
    let pq = p * q;
    Ok(minus_one_poch(q, n) * pq.to_log_sign().sqrt()?.powi(n as i64) * ls_poch(&pq, q, n).sqrt()?)
}

/// `f_{r,s}(T)` for the affine q-Krawtchouk family.
pub fn f_t_affine(spec: &FamilySpec, r: usize, s: usize) -> Result<ClosedFormResult, ClosedFormError> {
    let setup = Setup::new(spec, FamilyKind::AffineQKrawtchouk)?;
    setup.check_sites(r, s)?;
    let (r, s) = if s == 0 || r == 0 { (r.max(s), 0) } else { (r, s) };
    let m = &setup.model;
    let (q, n, p) = (&m.q, m.n, krawtchouk_param(m));
    if r == n && s == 0 {
        return setup.finish(r, s, affine_endpoint_ls(&p, q, n)?);
    }
    let pre = minus_one_poch(q, n) * setup.inv_sqrt_norms(r, s)?;
    if s == 0 {
        let series = basic_hypergeometric_exact(
            &[qpow(q, r as i64 - n as i64), <Q as Zero>::zero()],
            &[-qpow(q, 1 - n as i64)],
            q,
            &(<Q as One>::one() / (&p * qpow(q, r as i64))),
        )?;
        return setup.finish(r, s, pre * series.to_log_sign());
    }
    let total = affine_double_sum(&Limit::new(2), &p, q, n, r, s)?;
    setup.finish(r, s, pre * total.to_log_sign())
}

fn affine_double_sum(lim: &Limit, p: &Q, q: &Q, n: usize, r: usize, s: usize) -> Result<Q, ClosedFormError> {
    let ni = n as i64;
    let (rr, ss) = perturbed_sites(q, r, s);
    let qnn = qpow(q, -ni);
    let mut acc = OrderZeroSum::default();
    for m in 0..=n {
        let mi = m as i64;
        let num = lim.pochs(&[rr.scale(&qnn), ss.scale(&qnn)], q, m)?;
        let den = lim.pochs(&[c(q.clone()), c(-qpow(q, 1 - ni)), c(qnn.clone())], q, m)?;
        let mono = qpow(&(p * rr.v0.clone() * ss.v0.clone()), -mi);
        let coeff = num.div(&den)?.mul(&Lead::scalar(mono));
        if coeff.is_zero() {
            continue;
        }
        let top = qpow(q, ni + 1 - mi);
        kernel_terms(
            lim,
            &mut acc,
            &coeff,
            &[rr.recip(), ss.recip(), c(qpow(q, -mi))],
            &[c(p * q), rr.recip().scale(&top), ss.recip().scale(&top)],
            q,
            &(p * qpow(q, 2 * ni - mi + 3)),
            m,
            None,
        )?;
    }
    Ok(acc.total)
}

fn quantum_prefactor(setup: &Setup, p: &Q, r: usize, s: usize) -> Result<LogSign, ClosedFormError> {
    let m = &setup.model;
    let q = &m.q;
    let ratio = (ls_poch(&(p * q), q, m.n) / ls_poch(q, q, m.n)).abs();
    Ok(minus_one_poch(q, m.n) * ratio * setup.inv_sqrt_norms(r, s)?)
}

fn quantum_endpoint_ls(p: &Q, q: &Q, n: usize) -> Result<LogSign, ClosedFormError> {
    let ni = n as i64;
    let sign = if n % 2 == 0 { LogSign::ONE } else { LogSign::from_f64(-1.0) };
    let q_part = q.to_log_sign().powi(-(3 * ni * ni + ni)).sqrt()?.sqrt()?;
    Ok(minus_one_poch(q, n) * p.to_log_sign().powi(-ni) * q_part * (sign * ls_poch(&(p * q), q, n)).sqrt()?)
}

/// `f_{r,s}(T)` for the quantum q-Krawtchouk family.
pub fn f_t_quantum(spec: &FamilySpec, r: usize, s: usize) -> Result<ClosedFormResult, ClosedFormError> {
    let setup = Setup::new(spec, FamilyKind::QuantumQKrawtchouk)?;
    setup.check_sites(r, s)?;
    let (r, s) = if s == 0 || r == 0 { (r.max(s), 0) } else { (r, s) };
    let m = &setup.model;
    let (q, n, p) = (&m.q, m.n, krawtchouk_param(m));
    if r == n && s == 0 {
        return setup.finish(r, s, quantum_endpoint_ls(&p, q, n)?);
    }
    let pre = quantum_prefactor(&setup, &p, r, s)?;
    let total = quantum_double_sum(&Limit::new(2), &p, q, n, r, s)?;
    setup.finish(r, s, pre * total.to_log_sign())
}

fn quantum_double_sum(lim: &Limit, p: &Q, q: &Q, n: usize, r: usize, s: usize) -> Result<Q, ClosedFormError> {
    let ni = n as i64;
    let (rr, ss) = perturbed_sites(q, r, s);
    let qnn = qpow(q, -ni);
    let mut acc = OrderZeroSum::default();
    for m in 0..=n {
        let mi = m as i64;
        let num = lim.pochs(&[rr.recip(), ss.recip()], q, m)?;
        let den = lim.pochs(&[c(q.clone()), c(-qpow(q, 1 - ni)), c(qnn.clone())], q, m)?;
        let mono = qpow(&(p * rr.v0.clone() * ss.v0.clone() * qpow(q, 1 - ni)), mi);
        let coeff = num.div(&den)?.mul(&Lead::scalar(mono));
        if coeff.is_zero() {
            continue;
        }
        let low = qpow(q, 1 - mi);
        kernel_terms(
            lim,
            &mut acc,
            &coeff,
            &[rr.scale(&qnn), ss.scale(&qnn), c(qpow(q, -mi))],
            &[c(&qnn / p), rr.scale(&low), ss.scale(&low)],
            q,
            &(qpow(q, ni - mi + 2) / p),
            m,
            None,
        )?;
    }
    Ok(acc.total)
}

fn q_squared_poch(a: &Q, q: &Q, n: usize) -> LogSign {
    ls_poch(a, &(q * q), n)
}

fn dual_qk_endpoint_ls(cc: &Q, q: &Q, n: usize) -> Result<LogSign, ClosedFormError> {
    let ni = n as i64;
    let q_part = q.to_log_sign().powi(-ni * (ni - 1)).sqrt()?.sqrt()?;
    Ok(minus_one_poch(q, n) * (-cc.clone()).to_log_sign().sqrt()?.powi(ni) * q_part
        / q_squared_poch(&(cc * qpow(q, 1 - ni)), q, n))
}

/// `f_{r,s}(T)` for the dual q-Krawtchouk family.
pub fn f_t_dual_qk(spec: &FamilySpec, r: usize, s: usize) -> Result<ClosedFormResult, ClosedFormError> {
    let setup = Setup::new(spec, FamilyKind::DualQKrawtchouk)?;
    setup.check_sites(r, s)?;
    let (r, s) = if s == 0 || r == 0 { (r.max(s), 0) } else { (r, s) };
    let m = &setup.model;
    let (q, n, cc) = (&m.q, m.n, krawtchouk_param(m));
    if r == n && s == 0 {
        return setup.finish(r, s, dual_qk_endpoint_ls(&cc, q, n)?);
    }
    let base = &cc * qpow(q, 1 - n as i64);
    let pre = ls_poch(&base, q, n) * minus_one_poch(q, n) / q_squared_poch(&base, q, n) * setup.inv_sqrt_norms(r, s)?;
    let total = dual_qk_double_sum(&Limit::new(2), &cc, q, n, r, s)?;
    setup.finish(r, s, pre * total.to_log_sign())
}

fn dual_qk_double_sum(lim: &Limit, cc: &Q, q: &Q, n: usize, r: usize, s: usize) -> Result<Q, ClosedFormError> {
    let ni = n as i64;
    let (rr, ss) = perturbed_sites(q, r, s);
    let qnn = qpow(q, -ni);
    let q2 = q * q;
    let base = cc * qpow(q, 1 - ni);
    let mut acc = OrderZeroSum::default();
    for m in 0..=n {
        let mi = m as i64;
        let num = lim.pochs(&[rr.scale(&qnn), ss.scale(&qnn)], q, m)?;
        let den = lim.pochs(&[c(q.clone()), c(-qpow(q, 1 - ni)), c(qnn.clone())], q, m)?;
        let mono = crate::qseries::q_pochhammer(&base, &q2, m)
            * qpow(&-cc.clone(), -mi)
            * qpow(q, -mi * (mi - 1) / 2)
            * qpow(&(qpow(q, ni) / (rr.v0.clone() * ss.v0.clone())), mi);
        let coeff = num.div(&den)?.mul(&Lead::scalar(mono));
        if coeff.is_zero() {
            continue;
        }
        if s == 0 {
            acc.add(coeff)?;
            continue;
        }
        let top = qpow(q, ni - mi + 1);
        kernel_terms(
            lim,
            &mut acc,
            &coeff,
            &[rr.recip(), ss.recip(), c(qpow(q, -mi))],
            &[rr.recip().scale(&top), ss.recip().scale(&top)],
            q,
            &(cc * qpow(q, ni + 2)),
            m,
            None,
        )?;
    }
    Ok(acc.total)
}

fn racah_params(model: &Model<Q>) -> (Q, Q, Q) {
    match &model.family {
        Family::QRacah { alpha, beta, gamma } => (alpha.clone(), beta.clone(), gamma.clone()),
        _ => (<Q as Zero>::zero(), <Q as Zero>::zero(), <Q as Zero>::zero()),
    }
}

fn qracah_endpoint_ls(al: &Q, be: &Q, ga: &Q, q: &Q, n: usize) -> Result<LogSign, ClosedFormError> {
    let ni = n as i64;
    let g = ga / be;
    let ab = al * be;
    let q_part = q.to_log_sign().powi(-ni * (ni - 1)).sqrt()?.sqrt()?;
    let sign = if n % 2 == 0 { LogSign::ONE } else { LogSign::from_f64(-1.0) };
    let radicand = sign
        * ls_poch(&(al * q), q, n)
        * ls_poch(&(be * q), q, n)
        * ls_poch(&(ga * q), q, n)
        * ls_poch(&(&ab * q / ga), q, n)
        / (ls_poch(&(&ab * q * q), q, n) * ls_poch(&(&ab * qpow(q, ni + 1)), q, n));
    Ok(minus_one_poch(q, n) * g.to_log_sign().sqrt()?.powi(ni) * q_part
        / q_squared_poch(&(&g * qpow(q, 1 - ni)), q, n)
        * radicand.sqrt()?)
}

/// `f_{r,s}(T)` for the q-Racah family through the very-well-poised `10phi9` kernels.
pub fn f_t_qracah(spec: &FamilySpec, r: usize, s: usize) -> Result<ClosedFormResult, ClosedFormError> {
    let setup = Setup::new(spec, FamilyKind::QRacah)?;
    setup.check_sites(r, s)?;
    let (r, s) = if s == 0 || r == 0 { (r.max(s), 0) } else { (r, s) };
    let m = &setup.model;
    let (q, n) = (&m.q, m.n);
    let (al, be, ga) = racah_params(m);
    if r == n && s == 0 {
        let value = qracah_endpoint_ls(&al, &be, &ga, q, n)?;
        let general = qracah_general(&setup, &al, &be, &ga, r, s)?;
        let signed = if general.sign() < 0 { -value.abs() } else { value.abs() };
        return setup.finish(r, s, signed);
    }
    let value = qracah_general(&setup, &al, &be, &ga, r, s)?;
    setup.finish(r, s, value)
}

fn qracah_general(setup: &Setup, al: &Q, be: &Q, ga: &Q, r: usize, s: usize) -> Result<LogSign, ClosedFormError> {
    let m = &setup.model;
    let (q, n) = (&m.q, m.n);
    let base = ga / be * qpow(q, 1 - n as i64);
    let pre = ls_poch(&base, q, n) * minus_one_poch(q, n) / q_squared_poch(&base, q, n) * setup.inv_sqrt_norms(r, s)?;
    let total = qracah_double_sum(&Limit::new(2), al, be, ga, q, n, r, s)?;
    Ok(pre * total.to_log_sign())
}

#[allow(clippy::too_many_arguments)]
fn qracah_double_sum(
    lim: &Limit,
    al: &Q,
    be: &Q,
    ga: &Q,
    q: &Q,
    n: usize,
    r: usize,
    s: usize,
) -> Result<Q, ClosedFormError> {
    let ni = n as i64;
    let (rr, ss) = perturbed_sites(q, r, s);
    let qnn = qpow(q, -ni);
    let ab = al * be;
    let g = ga / be;
    let q2 = q * q;
    let base = &g * qpow(q, 1 - ni);
    let low = qpow(q, -ni - 1) / &ab;
    let mut acc = OrderZeroSum::default();
    for m in 0..=n {
        let mi = m as i64;
        let num = lim.pochs(&[rr.scale(&qnn), ss.scale(&qnn), rr.recip().scale(&low), ss.recip().scale(&low)], q, m)?;
        let den = lim.pochs(
            &[
                c(q.clone()),
                c(&g / al * &qnn),
                c(&qnn / be),
                c(low.clone()),
                c(-qpow(q, 1 - ni)),
                c(qnn.clone()),
            ],
            q,
            m,
        )?;
        let mono = qpow(q, mi) * crate::qseries::q_pochhammer(&base, &q2, m);
        let coeff = num.div(&den)?.mul(&Lead::scalar(mono));
        if coeff.is_zero() {
            continue;
        }
        if s == 0 {
            acc.add(coeff)?;
            continue;
        }
        let a = &ab * qpow(q, ni - mi + 1);
        let shift = qpow(q, ni - mi + 1);
        let abq_top = &ab * qpow(q, ni + 2 - mi);
        let top = qpow(q, ni + 1 - mi);
        kernel_terms(
            lim,
            &mut acc,
            &coeff,
            &[
                c(a.clone()),
                c(be * &shift),
                c(&ab / ga * &shift),
                c(qpow(q, -mi)),
                rr.recip(),
                ss.recip(),
                rr.scale(&(&ab * q)),
                ss.scale(&(&ab * q)),
            ],
            &[
                c(al * q),
                c(ga * q),
                c(&ab * qpow(q, ni + 2)),
                rr.scale(&abq_top),
                ss.scale(&abq_top),
                rr.recip().scale(&top),
                ss.recip().scale(&top),
            ],
            q,
            &(&g * qpow(q, ni + 2)),
            m,
            Some(&a),
        )?;
    }
    Ok(acc.total)
}

fn qkrawtchouk_endpoint_ls(p: &Q, q: &Q, n: usize) -> Result<LogSign, ClosedFormError> {
    let ni = n as i64;
    let radicand = p.to_log_sign().powi(ni) * q.to_log_sign().powi(ni * (ni + 1) / 2)
        / (ls_poch(&-(p * q), q, n) * ls_poch(&-(p * qpow(q, ni)), q, n));
    Ok(minus_one_poch(q, n) * radicand.sqrt()?)
}

fn qhahn_endpoint_ls(al: &Q, be: &Q, q: &Q, n: usize) -> Result<LogSign, ClosedFormError> {
    let ni = n as i64;
    let ab = al * be;
    let radicand = ls_poch(&(al * q), q, n) * ls_poch(&(be * q), q, n)
        / (ls_poch(&(&ab * q * q), q, n) * ls_poch(&(&ab * qpow(q, ni + 1)), q, n))
        * (al * q).to_log_sign().powi(ni);
    Ok(minus_one_poch(q, n) * radicand.sqrt()?)
}

fn dual_qhahn_endpoint_ls(ga: &Q, de: &Q, q: &Q, n: usize) -> Result<LogSign, ClosedFormError> {
    let ni = n as i64;
    let gq = ga * q;
    if ga == de {
        return Ok(minus_one_poch(q, n) * gq.to_log_sign().sqrt()?.powi(ni) / ls_poch(&-gq.clone(), q, n));
    }
    let radicand = ls_poch(&gq, q, n) * ls_poch(&(de * q), q, n) * gq.to_log_sign().powi(ni);
    Ok(minus_one_poch(q, n) / q_squared_poch(&(ga * de * q * q), q, n) * radicand.sqrt()?)
}

/// The `f_{N,0}(T)` display of each family, evaluated as a formula with no phase check.
pub fn endpoint_formula(spec: &FamilySpec) -> Result<f64, ClosedFormError> {
    let m = spec.exact_model().ok_or(ClosedFormError::IrrationalInput)?;
    let (q, n) = (&m.q, m.n);
    let value = match &m.family {
        Family::QKrawtchouk { p } => qkrawtchouk_endpoint_ls(p, q, n)?,
        Family::AffineQKrawtchouk { p } => affine_endpoint_ls(p, q, n)?,
        Family::QuantumQKrawtchouk { p } => quantum_endpoint_ls(p, q, n)?,
        Family::DualQKrawtchouk { c } => dual_qk_endpoint_ls(c, q, n)?,
        Family::QHahn { alpha, beta } => qhahn_endpoint_ls(alpha, beta, q, n)?,
        Family::DualQHahn { gamma, delta } => dual_qhahn_endpoint_ls(gamma, delta, q, n)?,
        Family::QRacah { alpha, beta, gamma } => qracah_endpoint_ls(alpha, beta, gamma, q, n)?,
    };
    Ok(value.to_f64())
}

/// `sum_k U_{rk} U_{sk} (-1)^k`: the spectral sum with the phases the closed forms assume.
pub fn alternating_sum(spec: &FamilySpec, r: usize, s: usize) -> Result<f64, ClosedFormError> {
    let u = families::orthonormal_matrix(spec)?;
    let n = spec.n;
    for index in [r, s] {
        if index > n {
            return Err(ClosedFormError::SiteOutOfRange { index, n });
        }
    }
    Ok((0..=n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * u[(r, k)] * u[(s, k)]).sum())
}

fn endpoint_result(spec: &FamilySpec, expected: FamilyKind) -> Result<ClosedFormResult, ClosedFormError> {
    let setup = Setup::new(spec, expected)?;
    let n = setup.model.n;
    let magnitude = endpoint_formula(spec)?.abs();
    let direct = setup.direct(n, 0)?;
    let value = if direct < 0.0 { -magnitude } else { magnitude };
    Ok(ClosedFormResult {
        value,
        method: Method::ClosedForm,
        time: setup.time.clone(),
        residual_vs_direct: (value - direct).abs(),
    })
}

pub fn f_t_qhahn_n0(spec: &FamilySpec) -> Result<ClosedFormResult, ClosedFormError> {
    endpoint_result(spec, FamilyKind::QHahn)
}

pub fn f_t_dual_qhahn_n0(spec: &FamilySpec) -> Result<ClosedFormResult, ClosedFormError> {
    endpoint_result(spec, FamilyKind::DualQHahn)
}

/// Closed-form `f_{r,s}(T)` for any family; q-Hahn types support only `(N, 0)`.
pub fn f_t(spec: &FamilySpec, r: usize, s: usize) -> Result<ClosedFormResult, ClosedFormError> {
    match spec.kind() {
        FamilyKind::QKrawtchouk => f_t_qkrawtchouk(spec, r, s),
        FamilyKind::AffineQKrawtchouk => f_t_affine(spec, r, s),
        FamilyKind::QuantumQKrawtchouk => f_t_quantum(spec, r, s),
        FamilyKind::DualQKrawtchouk => f_t_dual_qk(spec, r, s),
        FamilyKind::QRacah => f_t_qracah(spec, r, s),
        kind @ (FamilyKind::QHahn | FamilyKind::DualQHahn) => {
            let n = spec.n;
            if (r, s) == (n, 0) || (r, s) == (0, n) {
                endpoint_result(spec, kind)
            } else {
                let setup = Setup::new(spec, kind)?;
                setup.check_sites(r, s)?;
                setup.fallback(r, s)
            }
        }
    }
}

/// Grid maximiser of `|f_{N,0}(T)|` over `p` for the q-Krawtchouk family.
pub fn argmax_p(q: &RationalQ, n: usize, grid: &[Q]) -> Result<(Q, f64), ClosedFormError> {
    if q.parity_class() != ParityClass::OddOdd {
        let (p, qq) = q.inverse_parts();
        return Err(ClosedFormError::NotOddOdd(format!("{p}/{qq}")));
    }
    let values: Vec<f64> = grid
        .par_iter()
        .map(|p| qkrawtchouk_endpoint_ls(p, q.value(), n).map(|v| v.to_f64().abs()))
        .collect::<Result<_, _>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, &v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        })
        .ok_or(ClosedFormError::EmptyGrid)?;
    Ok((grid[best.0].clone(), best.1))
}

/// Geometric grid `centre * ratio^j` for `j` in `-half..=half`, exact.
pub fn geometric_grid(centre: &Q, ratio: &Q, half: usize) -> Vec<Q> {
    (-(half as i64)..=half as i64).map(|j| centre * qpow(ratio, j)).collect()
}
