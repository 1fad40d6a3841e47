//! Single-excitation time evolution, the exact phase engine and transfer certification.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{analytic_decomposition, ChainError, SpectralDecomposition};
use crate::families::{eigenvalues, orthonormal_rows, Family, FamilySpec};
use crate::qseries::{parse_rational, two_adic_valuation, ParityClass, RationalQ};

pub type Amplitude = Complex64;

/// Floating times above this are refused: the angular resolution of `t ε` is gone.
pub const MAX_FLOAT_TIME: f64 = 1e8;

/// Fidelity at or above `1 - PERFECT_TOL` counts as perfect transfer.
pub const PERFECT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolveError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("q^-1 = {0} is not a ratio of two odd integers; no exact transfer time exists")]
    NotOddOdd(String),
    #[error("time {0} exceeds the floating-point bound 1e8; use an exact multiple of pi")]
    TimeTooLarge(f64),
    #[error("spectrum is not exactly rational")]
    NonRationalSpectrum,
    #[error("q must be rational for exact phases")]
    IrrationalQ,
    #[error("site index {index} outside 0..={n}")]
    SiteOutOfRange { index: usize, n: usize },
    #[error("cannot parse time {0:?}")]
    BadTime(String),
}

impl From<crate::families::FamilyError> for EvolveError {
    fn from(e: crate::families::FamilyError) -> Self {
        EvolveError::Chain(ChainError::Family(e))
    }
}

/// A time `t = pi_multiple * pi` with an exact rational multiple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactPhaseTime {
    pub pi_multiple: BigRational,
}

impl ExactPhaseTime {
    pub fn new(pi_multiple: BigRational) -> Self {
        ExactPhaseTime { pi_multiple }
    }

    pub fn from_integer(n: BigInt) -> Self {
        ExactPhaseTime { pi_multiple: BigRational::from_integer(n) }
    }

    pub fn scaled(&self, factor: i64) -> Self {
        ExactPhaseTime { pi_multiple: &self.pi_multiple * BigRational::from_integer(factor.into()) }
    }

    pub fn to_f64(&self) -> f64 {
        crate::qseries::ratio_to_f64(&self.pi_multiple) * std::f64::consts::PI
    }

    /// Parse `"9pi"`, `"3/2pi"`, `"pi"` or `"0"`.
    pub fn parse(text: &str) -> Result<Self, EvolveError> {
        let t = text.trim();
        let bad = || EvolveError::BadTime(text.to_string());
        if t == "0" {
            return Ok(ExactPhaseTime::new(BigRational::zero()));
        }
        let body = t.strip_suffix("pi").or_else(|| t.strip_suffix('π')).ok_or_else(bad)?;
        let body = body.trim().trim_end_matches('*').trim();
        if body.is_empty() {
            return Ok(ExactPhaseTime::new(BigRational::one()));
        }
        parse_rational(body).map(ExactPhaseTime::new).ok_or_else(bad)
    }
}

impl fmt::Display for ExactPhaseTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.pi_multiple;
        if m.is_zero() {
            write!(f, "0")
        } else if m.is_integer() {
            write!(f, "{}pi", m.numer())
        } else {
            write!(f, "{}/{}pi", m.numer(), m.denom())
        }
    }
}

/// `e^{-i pi r}` for a residue `r` in `[0, 2)`; integer residues give exact signs.
#[derive(Clone, Debug, PartialEq)]
pub enum Phase {
    Sign(i8),
    Angle(BigRational),
}

impl Phase {
    pub fn from_residue(residue: BigRational) -> Self {
        if residue.is_integer() {
            Phase::Sign(if residue.is_zero() { 1 } else { -1 })
        } else {
            Phase::Angle(residue)
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Phase::Sign(s) => Complex64::new(*s as f64, 0.0),
            Phase::Angle(r) => {
                let theta = -std::f64::consts::PI * r.to_f64().unwrap_or(0.0);
                Complex64::new(theta.cos(), theta.sin())
            }
        }
    }
}

/// `x mod 2` in `[0, 2)`.
pub fn residue_mod_two(x: &BigRational) -> BigRational {
    let two = BigRational::from_integer(2.into());
    let q = (x / &two).floor();
    x - two * q
}

fn check_sites(dec: &SpectralDecomposition, r: usize, s: usize) -> Result<(), EvolveError> {
    let n = dec.u.nrows().saturating_sub(1);
    for index in [r, s] {
        if index > n {
            return Err(EvolveError::SiteOutOfRange { index, n });
        }
    }
    Ok(())
}

/// `f_{r,s}(t) = sum_k U_{rk} U_{sk} e^{-i t ε_k}` at a floating time.
pub fn correlation(dec: &SpectralDecomposition, r: usize, s: usize, t: f64) -> Result<Amplitude, EvolveError> {
    check_sites(dec, r, s)?;
    if !t.is_finite() || t.abs() > MAX_FLOAT_TIME {
        return Err(EvolveError::TimeTooLarge(t));
    }
    Ok(dec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, e)| dec.u[(r, k)] * dec.u[(s, k)] * Complex64::from_polar(1.0, -t * e))
        .sum())
}

pub fn correlation_matrix(dec: &SpectralDecomposition, t: f64) -> Result<DMatrix<Amplitude>, EvolveError> {
    if !t.is_finite() || t.abs() > MAX_FLOAT_TIME {
        return Err(EvolveError::TimeTooLarge(t));
    }
    let phases: Vec<Complex64> = dec.eigenvalues.iter().map(|e| Complex64::from_polar(1.0, -t * e)).collect();
    Ok(phase_matrix(dec, &phases))
}

fn phase_matrix(dec: &SpectralDecomposition, phases: &[Complex64]) -> DMatrix<Amplitude> {
    let n = dec.u.nrows();
    DMatrix::from_fn(n, n, |r, s| (0..n).map(|k| dec.u[(r, k)] * dec.u[(s, k)] * phases[k]).sum())
}

/// Analytic decomposition plus exact eigenvalues, reusable across many exact times.
#[derive(Clone, Debug)]
pub struct ExactEvolution {
    pub spec: FamilySpec,
    pub decomposition: SpectralDecomposition,
    pub exact_eigenvalues: Vec<BigRational>,
}

impl ExactEvolution {
    pub fn new(spec: &FamilySpec) -> Result<Self, EvolveError> {
        spec.rational_q().ok_or(EvolveError::IrrationalQ)?;
        let decomposition = analytic_decomposition(spec)?;
        let exact_eigenvalues = decomposition.exact.clone().ok_or(EvolveError::NonRationalSpectrum)?;
        Ok(ExactEvolution { spec: spec.clone(), decomposition, exact_eigenvalues })
    }

    /// Residues `t ε_k / pi mod 2`, computed with unbounded integers.
    pub fn residues(&self, t: &ExactPhaseTime) -> Vec<BigRational> {
        self.exact_eigenvalues.iter().map(|e| residue_mod_two(&(&t.pi_multiple * e))).collect()
    }

    pub fn phases(&self, t: &ExactPhaseTime) -> Vec<Phase> {
        self.residues(t).into_iter().map(Phase::from_residue).collect()
    }

    pub fn correlation(&self, r: usize, s: usize, t: &ExactPhaseTime) -> Result<Amplitude, EvolveError> {
        check_sites(&self.decomposition, r, s)?;
        let u = &self.decomposition.u;
        let phases = self.phases(t);
        if phases.iter().all(|p| matches!(p, Phase::Sign(_))) {
            let re: f64 = phases
                .iter()
                .enumerate()
                .map(|(k, p)| match p {
                    Phase::Sign(sg) => *sg as f64 * u[(r, k)] * u[(s, k)],
                    Phase::Angle(_) => 0.0,
                })
                .sum();
            return Ok(Complex64::new(re, 0.0));
        }
        Ok(phases.iter().enumerate().map(|(k, p)| u[(r, k)] * u[(s, k)] * p.to_complex()).sum())
    }

    pub fn correlation_matrix(&self, t: &ExactPhaseTime) -> DMatrix<Amplitude> {
        let phases: Vec<Complex64> = self.phases(t).iter().map(Phase::to_complex).collect();
        phase_matrix(&self.decomposition, &phases)
    }
}

/// `f_{r,s}(t)` from rows `r` and `s` of `U` alone, without a full decomposition.
pub fn site_correlation(spec: &FamilySpec, r: usize, s: usize, t: &ExactPhaseTime) -> Result<Amplitude, EvolveError> {
    spec.rational_q().ok_or(EvolveError::IrrationalQ)?;
    for index in [r, s] {
        if index > spec.n {
            return Err(EvolveError::SiteOutOfRange { index, n: spec.n });
        }
    }
    let rows = orthonormal_rows(spec, &[r, s])?;
    let mut total = Complex64::new(0.0, 0.0);
    for (k, e) in eigenvalues(spec).iter().enumerate() {
        let e = e.to_exact().ok_or(EvolveError::NonRationalSpectrum)?;
        let phase = Phase::from_residue(residue_mod_two(&(&t.pi_multiple * e)));
        total += rows[0][k] * rows[1][k] * phase.to_complex();
    }
    Ok(total)
}

pub fn correlation_exact_phase(
    spec: &FamilySpec,
    r: usize,
    s: usize,
    t: &ExactPhaseTime,
) -> Result<Amplitude, EvolveError> {
    ExactEvolution::new(spec)?.correlation(r, s, t)
}

fn not_odd_odd(q: &RationalQ) -> EvolveError {
    let (p, qq) = q.inverse_parts();
    EvolveError::NotOddOdd(format!("{p}/{qq}"))
}

/// `T = Q^N pi` for `q^{-1} = P/Q` with `P`, `Q` odd.
pub fn pst_time(q: &RationalQ, n: usize) -> Result<ExactPhaseTime, EvolveError> {
    if q.parity_class() != ParityClass::OddOdd {
        return Err(not_odd_odd(q));
    }
    let (_, qq) = q.inverse_parts();
    Ok(ExactPhaseTime::from_integer(Pow::pow(qq, n)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParityRow {
    pub k: usize,
    /// `T ε_k / pi`.
    pub value: BigRational,
    pub integer: bool,
    pub parity_matches: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParityTable {
    pub time: ExactPhaseTime,
    pub rows: Vec<ParityRow>,
}

impl ParityTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.integer && r.parity_matches)
    }
}

/// For each `k`, whether `T ε_k / pi` is an integer with the parity of `k`.
pub fn phase_parity_check(spec: &FamilySpec, t: &ExactPhaseTime) -> Result<ParityTable, EvolveError> {
    spec.rational_q().ok_or(EvolveError::IrrationalQ)?;
    let values = eigenvalues(spec);
    let mut rows = Vec::with_capacity(values.len());
    for (k, e) in values.iter().enumerate() {
        let e = e.to_exact().ok_or(EvolveError::NonRationalSpectrum)?;
        let value = &t.pi_multiple * e;
        let integer = value.is_integer();
        let parity_matches = integer && (value.numer().is_odd() == (k % 2 == 1));
        rows.push(ParityRow { k, value, integer, parity_matches });
    }
    Ok(ParityTable { time: t.clone(), rows })
}

pub fn classify_q(q: &RationalQ) -> (ParityClass, String) {
    let (p, qq) = q.inverse_parts();
    let class = q.parity_class();
    let text = match class {
        ParityClass::OddOdd => format!(
            "q^-1 = {p}/{qq} is odd/odd: at T = {qq}^N pi every phase equals (-1)^k, so transfer times exist"
        ),
        ParityClass::EvenOverOdd => format!(
            "q^-1 = {p}/{qq} is even/odd: q^-1 + ... + q^-k = 2^r/Q^N times an odd integer for every k, \
             so the bracket parity never alternates with k"
        ),
        ParityClass::OddOverEven => format!(
            "q^-1 = {p}/{qq} is odd/even: q^-1 + ... + q^-k = odd integer / (2^(rk) Q^N) for every k, \
             so the bracket parity never alternates with k"
        ),
    };
    (class, text)
}

/// The integer bracket in `q^-1 + ... + q^-k = 2^{r_a - r_b k} bracket / Q^N`,
/// where `q^-1 = 2^{r_a} P / (2^{r_b} Q)` with `P`, `Q` odd and `k <= n`.
pub fn bracket(q: &RationalQ, n: usize, k: usize) -> BigInt {
    let (a, b) = q.inverse_parts();
    let ra = two_adic_valuation(&a);
    let rb = two_adic_valuation(&b);
    let odd_b: BigInt = &b >> rb;
    let inv = BigRational::new(a, b);
    let mut sum = BigRational::zero();
    let mut power = BigRational::one();
    for _ in 0..k {
        power = &power * &inv;
        sum += &power;
    }
    let two = BigInt::from(2);
    let scale = BigRational::new(Pow::pow(odd_b, n) * Pow::pow(&two, rb * k as u64), Pow::pow(&two, ra));
    let value = sum * scale;
    debug_assert!(value.is_integer());
    value.to_integer()
}

/// `|f_{r,s}(t)|` on a grid of floating times, in grid order.
pub fn fidelity_scan(dec: &SpectralDecomposition, r: usize, s: usize, grid: &[f64]) -> Result<Vec<f64>, EvolveError> {
    grid.par_iter().map(|&t| correlation(dec, r, s, t).map(|a| a.norm())).collect()
}

/// Candidate exact transfer times for a family with rational `q`.
pub fn candidate_times(spec: &FamilySpec) -> Result<Vec<ExactPhaseTime>, EvolveError> {
    let q = spec.rational_q().ok_or(EvolveError::IrrationalQ)?;
    let primary = pst_time(&q, spec.n)?;
    let mut out = vec![primary];
    if let Family::DualQHahn { .. } = spec.family {
        let (p, _) = q.inverse_parts();
        let alt = ExactPhaseTime::from_integer(Pow::pow(p, spec.n));
        if alt != out[0] {
            out.push(alt);
        }
    }
    Ok(out)
}

/// First candidate time whose phase table passes, with the table; the first candidate otherwise.
pub fn transfer_time(spec: &FamilySpec) -> Result<(ExactPhaseTime, ParityTable), EvolveError> {
    let candidates = candidate_times(spec)?;
    let mut first = None;
    for t in candidates {
        let table = phase_parity_check(spec, &t)?;
        if table.all_pass() {
            return Ok((t, table));
        }
        first.get_or_insert((t, table));
    }
    Ok(first.expect("at least one candidate"))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Perfect,
    Imperfect { best_fidelity: f64 },
}

#[derive(Clone, Debug)]
pub struct TransferReport {
    pub spec: FamilySpec,
    pub time: ExactPhaseTime,
    pub parity: ParityTable,
    /// `|f_{N,0}(T)|`.
    pub endpoint_fidelity: f64,
    /// `f_{n,0}(T)` for every site `n`.
    pub amplitudes: Vec<Amplitude>,
    /// `max |f_{r,s}(2T) - δ_{rs}|`.
    pub period_residual: f64,
    /// `max |f_{r,s}(T) - δ_{r+s,N}|`, reported for the perfect-transfer q-Krawtchouk chain.
    pub mirror_residual: Option<f64>,
    pub verdict: Verdict,
}

fn max_deviation(m: &DMatrix<Amplitude>, target: impl Fn(usize, usize) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for s in 0..m.ncols() {
            worst = worst.max((m[(r, s)] - Complex64::new(target(r, s), 0.0)).norm());
        }
    }
    worst
}

pub fn transfer_report(spec: &FamilySpec) -> Result<TransferReport, EvolveError> {
    let evolution = ExactEvolution::new(spec)?;
    let (time, parity) = transfer_time(spec)?;
    let n = spec.n;
    let f_t = evolution.correlation_matrix(&time);
    let f_2t = evolution.correlation_matrix(&time.scaled(2));
    let amplitudes: Vec<Amplitude> = (0..=n).map(|r| f_t[(r, 0)]).collect();
    let endpoint_fidelity = amplitudes[n].norm();
    let period_residual = max_deviation(&f_2t, |r, s| if r == s { 1.0 } else { 0.0 });
    let mirror_residual = spec
        .is_pst()
        .then(|| max_deviation(&f_t, |r, s| if r + s == n { 1.0 } else { 0.0 }));
    let verdict = if endpoint_fidelity >= 1.0 - PERFECT_TOL {
        Verdict::Perfect
    } else {
        Verdict::Imperfect { best_fidelity: endpoint_fidelity }
    };
    Ok(TransferReport { spec: spec.clone(), time, parity, endpoint_fidelity, amplitudes, period_residual, mirror_residual, verdict })
}
