//! The seven finite discrete orthogonal polynomial families and their spin-chain data.

mod formulas;

use std::fmt;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::chain::SpinChain;
use crate::qseries::{ratio_to_f64, Field, LogSign, ParityClass, RationalQ, SeriesError};

pub use formulas::Model;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("invalid family specification: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("q^-1 = {0} is not a ratio of two odd integers")]
    NotOddOdd(String),
    #[error("index {index} outside 0..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("family {family} has no parameter named {name}")]
    UnknownParameter { family: &'static str, name: String },
}

/// A parameter value: exact rational, or a plain real for scans and near-limit checks.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Real(f64),
}

impl Scalar {
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(BigRational::new(num.into(), den.into()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => ratio_to_f64(r),
            Scalar::Real(v) => *v,
        }
    }

    /// Exact value; reals convert to the binary fraction they store.
    pub fn to_exact(&self) -> Option<BigRational> {
        match self {
            Scalar::Exact(r) => Some(r.clone()),
            Scalar::Real(v) => BigRational::from_float(*v),
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Real(_) => None,
        }
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Real(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Real(v) => write!(f, "{v:.16e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    QKrawtchouk,
    AffineQKrawtchouk,
    QuantumQKrawtchouk,
    DualQKrawtchouk,
    QHahn,
    DualQHahn,
    QRacah,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 7] = [
        FamilyKind::QKrawtchouk,
        FamilyKind::AffineQKrawtchouk,
        FamilyKind::QuantumQKrawtchouk,
        FamilyKind::DualQKrawtchouk,
        FamilyKind::QHahn,
        FamilyKind::DualQHahn,
        FamilyKind::QRacah,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::QKrawtchouk => "q-krawtchouk",
            FamilyKind::AffineQKrawtchouk => "affine-q-krawtchouk",
            FamilyKind::QuantumQKrawtchouk => "quantum-q-krawtchouk",
            FamilyKind::DualQKrawtchouk => "dual-q-krawtchouk",
            FamilyKind::QHahn => "q-hahn",
            FamilyKind::DualQHahn => "dual-q-hahn",
            FamilyKind::QRacah => "q-racah",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        FamilyKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyKind::QKrawtchouk | FamilyKind::AffineQKrawtchouk | FamilyKind::QuantumQKrawtchouk => &["p"],
            FamilyKind::DualQKrawtchouk => &["c"],
            FamilyKind::QHahn => &["alpha", "beta"],
            FamilyKind::DualQHahn => &["gamma", "delta"],
            FamilyKind::QRacah => &["alpha", "beta", "gamma"],
        }
    }

    /// Build a family from parameter values given in `param_names` order.
    pub fn with_params<T: Clone>(self, values: &[T]) -> Family<T> {
        let v = |i: usize| values[i].clone();
        match self {
            FamilyKind::QKrawtchouk => Family::QKrawtchouk { p: v(0) },
            FamilyKind::AffineQKrawtchouk => Family::AffineQKrawtchouk { p: v(0) },
            FamilyKind::QuantumQKrawtchouk => Family::QuantumQKrawtchouk { p: v(0) },
            FamilyKind::DualQKrawtchouk => Family::DualQKrawtchouk { c: v(0) },
            FamilyKind::QHahn => Family::QHahn { alpha: v(0), beta: v(1) },
            FamilyKind::DualQHahn => Family::DualQHahn { gamma: v(0), delta: v(1) },
            FamilyKind::QRacah => Family::QRacah { alpha: v(0), beta: v(1), gamma: v(2) },
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family<T> {
    QKrawtchouk { p: T },
    AffineQKrawtchouk { p: T },
    QuantumQKrawtchouk { p: T },
    DualQKrawtchouk { c: T },
    QHahn { alpha: T, beta: T },
    DualQHahn { gamma: T, delta: T },
    QRacah { alpha: T, beta: T, gamma: T },
}

impl<T> Family<T> {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::QKrawtchouk { .. } => FamilyKind::QKrawtchouk,
            Family::AffineQKrawtchouk { .. } => FamilyKind::AffineQKrawtchouk,
            Family::QuantumQKrawtchouk { .. } => FamilyKind::QuantumQKrawtchouk,
            Family::DualQKrawtchouk { .. } => FamilyKind::DualQKrawtchouk,
            Family::QHahn { .. } => FamilyKind::QHahn,
            Family::DualQHahn { .. } => FamilyKind::DualQHahn,
            Family::QRacah { .. } => FamilyKind::QRacah,
        }
    }

    /// Parameter values in `FamilyKind::param_names` order.
    pub fn params(&self) -> Vec<&T> {
        match self {
            Family::QKrawtchouk { p } | Family::AffineQKrawtchouk { p } | Family::QuantumQKrawtchouk { p } => vec![p],
            Family::DualQKrawtchouk { c } => vec![c],
            Family::QHahn { alpha, beta } => vec![alpha, beta],
            Family::DualQHahn { gamma, delta } => vec![gamma, delta],
            Family::QRacah { alpha, beta, gamma } => vec![alpha, beta, gamma],
        }
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, mut f: F) -> Family<U> {
        let values: Vec<U> = self.params().into_iter().map(&mut f).collect();
        let kind = self.kind();
        let mut it = values.into_iter();
        match kind {
            FamilyKind::QKrawtchouk => Family::QKrawtchouk { p: it.next().unwrap() },
            FamilyKind::AffineQKrawtchouk => Family::AffineQKrawtchouk { p: it.next().unwrap() },
            FamilyKind::QuantumQKrawtchouk => Family::QuantumQKrawtchouk { p: it.next().unwrap() },
            FamilyKind::DualQKrawtchouk => Family::DualQKrawtchouk { c: it.next().unwrap() },
            FamilyKind::QHahn => Family::QHahn { alpha: it.next().unwrap(), beta: it.next().unwrap() },
            FamilyKind::DualQHahn => Family::DualQHahn { gamma: it.next().unwrap(), delta: it.next().unwrap() },
            FamilyKind::QRacah => Family::QRacah {
                alpha: it.next().unwrap(),
                beta: it.next().unwrap(),
                gamma: it.next().unwrap(),
            },
        }
    }
}

/// A polynomial family together with its size `N` and deformation `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub family: Family<Scalar>,
    pub n: usize,
    pub q: Scalar,
}

impl FamilySpec {
    pub fn new(family: Family<Scalar>, n: usize, q: Scalar) -> Self {
        FamilySpec { family, n, q }
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind()
    }

    /// The specification in exact arithmetic. Real values enter as their exact binary fractions.
    pub fn exact_model(&self) -> Option<Model<BigRational>> {
        let q = self.q.to_exact()?;
        let values = self.family.params().into_iter().map(Scalar::to_exact).collect::<Option<Vec<_>>>()?;
        Some(Model { family: self.kind().with_params(&values), n: self.n, q })
    }

    pub fn float_model(&self) -> Model<f64> {
        Model { family: self.family.map(Scalar::to_f64), n: self.n, q: self.q.to_f64() }
    }

    pub fn rational_q(&self) -> Option<RationalQ> {
        RationalQ::from_ratio(self.q.exact()?.clone()).ok()
    }

    pub fn param(&self, name: &str) -> Option<&Scalar> {
        let names = self.kind().param_names();
        let i = names.iter().position(|n| *n == name)?;
        self.family.params().get(i).copied()
    }

    /// Copy of this spec with one parameter replaced.
    pub fn with_param(&self, name: &str, value: Scalar) -> Result<FamilySpec, FamilyError> {
        let kind = self.kind();
        let i = kind
            .param_names()
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| FamilyError::UnknownParameter { family: kind.name(), name: name.to_string() })?;
        let mut values: Vec<Scalar> = self.family.params().into_iter().cloned().collect();
        values[i] = value;
        Ok(FamilySpec { family: kind.with_params(&values), n: self.n, q: self.q.clone() })
    }

    /// The q-Krawtchouk perfect-transfer case `p = q^{-N}`.
    pub fn is_pst(&self) -> bool {
        match self.exact_model() {
            Some(m) => m.is_pst(),
            None => self.float_model().is_pst(),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(N={}, q={}", self.kind(), self.n, self.q)?;
        for (name, value) in self.kind().param_names().iter().zip(self.family.params()) {
            write!(f, ", {name}={value}")?;
        }
        write!(f, ")")
    }
}

macro_rules! with_model {
    ($spec:expr, |$m:ident| $body:expr) => {
        match $spec.exact_model() {
            Some($m) => $body,
            None => {
                let $m = $spec.float_model();
                $body
            }
        }
    };
}

/// Outcome of `validate`: the list of violated constraints, empty when valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<(), FamilyError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(FamilyError::Invalid(self.violations))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid: all weights and norms positive")
        } else {
            write!(f, "invalid: {}", self.violations.join("; "))
        }
    }
}

pub fn validate(spec: &FamilySpec) -> ValidationReport {
    let mut violations = Vec::new();
    let q = spec.q.to_f64();
    if !(q.is_finite() && q > 0.0) || spec.q.exact().is_some_and(|r| r.is_one()) || q == 1.0 {
        violations.push(format!("q = {} must be positive and different from 1", spec.q));
        return ValidationReport { violations };
    }
    if spec.family.params().iter().any(|p| !p.to_f64().is_finite()) {
        violations.push("parameters must be finite".to_string());
        return ValidationReport { violations };
    }
    let n = spec.n as i32;
    let below = q < 1.0;
    let sign_of = |s: &Scalar| match s {
        Scalar::Exact(r) => r.signum(),
        Scalar::Real(v) => BigRational::from_float(v.signum()).unwrap_or_default(),
    };
    match &spec.family {
        Family::QKrawtchouk { p } => {
            if !sign_of(p).is_positive() {
                violations.push(format!("p = {p} must be positive"));
            }
        }
        Family::AffineQKrawtchouk { p } => {
            let bound = if below { 1.0 / q } else { q.powi(-n) };
            let pv = p.to_f64();
            if !(pv > 0.0 && pv < bound) || exact_at_or_above(spec, p, if below { -1 } else { -n }) {
                violations.push(format!("p = {p} must lie in (0, {bound})"));
            }
        }
        Family::QuantumQKrawtchouk { p } => {
            let bound = if below { q.powi(-n) } else { 1.0 / q };
            if !(p.to_f64() > bound) || exact_at_or_below(spec, p, if below { -n } else { -1 }) {
                violations.push(format!("p = {p} must exceed {bound}"));
            }
        }
        Family::DualQKrawtchouk { c } => {
            if !sign_of(c).is_negative() {
                violations.push(format!("c = {c} must be negative"));
            }
        }
        Family::QRacah { alpha, beta, .. } => {
            if !below {
                violations.push(format!("q = {} must lie in (0, 1)", spec.q));
            }
            check_resonance(spec, alpha, beta, &mut violations);
        }
        Family::QHahn { alpha, beta } => check_resonance(spec, alpha, beta, &mut violations),
        Family::DualQHahn { .. } => {}
    }
    if violations.is_empty() {
        with_model!(spec, |m| positivity_sweep(&m, &mut violations));
    }
    ValidationReport { violations }
}

/// `alpha beta q^j = 1` for some `1 <= j <= 2N + 2` makes a recurrence denominator vanish.
fn check_resonance(spec: &FamilySpec, alpha: &Scalar, beta: &Scalar, violations: &mut Vec<String>) {
    let (Some(q), Some(a), Some(b)) = (spec.q.to_exact(), alpha.to_exact(), beta.to_exact()) else {
        return;
    };
    let ab = a * b;
    if let Some(j) = (1..=2 * spec.n as i32 + 2).find(|&j| (&ab * num_traits::Pow::pow(&q, j)).is_one()) {
        violations.push(format!("alpha*beta = q^-{j} is a degenerate value"));
    }
}

fn exact_at_or_above(spec: &FamilySpec, p: &Scalar, exp: i32) -> bool {
    match (spec.q.exact(), p.exact()) {
        (Some(q), Some(p)) => *p >= num_traits::Pow::pow(q, exp),
        _ => false,
    }
}

fn exact_at_or_below(spec: &FamilySpec, p: &Scalar, exp: i32) -> bool {
    match (spec.q.exact(), p.exact()) {
        (Some(q), Some(p)) => *p <= num_traits::Pow::pow(q, exp),
        _ => false,
    }
}

fn positivity_sweep<T: Field>(m: &Model<T>, violations: &mut Vec<String>) {
    let data = normalized_data(m);
    for (x, w) in data.weights.iter().enumerate() {
        if w.sign() <= 0 || !w.log_abs().is_finite() {
            violations.push(format!("weight w({x}) is not positive"));
        }
    }
    for (n, d) in data.norms.iter().enumerate() {
        if d.sign() <= 0 || !d.log_abs().is_finite() {
            violations.push(format!("norm d_{n} is not positive"));
        }
    }
    for n in 0..m.n {
        let (a, _) = m.recurrence_ac(n);
        if a.is_exact_zero() || a.as_f64().abs() < 1e-300 {
            violations.push(format!("coupling J_{n} vanishes"));
        }
    }
}

/// Weights `w(0..N)` and norms `d_0..d_N`, jointly rescaled so that `w(0) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalityData {
    pub weights: Vec<LogSign>,
    pub norms: Vec<LogSign>,
}

fn normalized_data<T: Field>(m: &Model<T>) -> OrthogonalityData {
    let mut weights: Vec<LogSign> = (0..=m.n).map(|x| m.weight(x)).collect();
    let mut norms: Vec<LogSign> = (0..=m.n).map(|k| m.norm(k)).collect();
    let w0 = weights[0];
    if !w0.is_zero() {
        weights.iter_mut().for_each(|w| *w = *w / w0);
        norms.iter_mut().for_each(|d| *d = *d / w0);
    }
    OrthogonalityData { weights, norms }
}

pub fn orthogonality_data(spec: &FamilySpec) -> OrthogonalityData {
    with_model!(spec, |m| normalized_data(&m))
}

fn check_index(spec: &FamilySpec, index: usize) -> Result<(), FamilyError> {
    if index > spec.n {
        Err(FamilyError::IndexOutOfRange { index, n: spec.n })
    } else {
        Ok(())
    }
}

/// Polynomial of degree `n` at grid point `x`.
pub fn evaluate(spec: &FamilySpec, n: usize, x: usize) -> Result<f64, FamilyError> {
    check_index(spec, n)?;
    check_index(spec, x)?;
    Ok(with_model!(spec, |m| m.poly(n, x))?.to_f64())
}

/// Row signs that make every coupling positive.
fn row_signs<T: Field>(m: &Model<T>) -> Vec<f64> {
    let mut signs = vec![1.0; m.n + 1];
    let one_minus_q = T::one() - m.q.clone();
    for n in 0..m.n {
        let (a, _) = m.recurrence_ac(n);
        let natural = -(a / one_minus_q.clone());
        signs[n + 1] = if natural.is_pos() { signs[n] } else { -signs[n] };
    }
    signs
}

/// Signs `σ_n` carried by the orthonormal functions so that `J_n > 0`.
pub fn row_sign_vector(spec: &FamilySpec) -> Vec<f64> {
    with_model!(spec, |m| row_signs(&m))
}

fn orthonormal_matrix_model<T: Field>(m: &Model<T>) -> Result<DMatrix<f64>, FamilyError> {
    let data = normalized_data(m);
    let signs = row_signs(m);
    let size = m.n + 1;
    let mut u = DMatrix::zeros(size, size);
    for n in 0..size {
        for x in 0..size {
            let scale = (data.weights[x] / data.norms[n]).sqrt()?;
            let value = scale * m.poly(n, x)?;
            u[(n, x)] = signs[n] * value.to_f64();
        }
    }
    Ok(u)
}

/// Matrix `U` with `U[(n, x)] = σ_n sqrt(w(x)/d_n) P_n(x)`; rows are sites, columns eigen labels.
pub fn orthonormal_matrix(spec: &FamilySpec) -> Result<DMatrix<f64>, FamilyError> {
    with_model!(spec, |m| orthonormal_matrix_model(&m))
}

pub fn orthonormal_value(spec: &FamilySpec, n: usize, x: usize) -> Result<f64, FamilyError> {
    check_index(spec, n)?;
    check_index(spec, x)?;
    with_model!(spec, |m| {
        let data = normalized_data(&m);
        let scale = (data.weights[x] / data.norms[n]).sqrt()?;
        let sign = row_signs(&m)[n];
        Ok(sign * (scale * m.poly(n, x)?).to_f64())
    })
}

/// Selected rows of `U`, each over all eigen labels.
pub fn orthonormal_rows(spec: &FamilySpec, rows: &[usize]) -> Result<Vec<Vec<f64>>, FamilyError> {
    for &n in rows {
        check_index(spec, n)?;
    }
    with_model!(spec, |m| {
        let data = normalized_data(&m);
        let signs = row_signs(&m);
        rows.iter()
            .map(|&n| {
                (0..=m.n)
                    .map(|x| Ok(signs[n] * ((data.weights[x] / data.norms[n]).sqrt()? * m.poly(n, x)?).to_f64()))
                    .collect()
            })
            .collect()
    })
}

fn general_chain<T: Field>(m: &Model<T>) -> (Vec<f64>, Vec<f64>) {
    let data = normalized_data(m);
    let one_minus_q = T::one() - m.q.clone();
    let j = (0..m.n)
        .map(|n| {
            let (a, _) = m.recurrence_ac(n);
            let ratio = (data.norms[n + 1] / data.norms[n]).abs();
            ((a / one_minus_q.clone()).to_log_sign().abs() * ratio.sqrt().unwrap_or(LogSign::ZERO)).to_f64()
        })
        .collect();
    let h = (0..=m.n)
        .map(|n| {
            let (a, c) = m.recurrence_ac(n);
            (-((a + c) / one_minus_q.clone())).as_f64()
        })
        .collect();
    (j, h)
}

/// Chain data from the general recurrence coefficients, bypassing the closed perfect-transfer forms.
pub fn recurrence_coefficients_general(spec: &FamilySpec) -> SpinChain {
    let (j, h) = with_model!(spec, |m| general_chain(&m));
    SpinChain { j, h, source: Some(spec.clone()) }
}

/// Spin-chain couplings `J_n > 0` and fields `h_n`.
pub fn recurrence_coefficients(spec: &FamilySpec) -> SpinChain {
    if spec.is_pst() {
        let (j, h) = spec.float_model().pst_chain_data();
        return SpinChain { j, h, source: Some(spec.clone()) };
    }
    recurrence_coefficients_general(spec)
}

pub fn eigenvalue(spec: &FamilySpec, k: usize) -> Result<Scalar, FamilyError> {
    check_index(spec, k)?;
    Ok(match spec.exact_model() {
        Some(m) => Scalar::Exact(m.eigenvalue(k)),
        None => Scalar::Real(spec.float_model().eigenvalue(k)),
    })
}

pub fn eigenvalues(spec: &FamilySpec) -> Vec<Scalar> {
    (0..=spec.n).map(|k| eigenvalue(spec, k).expect("index in range")).collect()
}

/// The perfect-transfer q-Krawtchouk specification `p = q^{-N}`.
pub fn pst_spec(q: &RationalQ, n: usize) -> Result<FamilySpec, FamilyError> {
    if q.parity_class() != ParityClass::OddOdd {
        let (p, qq) = q.inverse_parts();
        return Err(FamilyError::NotOddOdd(format!("{p}/{qq}")));
    }
    let p = num_traits::Pow::pow(q.value(), -(n as i32));
    Ok(FamilySpec::new(Family::QKrawtchouk { p: Scalar::Exact(p) }, n, Scalar::Exact(q.value().clone())))
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::Exact(<BigRational as Zero>::zero())
    }
}

#[cfg(test)]
mod tests;
