//! Tridiagonal single-excitation Hamiltonians and their spectral decompositions.

use nalgebra::DMatrix;
use num_rational::BigRational;
use thiserror::Error;

use crate::families::{self, FamilyError, FamilySpec, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("chain needs {expected} fields for {couplings} couplings, got {got}")]
    LengthMismatch { couplings: usize, expected: usize, got: usize },
    #[error("coupling J_{index} = {value} is not positive")]
    NonPositiveCoupling { index: usize, value: f64 },
    #[error("matrix is not symmetric tridiagonal")]
    NotTridiagonal,
    #[error("tridiagonal eigensolver did not converge within {0} iterations")]
    NoConvergence(usize),
}

/// Couplings `J_0..J_{N-1}` and fields `h_0..h_N` of an `N+1` site chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinChain {
    pub j: Vec<f64>,
    pub h: Vec<f64>,
    pub source: Option<FamilySpec>,
}

impl SpinChain {
    pub fn new(j: Vec<f64>, h: Vec<f64>) -> Result<Self, ChainError> {
        if h.len() != j.len() + 1 {
            return Err(ChainError::LengthMismatch { couplings: j.len(), expected: j.len() + 1, got: h.len() });
        }
        if let Some((index, &value)) = j.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(ChainError::NonPositiveCoupling { index, value });
        }
        Ok(SpinChain { j, h, source: None })
    }

    pub fn sites(&self) -> usize {
        self.h.len()
    }

    /// Largest mirror defect `max(|h_n - h_{N-n}|, |J_n - J_{N-1-n}|)`.
    pub fn mirror_defect(&self) -> f64 {
        let h = self.h.iter().zip(self.h.iter().rev()).map(|(a, b)| (a - b).abs());
        let j = self.j.iter().zip(self.j.iter().rev()).map(|(a, b)| (a - b).abs());
        h.chain(j).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OffDiagSign {
    PositiveOffDiag,
    #[default]
    NegativeOffDiag,
}

pub fn assemble_matrix(chain: &SpinChain, sign: OffDiagSign) -> DMatrix<f64> {
    let n = chain.sites();
    let s = match sign {
        OffDiagSign::PositiveOffDiag => 1.0,
        OffDiagSign::NegativeOffDiag => -1.0,
    };
    let mut m = DMatrix::zeros(n, n);
    for (i, &h) in chain.h.iter().enumerate() {
        m[(i, i)] = h;
    }
    for (i, &j) in chain.j.iter().enumerate() {
        m[(i, i + 1)] = s * j;
        m[(i + 1, i)] = s * j;
    }
    m
}

/// Eigenvalues and eigenvectors; column `k` of `u` belongs to `eigenvalues[k]`, row `n` is site `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub exact: Option<Vec<BigRational>>,
    pub u: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// Same decomposition for the chain assembled with the opposite off-diagonal sign.
    pub fn flip_convention(&self) -> SpectralDecomposition {
        let mut u = self.u.clone();
        for (n, mut row) in u.row_iter_mut().enumerate() {
            if n % 2 == 1 {
                row.neg_mut();
            }
        }
        SpectralDecomposition { eigenvalues: self.eigenvalues.clone(), exact: self.exact.clone(), u }
    }
}

/// Decomposition from the polynomial data, in the grid order of the eigenvalue labels.
pub fn analytic_decomposition(spec: &FamilySpec) -> Result<SpectralDecomposition, ChainError> {
    families::validate(spec).into_result()?;
    let values = families::eigenvalues(spec);
    let eigenvalues = values.iter().map(Scalar::to_f64).collect();
    let exact = values.iter().map(|v| v.exact().cloned()).collect::<Option<Vec<_>>>();
    let u = families::orthonormal_matrix(spec)?;
    Ok(SpectralDecomposition { eigenvalues, exact, u })
}

const QL_TOL: f64 = 1e-14;

fn is_symmetric_tridiagonal(m: &DMatrix<f64>) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    (0..n).all(|i| {
        (0..n).all(|k| {
            let v = m[(i, k)];
            if i.abs_diff(k) > 1 {
                v == 0.0
            } else {
                v == m[(k, i)] && v.is_finite()
            }
        })
    })
}

/// Implicit-shift QL iteration on diagonal `d` and subdiagonal `e`, accumulating rotations into `z`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut DMatrix<f64>) -> Result<(), ChainError> {
    let n = d.len();
    let cap = 50 * n;
    let mut iterations = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= QL_TOL * scale || e[m] == 0.0 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > cap {
                return Err(ChainError::NoConvergence(cap));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let t = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * t;
                    z[(k, i)] = c * z[(k, i)] - s * t;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Independent eigensolver for a symmetric tridiagonal matrix.
///
/// Eigenvalues come out ascending; each eigenvector's first component above `1e-10` in
/// magnitude is positive.
pub fn numeric_decomposition(matrix: &DMatrix<f64>) -> Result<SpectralDecomposition, ChainError> {
    if !is_symmetric_tridiagonal(matrix) {
        return Err(ChainError::NotTridiagonal);
    }
    let n = matrix.nrows();
    let mut d: Vec<f64> = (0..n).map(|i| matrix[(i, i)]).collect();
    let mut e: Vec<f64> = (0..n).map(|i| if i + 1 < n { matrix[(i + 1, i)] } else { 0.0 }).collect();
    let mut z = DMatrix::identity(n, n);
    tridiagonal_ql(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues = order.iter().map(|&k| d[k]).collect();
    let mut u = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = z.column(k).into_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-10) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        u.set_column(col, &v);
    }
    Ok(SpectralDecomposition { eigenvalues, exact: None, u })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionResidual {
    /// `max(||U^T U - I||, ||U U^T - I||)`, entrywise maximum.
    pub orthogonality: f64,
    /// `||M - U diag(ε) U^T||`, entrywise maximum.
    pub reconstruction: f64,
    /// Largest gap between sorted eigenvalues and the numeric oracle.
    pub eigenvalue_gap: f64,
}

impl DecompositionResidual {
    pub fn max(&self) -> f64 {
        self.orthogonality.max(self.reconstruction).max(self.eigenvalue_gap)
    }
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn verify_decomposition(
    dec: &SpectralDecomposition,
    matrix: &DMatrix<f64>,
) -> Result<DecompositionResidual, ChainError> {
    let n = matrix.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let u = &dec.u;
    let orthogonality = max_abs(&(u.transpose() * u - &id)).max(max_abs(&(u * u.transpose() - &id)));
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(dec.eigenvalues.clone()));
    let reconstruction = max_abs(&(matrix - u * diag * u.transpose()));
    let oracle = numeric_decomposition(matrix)?;
    let mut sorted = dec.eigenvalues.clone();
    sorted.sort_by(f64::total_cmp);
    let eigenvalue_gap = sorted
        .iter()
        .zip(&oracle.eigenvalues)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    Ok(DecompositionResidual { orthogonality, reconstruction, eigenvalue_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::pst_spec;
    use crate::qseries::RationalQ;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn assembles_both_conventions() {
        let chain = SpinChain::new(vec![1.0 / 6.0], vec![1.0 / 6.0, 1.0 / 6.0]).unwrap();
        let neg = assemble_matrix(&chain, OffDiagSign::NegativeOffDiag);
        assert_eq!(neg[(0, 1)], -1.0 / 6.0);
        let pos = assemble_matrix(&chain, OffDiagSign::PositiveOffDiag);
        let a = numeric_decomposition(&neg).unwrap().eigenvalues;
        let b = numeric_decomposition(&pos).unwrap().eigenvalues;
        assert!(close(a[0], 0.0, 1e-15) && close(a[1], 1.0 / 3.0, 1e-15));
        assert_eq!(a, b);
        let single = SpinChain::new(vec![], vec![0.25]).unwrap();
        assert_eq!(assemble_matrix(&single, OffDiagSign::NegativeOffDiag)[(0, 0)], 0.25);
    }

    #[test]
    fn rejects_bad_chains() {
        assert!(SpinChain::new(vec![1.0], vec![0.0]).is_err());
        assert!(SpinChain::new(vec![0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn two_by_two_oracle() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, -1.0 / 6.0, -1.0 / 6.0, 1.0 / 3.0]);
        let dec = numeric_decomposition(&m).unwrap();
        assert!(close(dec.eigenvalues[0], 1.0 / 6.0, 1e-15));
        assert!(close(dec.eigenvalues[1], 0.5, 1e-15));
        let diag = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 5.0]);
        assert_eq!(numeric_decomposition(&diag).unwrap().eigenvalues, vec![-1.0, 2.0, 5.0]);
        let dense = DMatrix::from_element(3, 3, 1.0);
        assert_eq!(numeric_decomposition(&dense), Err(ChainError::NotTridiagonal));
    }

    #[test]
    fn agrees_with_nalgebra_symmetric_eigen() {
        let n = 9;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = (i as f64 * 0.7).sin();
            if i + 1 < n {
                m[(i, i + 1)] = -0.3 - 0.1 * i as f64;
                m[(i + 1, i)] = m[(i, i + 1)];
            }
        }
        let ours = numeric_decomposition(&m).unwrap();
        let mut theirs: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.eigenvalues.iter().zip(&theirs) {
            assert!(close(*a, *b, 1e-13));
        }
        let res = verify_decomposition(&ours, &m).unwrap();
        assert!(res.max() < 1e-13);
    }

    #[test]
    fn pst_chain_decomposes() {
        let spec = pst_spec(&RationalQ::new(3, 1).unwrap(), 1).unwrap();
        let dec = analytic_decomposition(&spec).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(dec.u[(0, 0)], r, 1e-15) && close(dec.u[(0, 1)], r, 1e-15));
        assert!(close(dec.u[(1, 0)], r, 1e-15) && close(dec.u[(1, 1)], -r, 1e-15));
        let spec = pst_spec(&RationalQ::new(3, 1).unwrap(), 2).unwrap();
        let dec = analytic_decomposition(&spec).unwrap();
        let m = assemble_matrix(&families::recurrence_coefficients(&spec), OffDiagSign::NegativeOffDiag);
        let res = verify_decomposition(&dec, &m).unwrap();
        assert!(res.max() < 1e-12, "{res:?}");
        let flipped = dec.flip_convention();
        let m_pos = assemble_matrix(&families::recurrence_coefficients(&spec), OffDiagSign::PositiveOffDiag);
        assert!(verify_decomposition(&flipped, &m_pos).unwrap().max() < 1e-12);
    }

    #[test]
    fn single_site_is_trivial() {
        let spec = pst_spec(&RationalQ::new(3, 1).unwrap(), 0).unwrap();
        let dec = analytic_decomposition(&spec).unwrap();
        assert_eq!(dec.eigenvalues, vec![0.0]);
        assert_eq!(dec.u[(0, 0)], 1.0);
        let m = assemble_matrix(&families::recurrence_coefficients(&spec), OffDiagSign::NegativeOffDiag);
        let res = verify_decomposition(&dec, &m).unwrap();
        assert_eq!(res.max(), 0.0);
    }

    #[test]
    fn corruption_is_detected() {
        let spec = pst_spec(&RationalQ::new(1, 3).unwrap(), 4).unwrap();
        let mut dec = analytic_decomposition(&spec).unwrap();
        dec.u[(2, 1)] += 1e-3;
        let m = assemble_matrix(&families::recurrence_coefficients(&spec), OffDiagSign::NegativeOffDiag);
        assert!(verify_decomposition(&dec, &m).unwrap().max() > 1e-4);
    }
}
