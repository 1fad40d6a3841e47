use crate::qseries::{
    basic_hypergeometric_log, q_pochhammer_log, q_pochhammer_multi_log, vwp_pair_reduce, Field,
    LogSign, SeriesError,
};

use super::Family;

/// A family specification resolved to one scalar type.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    pub family: Family<T>,
    pub n: usize,
    pub q: T,
}

impl<T: Field> Model<T> {
    fn qp(&self, e: i64) -> T {
        self.q.powi(e)
    }

    fn one() -> T {
        T::one()
    }

    fn poch(&self, a: T, n: usize) -> LogSign {
        q_pochhammer_log(&a, &self.q, n)
    }

    fn pochs(&self, params: &[T], n: usize) -> LogSign {
        q_pochhammer_multi_log(params, &self.q, n)
    }

    fn pair(&self, a: T, n: usize) -> LogSign {
        vwp_pair_reduce(&a, &self.q, n).map(|v| v.to_log_sign()).unwrap_or(LogSign::ZERO)
    }

    fn ls(v: T) -> LogSign {
        v.to_log_sign()
    }

    /// `δ` of the q-Racah family, or the internal `β` of the dual q-Hahn family.
    pub fn derived(&self) -> Option<T> {
        let nn = self.n as i64;
        match &self.family {
            Family::QRacah { beta, .. } => Some(Self::one() / beta.clone() * self.qp(-nn - 1)),
            Family::DualQHahn { delta, .. } => Some(Self::one() / delta.clone() * self.qp(-nn - 1)),
            _ => None,
        }
    }

    /// Polynomial of degree `n` at grid point `x`.
    pub fn poly(&self, n: usize, x: usize) -> Result<LogSign, SeriesError> {
        let q = &self.q;
        let nn = self.n as i64;
        let (n, x) = (n as i64, x as i64);
        let qn = self.qp(-n);
        let qx = self.qp(-x);
        let qnn = self.qp(-nn);
        let zero = T::zero();
        let (numer, denom, z): (Vec<T>, Vec<T>, T) = match &self.family {
            Family::QKrawtchouk { p } => (
                vec![qn, qx, -(p.clone() * self.qp(n))],
                vec![qnn, zero],
                q.clone(),
            ),
            Family::AffineQKrawtchouk { p } => {
                (vec![qn, qx, zero], vec![p.clone() * q.clone(), qnn], q.clone())
            }
            Family::QuantumQKrawtchouk { p } => {
                (vec![qn, qx], vec![qnn], p.clone() * self.qp(n + 1))
            }
            Family::DualQKrawtchouk { c } => (
                vec![qn, qx, c.clone() * self.qp(x - nn)],
                vec![qnn, zero],
                q.clone(),
            ),
            Family::QHahn { alpha, beta } => (
                vec![qn, alpha.clone() * beta.clone() * self.qp(n + 1), qx],
                vec![alpha.clone() * q.clone(), qnn],
                q.clone(),
            ),
            Family::DualQHahn { gamma, delta } => (
                vec![qn, qx, gamma.clone() * delta.clone() * self.qp(x + 1)],
                vec![gamma.clone() * q.clone(), qnn],
                q.clone(),
            ),
            Family::QRacah { alpha, beta, gamma } => {
                let delta = self.derived().unwrap_or_else(T::zero);
                (
                    vec![
                        qn,
                        alpha.clone() * beta.clone() * self.qp(n + 1),
                        qx,
                        gamma.clone() * delta.clone() * self.qp(x + 1),
                    ],
                    vec![
                        alpha.clone() * q.clone(),
                        beta.clone() * delta * q.clone(),
                        gamma.clone() * q.clone(),
                    ],
                    q.clone(),
                )
            }
        };
        basic_hypergeometric_log(&numer, &denom, q, &z)
    }

    /// Weight `w(x)` exactly as the defining formula gives it, before sign normalisation.
    pub fn raw_weight(&self, x: usize) -> LogSign {
        let q = self.q.clone();
        let nn = self.n;
        let ni = nn as i64;
        let xi = x as i64;
        let qnn = self.qp(-ni);
        match &self.family {
            Family::QKrawtchouk { p } => {
                self.poch(qnn, x) / self.poch(q, x) * Self::ls(-p.clone()).powi(-xi)
            }
            Family::AffineQKrawtchouk { p } => {
                let pq = p.clone() * q.clone();
                self.poch(pq.clone(), x) * self.poch(q.clone(), nn)
                    / (self.poch(q.clone(), x) * self.poch(q, nn - x))
                    * Self::ls(pq).powi(-xi)
            }
            Family::QuantumQKrawtchouk { p } => {
                let pq = p.clone() * q.clone();
                let sign = if xi % 2 == 0 { 1.0 } else { -1.0 };
                self.poch(pq, nn - x) / (self.poch(q.clone(), x) * self.poch(q, nn - x))
                    * LogSign::from_f64(sign)
                    * Self::ls(self.qp(xi * (xi - 1) / 2))
            }
            Family::DualQKrawtchouk { c } => {
                let cqn = c.clone() * qnn.clone();
                self.pochs(&[cqn.clone(), qnn], x) / self.pochs(&[q.clone(), c.clone() * q], x)
                    * self.pair(cqn, x)
                    * Self::ls(c.clone()).powi(-xi)
                    * Self::ls(self.qp(xi * (2 * ni - xi)))
            }
            Family::QHahn { alpha, beta } => {
                let ab = alpha.clone() * beta.clone();
                self.pochs(&[alpha.clone() * q.clone(), qnn.clone()], x)
                    / self.pochs(&[q.clone(), qnn / beta.clone()], x)
                    * Self::ls(ab * q).powi(-xi)
            }
            Family::DualQHahn { gamma, delta } => {
                let gd = gamma.clone() * delta.clone();
                self.pochs(&[qnn, gamma.clone() * q.clone(), gd.clone() * q.clone()], x)
                    / self.pochs(
                        &[q.clone(), gd.clone() * self.qp(ni + 2), delta.clone() * q.clone()],
                        x,
                    )
                    * self.pair(gd * q, x)
                    * Self::ls(-gamma.clone()).powi(-xi)
                    * Self::ls(self.qp(ni * xi - xi * (xi + 1) / 2))
            }
            Family::QRacah { alpha, beta, gamma } => {
                let delta = self.derived().unwrap_or_else(T::zero);
                let gd = gamma.clone() * delta.clone();
                let numer = [
                    alpha.clone() * q.clone(),
                    beta.clone() * delta.clone() * q.clone(),
                    gamma.clone() * q.clone(),
                    gd.clone() * q.clone(),
                ];
                let denom = [
                    q.clone(),
                    gd.clone() * q.clone() / alpha.clone(),
                    gamma.clone() * q.clone() / beta.clone(),
                    delta * q.clone(),
                ];
                self.pochs(&numer, x) / self.pochs(&denom, x)
                    * self.pair(gd * q.clone(), x)
                    * Self::ls(alpha.clone() * beta.clone() * q).powi(-xi)
            }
        }
    }

    /// Norm `d_n` exactly as the defining formula gives it, before sign normalisation.
    pub fn raw_norm(&self, n: usize) -> LogSign {
        let q = self.q.clone();
        let nn = self.n;
        let ni = nn as i64;
        let k = n as i64;
        let qnn = self.qp(-ni);
        match &self.family {
            Family::QKrawtchouk { p } => {
                let mp = -p.clone();
                self.pochs(&[q.clone(), mp.clone() * self.qp(ni + 1)], n)
                    / self.pochs(&[mp.clone(), qnn.clone()], n)
                    * Self::ls(Self::one() + p.clone())
                    / Self::ls(Self::one() + p.clone() * self.qp(2 * k))
                    * self.poch(mp.clone() * q, nn)
                    * Self::ls(p.clone()).powi(-ni)
                    * Self::ls(self.qp(-(ni * (ni + 1) / 2)))
                    * Self::ls(mp * qnn).powi(k)
                    * Self::ls(self.qp(k * k))
            }
            Family::AffineQKrawtchouk { p } => {
                let pq = p.clone() * q.clone();
                self.poch(q.clone(), n) * self.poch(q.clone(), nn - n)
                    / (self.poch(pq.clone(), n) * self.poch(q, nn))
                    * Self::ls(pq).powi(k - ni)
            }
            Family::QuantumQKrawtchouk { p } => {
                let sign = if (ni - k) % 2 == 0 { 1.0 } else { -1.0 };
                self.poch(q.clone(), nn - n)
                    * self.poch(q.clone(), n)
                    * self.poch(p.clone() * q.clone(), n)
                    / self.poch(q, nn).powi(2)
                    * LogSign::from_f64(sign)
                    * Self::ls(p.clone()).powi(ni)
                    * Self::ls(self.qp(ni * k + ni * (ni + 1) / 2 - k * (k + 1) / 2))
            }
            Family::DualQKrawtchouk { c } => {
                self.poch(q.clone(), n) * self.poch(Self::one() / c.clone(), nn)
                    / self.poch(qnn.clone(), n)
                    * Self::ls(c.clone() * qnn).powi(k)
            }
            Family::QHahn { alpha, beta } => {
                let ab = alpha.clone() * beta.clone();
                self.poch(ab.clone() * self.qp(2), nn)
                    / (self.poch(beta.clone() * q.clone(), nn)
                        * Self::ls(alpha.clone() * q.clone()).powi(ni))
                    * self.pochs(&[q.clone(), ab.clone() * self.qp(ni + 2), beta.clone() * q.clone()], n)
                    / self.pochs(&[alpha.clone() * q.clone(), ab.clone() * q.clone(), qnn], n)
                    / self.pair(ab * q, n)
                    * Self::ls(-alpha.clone()).powi(k)
                    * Self::ls(self.qp(k * (k + 1) / 2 - ni * k))
            }
            Family::DualQHahn { gamma, .. } => {
                let beta = self.derived().unwrap_or_else(T::zero);
                self.poch(beta.clone() / gamma.clone(), nn) / self.poch(beta.clone() * q.clone(), nn)
                    * self.pochs(&[q.clone(), beta.clone() * q.clone()], n)
                    / self.pochs(&[qnn.clone(), gamma.clone() * q], n)
                    * Self::ls(gamma.clone() * qnn / beta).powi(k)
            }
            Family::QRacah { alpha, beta, gamma } => {
                let ab = alpha.clone() * beta.clone();
                let abq_g = ab.clone() * q.clone() / gamma.clone();
                self.pochs(&[ab.clone() * self.qp(2), beta.clone() / gamma.clone()], nn)
                    / self.pochs(&[abq_g.clone(), beta.clone() * q.clone()], nn)
                    * self.pochs(
                        &[q.clone(), abq_g, ab.clone() * self.qp(ni + 2), beta.clone() * q.clone()],
                        n,
                    )
                    / self.pochs(
                        &[qnn.clone(), alpha.clone() * q.clone(), ab.clone() * q.clone(), gamma.clone() * q.clone()],
                        n,
                    )
                    / self.pair(ab * q, n)
                    * Self::ls(gamma.clone() * qnn / beta.clone()).powi(k)
            }
        }
    }

    /// Simplified weight at `p = q^{-N}`.
    pub fn pst_weight(&self, x: usize) -> LogSign {
        let q = self.q.clone();
        let nn = self.n;
        let xi = x as i64;
        self.poch(q.clone(), nn) / (self.poch(q.clone(), x) * self.poch(q, nn - x))
            * Self::ls(self.qp(xi * (xi - 1) / 2))
    }

    /// Simplified norm at `p = q^{-N}`.
    pub fn pst_norm(&self, n: usize) -> LogSign {
        let q = self.q.clone();
        let nn = self.n;
        let k = n as i64;
        let mq = -q.clone();
        LogSign::from_f64(2.0) * self.pochs(&[q.clone(), mq.clone()], n) * self.pochs(&[q.clone(), mq], nn - n)
            / (self.poch(q, nn) * Self::ls(self.qp(k) + self.qp(nn as i64 - k)))
    }

    /// Weight used downstream: the simplified form in the perfect-transfer case.
    pub fn weight(&self, x: usize) -> LogSign {
        if self.is_pst() {
            self.pst_weight(x)
        } else {
            self.raw_weight(x)
        }
    }

    pub fn norm(&self, n: usize) -> LogSign {
        if self.is_pst() {
            self.pst_norm(n)
        } else {
            self.raw_norm(n)
        }
    }

    /// Coefficients `(A_n, C_n)` of the three-term recurrence
    /// `-(1 - q^{-x}) g(x) P_n = A_n P_{n+1} - (A_n + C_n) P_n + C_n P_{n-1}`.
    pub fn recurrence_ac(&self, n: usize) -> (T, T) {
        let one = Self::one();
        let ni = self.n as i64;
        let k = n as i64;
        let q = self.q.clone();
        let qp = |e: i64| self.qp(e);
        let a_n = match &self.family {
            Family::QKrawtchouk { p } => {
                (one.clone() - qp(k - ni)) * (one.clone() + p.clone() * qp(k))
                    / ((one.clone() + p.clone() * qp(2 * k)) * (one.clone() + p.clone() * qp(2 * k + 1)))
            }
            Family::AffineQKrawtchouk { p } => {
                (one.clone() - qp(k - ni)) * (one.clone() - p.clone() * qp(k + 1))
            }
            Family::QuantumQKrawtchouk { p } => (one.clone() - qp(k - ni)) / (p.clone() * qp(2 * k + 1)),
            Family::DualQKrawtchouk { .. } => one.clone() - qp(k - ni),
            Family::QHahn { alpha, beta } => {
                let ab = alpha.clone() * beta.clone();
                (one.clone() - qp(k - ni))
                    * (one.clone() - alpha.clone() * qp(k + 1))
                    * (one.clone() - ab.clone() * qp(k + 1))
                    / ((one.clone() - ab.clone() * qp(2 * k + 1)) * (one.clone() - ab * qp(2 * k + 2)))
            }
            Family::DualQHahn { gamma, .. } => {
                (one.clone() - qp(k - ni)) * (one.clone() - gamma.clone() * qp(k + 1))
            }
            Family::QRacah { alpha, beta, gamma } => {
                let ab = alpha.clone() * beta.clone();
                (one.clone() - alpha.clone() * qp(k + 1))
                    * (one.clone() - ab.clone() * qp(k + 1))
                    * (one.clone() - qp(k - ni))
                    * (one.clone() - gamma.clone() * qp(k + 1))
                    / ((one.clone() - ab.clone() * qp(2 * k + 1)) * (one.clone() - ab * qp(2 * k + 2)))
            }
        };
        if n == 0 {
            return (a_n, T::zero());
        }
        let c_n = match &self.family {
            Family::QKrawtchouk { p } => {
                -(p.clone() * qp(2 * k - ni - 1))
                    * (one.clone() + p.clone() * qp(k + ni))
                    * (one.clone() - qp(k))
                    / ((one.clone() + p.clone() * qp(2 * k - 1)) * (one.clone() + p.clone() * qp(2 * k)))
            }
            Family::AffineQKrawtchouk { p } => -(p.clone() * qp(k - ni)) * (one.clone() - qp(k)),
            Family::QuantumQKrawtchouk { p } => {
                (one.clone() - qp(k)) * (one.clone() - p.clone() * qp(k)) / (p.clone() * qp(2 * k))
            }
            Family::DualQKrawtchouk { c } => c.clone() * qp(-ni) * (one.clone() - qp(k)),
            Family::QHahn { alpha, beta } => {
                let ab = alpha.clone() * beta.clone();
                -(alpha.clone() * qp(k - ni))
                    * (one.clone() - qp(k))
                    * (one.clone() - ab.clone() * qp(k + ni + 1))
                    * (one.clone() - beta.clone() * qp(k))
                    / ((one.clone() - ab.clone() * qp(2 * k)) * (one.clone() - ab * qp(2 * k + 1)))
            }
            Family::DualQHahn { gamma, delta } => {
                gamma.clone() * q.clone() * (one.clone() - qp(k)) * (delta.clone() - qp(k - ni - 1))
            }
            Family::QRacah { alpha, beta, gamma } => {
                let delta = self.derived().unwrap_or_else(T::zero);
                let ab = alpha.clone() * beta.clone();
                q.clone()
                    * (one.clone() - qp(k))
                    * (one.clone() - beta.clone() * qp(k))
                    * (gamma.clone() - ab.clone() * qp(k))
                    * (delta - alpha.clone() * qp(k))
                    / ((one.clone() - ab.clone() * qp(2 * k)) * (one.clone() - ab * qp(2 * k + 1)))
            }
        };
        (a_n, c_n)
    }

    /// Spectral factor `g(k)` in `ε_k = -[-k] g(k)`.
    pub fn spectral_factor(&self, k: usize) -> T {
        let one = Self::one();
        let ni = self.n as i64;
        let k = k as i64;
        match &self.family {
            Family::DualQKrawtchouk { c } => one - c.clone() * self.qp(k - ni),
            Family::DualQHahn { gamma, delta } => one - gamma.clone() * delta.clone() * self.qp(k + 1),
            Family::QRacah { gamma, .. } => {
                let delta = self.derived().unwrap_or_else(T::zero);
                one - gamma.clone() * delta * self.qp(k + 1)
            }
            _ => one,
        }
    }

    pub fn eigenvalue(&self, k: usize) -> T {
        let bracket = crate::qseries::q_number(-(k as i64), &self.q);
        -bracket * self.spectral_factor(k)
    }

    /// True for the q-Krawtchouk family at `p = q^{-N}`.
    pub fn is_pst(&self) -> bool {
        match &self.family {
            Family::QKrawtchouk { p } => {
                let target = self.qp(-(self.n as i64));
                (p.clone() / target).is_unit()
            }
            _ => false,
        }
    }

    /// Couplings and fields of the perfect-transfer chain in closed form.
    pub fn pst_chain_data(&self) -> (Vec<f64>, Vec<f64>) {
        let q = self.q.as_f64();
        let ni = self.n as i32;
        let qn = |k: i32| q.powi(k);
        let br = |k: i32| (1.0 - q.powi(k)) / (1.0 - q);
        let j = (0..ni)
            .map(|n| {
                (br(n + 1) * br(ni - n)).sqrt() * q / (qn(ni - n) + qn(n + 1))
                    * ((1.0 + qn(ni - n)) * (1.0 + qn(n + 1))
                        / ((qn(ni - n) + qn(n + 2)) * (qn(ni - n + 1) + qn(n + 1))))
                    .sqrt()
            })
            .collect();
        let h = (0..=ni)
            .map(|n| {
                br(n) * (1.0 + qn(n)) / ((qn(ni - n) + qn(n)) * (qn(ni - n + 1) + qn(n)))
                    + br(ni - n) * (1.0 + qn(ni - n)) / ((qn(ni - n) + qn(n)) * (qn(ni - n) + qn(n + 1)))
            })
            .collect();
        (j, h)
    }
}
