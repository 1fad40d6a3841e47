use super::*;
use crate::chain::{assemble_matrix, numeric_decomposition, OffDiagSign};

fn r(a: i64, b: i64) -> Scalar {
    Scalar::ratio(a, b)
}

fn spec(family: Family<Scalar>, n: usize, q: Scalar) -> FamilySpec {
    FamilySpec::new(family, n, q)
}

fn samples() -> Vec<FamilySpec> {
    vec![
        spec(Family::QKrawtchouk { p: r(2, 5) }, 5, r(1, 3)),
        spec(Family::QKrawtchouk { p: r(3, 1) }, 4, r(5, 2)),
        spec(Family::AffineQKrawtchouk { p: r(1, 2) }, 5, r(1, 2)),
        spec(Family::AffineQKrawtchouk { p: r(1, 50) }, 3, r(3, 1)),
        spec(Family::QuantumQKrawtchouk { p: r(10, 1) }, 3, r(1, 2)),
        spec(Family::QuantumQKrawtchouk { p: r(1, 2) }, 4, r(3, 1)),
        spec(Family::DualQKrawtchouk { c: r(-3, 2) }, 5, r(1, 3)),
        spec(Family::DualQKrawtchouk { c: r(-18, 1) }, 2, r(3, 1)),
        spec(Family::QHahn { alpha: r(1, 2), beta: r(1, 3) }, 5, r(1, 2)),
        spec(Family::DualQHahn { gamma: r(1, 2), delta: r(1, 3) }, 5, r(1, 2)),
        spec(Family::QRacah { alpha: r(1, 2), beta: r(1, 3), gamma: r(40, 1) }, 4, r(1, 2)),
    ]
}

#[test]
fn validation_examples() {
    let ok = spec(Family::QKrawtchouk { p: r(1, 9) }, 2, r(3, 1));
    assert!(validate(&ok).is_valid());
    let bad = spec(Family::AffineQKrawtchouk { p: r(3, 1) }, 2, r(1, 2));
    assert!(!validate(&bad).is_valid());
    let bad = spec(Family::DualQKrawtchouk { c: r(1, 1) }, 2, r(1, 2));
    assert!(!validate(&bad).is_valid());
    let bad = spec(Family::QRacah { alpha: r(1, 2), beta: r(1, 3), gamma: r(40, 1) }, 2, r(2, 1));
    assert!(!validate(&bad).is_valid());
    let bad = spec(Family::QuantumQKrawtchouk { p: r(4, 1) }, 2, r(1, 2));
    assert!(!validate(&bad).is_valid());
    for s in samples() {
        assert!(validate(&s).is_valid(), "{s}: {}", validate(&s));
    }
}

#[test]
fn evaluation_examples() {
    let s = spec(Family::QKrawtchouk { p: r(1, 3) }, 1, r(3, 1));
    assert_eq!(evaluate(&s, 1, 1).unwrap(), -1.0);
    for s in samples() {
        for x in 0..=s.n {
            assert!((evaluate(&s, 0, x).unwrap() - 1.0).abs() < 1e-15);
        }
        if s.kind() == FamilyKind::QKrawtchouk {
            for n in 0..=s.n {
                assert!((evaluate(&s, n, 0).unwrap() - 1.0).abs() < 1e-15);
            }
        }
    }
    assert!(evaluate(&samples()[0], 9, 0).is_err());
}

#[test]
fn orthogonality_relation_holds() {
    for s in samples() {
        let data = orthogonality_data(&s);
        assert!((data.weights[0].to_f64() - 1.0).abs() < 1e-14, "{s}");
        for m in 0..=s.n {
            for n in 0..=s.n {
                let sum: f64 = (0..=s.n)
                    .map(|x| data.weights[x].to_f64() * evaluate(&s, m, x).unwrap() * evaluate(&s, n, x).unwrap())
                    .sum();
                let target = if m == n { data.norms[n].to_f64() } else { 0.0 };
                let scale = (data.norms[m].to_f64() * data.norms[n].to_f64()).sqrt();
                assert!((sum - target).abs() < 1e-10 * scale, "{s} m={m} n={n}");
            }
        }
    }
}

#[test]
fn pst_orthogonality_examples() {
    let q = RationalQ::new(3, 1).unwrap();
    let s = pst_spec(&q, 1).unwrap();
    let data = orthogonality_data(&s);
    for v in data.weights {
        assert!((v.to_f64() - 1.0).abs() < 1e-15);
    }
    for v in data.norms {
        assert!((v.to_f64() - 2.0).abs() < 1e-15);
    }
    let s = pst_spec(&q, 2).unwrap();
    let data = orthogonality_data(&s);
    let sum: f64 = (0..=2)
        .map(|x| data.weights[x].to_f64() * evaluate(&s, 1, x).unwrap().powi(2))
        .sum();
    assert!((sum / data.norms[1].to_f64() - 1.0).abs() < 1e-12);
}

#[test]
fn simplified_pst_forms_match_general() {
    for (a, b) in [(3, 1), (1, 3), (3, 5), (5, 3), (7, 3)] {
        for n in 1..=8 {
            let q = RationalQ::new(a, b).unwrap();
            let s = pst_spec(&q, n).unwrap();
            let m = s.exact_model().unwrap();
            for k in 0..=n {
                let ratio_w = (m.pst_weight(k) / m.raw_weight(k)).to_f64();
                let ratio_d = (m.pst_norm(k) / m.raw_norm(k)).to_f64();
                assert!((ratio_w - 1.0).abs() < 1e-12, "w q={q} N={n} k={k}");
                assert!((ratio_d - 1.0).abs() < 1e-12, "d q={q} N={n} k={k}");
            }
            let closed = recurrence_coefficients(&s);
            let general = recurrence_coefficients_general(&s);
            for (x, y) in closed.j.iter().zip(&general.j).chain(closed.h.iter().zip(&general.h)) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1e-300), "q={q} N={n}");
            }
        }
    }
}

#[test]
fn pst_chain_examples() {
    let q = RationalQ::new(3, 1).unwrap();
    let c = recurrence_coefficients(&pst_spec(&q, 1).unwrap());
    assert!((c.j[0] - 1.0 / 6.0).abs() < 1e-15);
    assert!(c.h.iter().all(|h| (h - 1.0 / 6.0).abs() < 1e-15));
    let c = recurrence_coefficients(&pst_spec(&q, 2).unwrap());
    let j = 6f64.sqrt() / 18.0;
    assert!(c.j.iter().all(|v| (v - j).abs() < 1e-15));
    for (v, t) in c.h.iter().zip([1.0 / 3.0, 1.0 / 9.0, 1.0 / 3.0]) {
        assert!((v - t).abs() < 1e-15);
    }
    let c = recurrence_coefficients(&pst_spec(&q, 6).unwrap());
    assert!(c.mirror_defect() < 1e-12);
}

#[test]
fn mirror_symmetry_breaks_off_the_pst_point() {
    for s in samples() {
        if s.is_pst() {
            continue;
        }
        assert!(recurrence_coefficients(&s).mirror_defect() > 1e-6, "{s}");
    }
}

#[test]
fn eigenvalue_examples() {
    let q = RationalQ::new(3, 1).unwrap();
    let s = pst_spec(&q, 2).unwrap();
    assert_eq!(eigenvalue(&s, 2).unwrap(), r(4, 9));
    let s = spec(Family::DualQKrawtchouk { c: r(-18, 1) }, 2, r(3, 1));
    assert_eq!(eigenvalue(&s, 1).unwrap(), r(7, 3));
    for s in samples() {
        assert_eq!(eigenvalue(&s, 0).unwrap(), r(0, 1));
    }
}

#[test]
fn pst_spec_examples() {
    let s = pst_spec(&RationalQ::new(3, 1).unwrap(), 2).unwrap();
    assert_eq!(s.param("p"), Some(&r(1, 9)));
    let s = pst_spec(&RationalQ::new(3, 5).unwrap(), 1).unwrap();
    assert_eq!(s.param("p"), Some(&r(5, 3)));
    assert!(matches!(pst_spec(&RationalQ::new(2, 1).unwrap(), 3), Err(FamilyError::NotOddOdd(_))));
}

#[test]
fn spectra_and_recurrences_agree() {
    for s in samples() {
        let chain = recurrence_coefficients(&s);
        assert!(chain.j.iter().all(|j| *j > 0.0), "{s}");
        let m = assemble_matrix(&chain, OffDiagSign::NegativeOffDiag);
        let numeric = numeric_decomposition(&m).unwrap().eigenvalues;
        let mut analytic: Vec<f64> = eigenvalues(&s).iter().map(Scalar::to_f64).collect();
        analytic.sort_by(f64::total_cmp);
        for (a, b) in analytic.iter().zip(&numeric) {
            assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{s}: {analytic:?} vs {numeric:?}");
        }
        let trace: f64 = chain.h.iter().sum();
        let total: f64 = analytic.iter().sum();
        assert!((trace - total).abs() < 1e-10 * (1.0 + total.abs()));

        let u = orthonormal_matrix(&s).unwrap();
        let eps: Vec<f64> = eigenvalues(&s).iter().map(Scalar::to_f64).collect();
        for n in 0..=s.n {
            for x in 0..=s.n {
                let mut rhs = chain.h[n] * u[(n, x)];
                if n > 0 {
                    rhs -= chain.j[n - 1] * u[(n - 1, x)];
                }
                if n < s.n {
                    rhs -= chain.j[n] * u[(n + 1, x)];
                }
                assert!((eps[x] * u[(n, x)] - rhs).abs() < 1e-10 * (1.0 + eps[x].abs()), "{s} n={n} x={x}");
            }
        }
    }
}

#[test]
fn limits_of_q_racah() {
    let q = 0.5;
    let n = 4;
    let tiny = 1e-8;
    let hahn = spec(Family::QHahn { alpha: Scalar::Real(0.5), beta: Scalar::Real(0.3) }, n, Scalar::Real(q));
    let racah = spec(
        Family::QRacah { alpha: Scalar::Real(0.5), beta: Scalar::Real(0.3), gamma: Scalar::Real(tiny) },
        n,
        Scalar::Real(q),
    );
    let dual = spec(Family::DualQHahn { gamma: Scalar::Real(0.5), delta: Scalar::Real(0.3) }, n, Scalar::Real(q));
    let beta_dual = 1.0 / 0.3 * q.powi(-(n as i32) - 1);
    let racah_dual = spec(
        Family::QRacah { alpha: Scalar::Real(tiny), beta: Scalar::Real(beta_dual), gamma: Scalar::Real(0.5) },
        n,
        Scalar::Real(q),
    );
    for (limit, full) in [(&hahn, &racah), (&dual, &racah_dual)] {
        for k in 0..=n {
            for x in 0..=n {
                let a = evaluate(limit, k, x).unwrap();
                let b = evaluate(full, k, x).unwrap();
                assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{limit} P_{k}({x}): {a} vs {b}");
            }
            let a = eigenvalue(limit, k).unwrap().to_f64();
            let b = eigenvalue(full, k).unwrap().to_f64();
            assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()));
        }
        let la = recurrence_coefficients(limit);
        let lb = recurrence_coefficients(full);
        for (a, b) in la.j.iter().zip(&lb.j).chain(la.h.iter().zip(&lb.h)) {
            assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{limit}");
        }
    }
}

#[test]
fn float_and_exact_models_agree() {
    for s in samples() {
        let float = FamilySpec::new(s.family.map(|p| Scalar::Real(p.to_f64())), s.n, Scalar::Real(s.q.to_f64()));
        let a = orthonormal_matrix(&s).unwrap();
        let b = orthonormal_matrix(&float).unwrap();
        assert!((&a - &b).abs().max() < 1e-10, "{s}\n{a}\n{b}");
    }
}

#[test]
fn q_to_one_recovers_uniform_pst_shape() {
    for n in 1..=8usize {
        for q in [1.0f64 - 1e-4, 1.0 + 1e-4] {
            let s = spec(Family::QKrawtchouk { p: Scalar::Real(q.powi(-(n as i32))) }, n, Scalar::Real(q));
            let chain = recurrence_coefficients(&s);
            for (k, j) in chain.j.iter().enumerate() {
                let target = (((k + 1) * (n - k)) as f64).sqrt() / 2.0;
                assert!((j - target).abs() < 1e-3 * target, "N={n} q={q} k={k}");
            }
        }
    }
}
