use normalform::engine::{solve_with_complement, CohomologyProblem, DenseMatrix};
use normalform::geometry::*;
use normalform::graded::*;
use normalform::sample;

fn q(p: i64, r: i64) -> Rational {
    Rational::from_ratio(p, r)
}

fn mono(n: usize, d: usize, e: &[u16], c: Rational) -> GradedSeries<Rational> {
    GradedSeries::monomial(n, d, MultiIndex::from_slice(e), c)
}

fn zero_matrix(n: usize, d: usize) -> MatrixSeries<Rational> {
    MatrixSeries::zero(n, n, d)
}

fn contract(m: &MatrixSeries<Rational>) -> Vec<GradedSeries<Rational>> {
    let n = m.size();
    let d = m.truncation() + 1;
    (0..n)
        .map(|r| {
            let mut acc = GradedSeries::zero(n, d);
            for c in 0..n {
                acc.add_assign(&m.get(r, c).with_truncation(d).mul_truncated(&GradedSeries::variable(n, d, c), d));
            }
            acc
        })
        .collect()
}

fn is_symmetric(m: &MatrixSeries<Rational>) -> bool {
    m.sub(&m.transpose()).is_zero()
}

fn jac(phi: &[GradedSeries<Rational>], i: usize) -> MatrixSeries<Rational> {
    MatrixSeries::jacobian(phi).with_truncation(i)
}

fn matrix_inner(a: &MatrixSeries<Rational>, b: &MatrixSeries<Rational>) -> Rational {
    belitskii_inner_tuple(a.entries(), b.entries(), BelitskiiVariant::Classic).unwrap()
}

#[test]
fn frame_solve_examples() {
    let a = MatrixSeries::from_entries(
        2,
        vec![
            mono(2, 2, &[2, 0], q(1, 1)),
            GradedSeries::zero(2, 2),
            GradedSeries::zero(2, 2),
            GradedSeries::zero(2, 2),
        ],
    )
    .unwrap();
    let phi = frame_solve(&a, 2);
    assert_eq!(phi[0], mono(2, 3, &[3, 0], q(1, 3)));
    assert!(phi[1].is_zero());
    assert!(a.sub(&jac(&phi, 2)).is_zero());
    assert!(frame_solve(&zero_matrix(2, 2), 2).iter().all(GradedSeries::is_zero));

    let mut rng = sample::rng(1);
    for n in 2..=3 {
        let a = sample::homogeneous_matrix(&mut rng, n, 3, 3);
        let phi = frame_solve(&a, 3);
        assert!(contract(&a.sub(&jac(&phi, 3))).iter().all(GradedSeries::is_zero));
    }
}

#[test]
fn metric_solve_examples() {
    let a = MatrixSeries::from_entries(
        2,
        vec![
            mono(2, 2, &[2, 0], q(1, 1)),
            GradedSeries::zero(2, 2),
            GradedSeries::zero(2, 2),
            GradedSeries::zero(2, 2),
        ],
    )
    .unwrap();
    let (phi, rot) = metric_solve(&a, 2).unwrap();
    assert_eq!(phi[0], mono(2, 3, &[3, 0], q(1, 3)));
    assert!(phi[1].is_zero());
    assert!(rot.is_zero());
    assert!(a.sub(&jac(&phi, 2)).add(&rot).is_zero());

    let (phi, rot) = metric_solve(&zero_matrix(3, 2), 2).unwrap();
    assert!(phi.iter().all(GradedSeries::is_zero) && rot.is_zero());

    let mut rng = sample::rng(2);
    for n in 2..=3 {
        for i in 2..=4 {
            let a = sample::homogeneous_matrix(&mut rng, n, i, i);
            let (phi, rot) = metric_solve(&a, i).unwrap();
            assert!(rot.add(&rot.transpose()).is_zero());
            let res = a.sub(&jac(&phi, i)).add(&rot);
            assert!(is_symmetric(&res), "n={n} i={i}");
            assert!(contract(&res).iter().all(GradedSeries::is_zero), "n={n} i={i}");
        }
    }
}

#[test]
fn l_operator_examples() {
    let h = mono(3, 2, &[1, 1, 0], q(1, 1));
    assert_eq!(l_apply(&h, 3, 2), h.scale(&q(1, 3)));
    let r2 =
        mono(3, 2, &[2, 0, 0], q(1, 1)).add(&mono(3, 2, &[0, 2, 0], q(1, 1))).add(&mono(3, 2, &[0, 0, 2], q(1, 1)));
    assert_eq!(l_apply(&r2, 3, 2), r2.scale(&q(4, 3)));
    assert!(l_apply(&GradedSeries::<Rational>::zero(3, 2), 3, 2).is_zero());
}

#[test]
fn l_operator_is_self_adjoint() {
    let mut rng = sample::rng(3);
    for n in 3..=4 {
        for i in 2..=5 {
            let h1 = sample::homogeneous(&mut rng, n, i).with_truncation(i);
            let h2 = sample::homogeneous(&mut rng, n, i).with_truncation(i);
            let lhs = belitskii_inner(&l_apply(&h1, n, i), &h2, BelitskiiVariant::Classic).unwrap();
            let rhs = belitskii_inner(&h1, &l_apply(&h2, n, i), BelitskiiVariant::Classic).unwrap();
            assert_eq!(lhs, rhs);
            let z = l_apply(&h1, n, i);
            assert_eq!(l_solve(&z, n, i, 0.0).unwrap(), h1);
        }
    }
}

/// Spectrum on `|x|^{2k}·(harmonic of degree i−2k)`.
fn harmonic_spectrum_min(n: usize, i: usize) -> f64 {
    (0..=i / 2)
        .map(|k| {
            let (k, i, n) = (k as f64, i as f64, n as f64);
            2.0 * k * (2.0 * i - 2.0 * k + n - 2.0) / (i * (i + 1.0)) + (n - 2.0) * (i - 1.0) / (i + 1.0)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn l_spectrum() {
    assert!((l_min_eigenvalue(3, 2) - 1.0 / 3.0).abs() < 1e-9);
    assert!((l_min_eigenvalue(4, 2) - 2.0 / 3.0).abs() < 1e-9);
    assert!((l_min_eigenvalue(3, 3) - 0.5).abs() < 1e-9);
    for n in 3..=5 {
        for i in 2..=8 {
            let lam = l_min_eigenvalue(n, i);
            assert!(lam >= harmonic_eigenvalue(n, i) - 1e-9);
            assert!((lam - harmonic_spectrum_min(n, i)).abs() < 1e-9);
        }
    }
}

fn conformal_residual(a: &MatrixSeries<Rational>, i: usize) -> MatrixSeries<Rational> {
    let (phi, rot, h) = conformal_solve(a, i, 0.0).unwrap();
    let n = a.size();
    let mut res = a.sub(&jac(&phi, i)).add(&rot);
    for k in 0..n {
        let e = res.get(k, k).add(&h);
        res.set(k, k, e);
    }
    res
}

#[test]
fn conformal_solve_membership() {
    let mut rng = sample::rng(4);
    assert!(matches!(conformal_solve(&zero_matrix(2, 2), 2, 0.0), Err(GeometryError::ConformalDimension(2))));
    let (phi, rot, h) = conformal_solve(&zero_matrix(3, 2), 2, 0.0).unwrap();
    assert!(phi.iter().all(GradedSeries::is_zero) && rot.is_zero() && h.is_zero());
    for (n, i) in [(3, 2), (3, 3), (4, 2)] {
        let a = sample::homogeneous_matrix(&mut rng, n, i, i);
        let res = conformal_residual(&a, i);
        assert!(is_symmetric(&res));
        assert!(res.trace().is_zero());
        assert!(contract(&res).iter().all(GradedSeries::is_zero));
    }
}

#[test]
fn apply_gauge_examples() {
    let mut rng = sample::rng(5);
    let n = 2;
    let d = 5;
    let m =
        MatrixSeries::from_entries(n, (0..4).map(|_| sample::series(&mut rng, n, d, 1..=3, 0.5)).collect()).unwrap();
    let id = GaugeElement::identity(n, d);
    assert_eq!(apply_gauge(&m, &id, GeometryKind::Conformal, d).unwrap(), m);

    // frame gauge built from the degree-2 part of I + A: the result's degree-2 part annihilates x
    let a = sample::homogeneous_matrix(&mut rng, n, 2, d);
    let mut g = GaugeElement::identity(n, d);
    g.phi = frame_solve(&a, 2).into_iter().map(|p| p.with_truncation(d)).collect();
    let out = apply_gauge(&a, &g, GeometryKind::Frame, d).unwrap();
    assert!(contract(&out.homogeneous(2).with_truncation(2)).iter().all(GradedSeries::is_zero));

    // pure rotation Q = x₁·K: exp Q − I by constant-matrix powers
    let k = [q(0, 1), q(2, 1), q(-2, 1), q(0, 1)];
    let mut rot = MatrixSeries::zero(n, n, d);
    rot.set(0, 1, mono(n, d, &[1, 0], k[1].clone()));
    rot.set(1, 0, mono(n, d, &[1, 0], k[2].clone()));
    let mut g = GaugeElement::identity(n, d);
    g.rotation = rot.clone();
    let out = apply_gauge(&zero_matrix(n, d), &g, GeometryKind::Metric, d).unwrap();
    let mut power = vec![q(1, 1), q(0, 1), q(0, 1), q(1, 1)];
    let mut fact = q(1, 1);
    let mut expected = zero_matrix(n, d);
    for p in 1..=d {
        power = vec![
            power[0].clone() * &k[0] + power[1].clone() * &k[2],
            power[0].clone() * &k[1] + power[1].clone() * &k[3],
            power[2].clone() * &k[0] + power[3].clone() * &k[2],
            power[2].clone() * &k[1] + power[3].clone() * &k[3],
        ];
        fact *= q(p as i64, 1);
        for r in 0..2 {
            for c in 0..2 {
                let e = expected.get(r, c).add(&mono(n, d, &[p as u16, 0], power[2 * r + c].clone() / fact.clone()));
                expected.set(r, c, e);
            }
        }
    }
    assert_eq!(out, expected);
    // odd degrees are skew, even degrees symmetric
    for p in 1..=d {
        let part = out.homogeneous(p);
        if p % 2 == 1 {
            assert!(part.add(&part.transpose()).is_zero());
        } else {
            assert!(is_symmetric(&part));
        }
    }

    let mut bad = GaugeElement::identity(n, d);
    bad.factor = mono(n, d, &[1, 0], q(1, 1));
    assert!(apply_gauge(&m, &bad, GeometryKind::Metric, d).is_err());
}

#[test]
fn adjoint_structure() {
    let mut rng = sample::rng(6);
    for n in 2..=3 {
        for i in 1..=3 {
            let m = sample::homogeneous_matrix(&mut rng, n, i, i);
            let phi: Vec<_> = (0..n).map(|_| sample::homogeneous(&mut rng, n, i + 1).with_truncation(i + 1)).collect();
            let raw = sample::homogeneous_matrix(&mut rng, n, i, i);
            let rot = raw.sub(&raw.transpose());
            let h = sample::homogeneous(&mut rng, n, i).with_truncation(i);
            let mut g = GaugeElement::identity(n, i + 1);
            g.phi = phi.clone();
            g.rotation = rot.clone();
            g.factor = h.clone();
            let lhs = matrix_inner(&gauge_linear(&g, n, i), &m);
            let mx: Vec<_> = contract(&m).iter().map(|c| c.neg()).collect();
            let skew_part = m.sub(&m.transpose()).scale(&q(1, 2));
            let rhs = belitskii_inner_tuple(&phi, &mx, BelitskiiVariant::Classic).unwrap()
                + matrix_inner(&rot.with_truncation(i), &skew_part)
                + belitskii_inner(&h, &m.trace(), BelitskiiVariant::Classic).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn closed_forms_match_generic_solve() {
    let mut rng = sample::rng(7);
    for (kind, n, degrees) in [
        (GeometryKind::Frame, 2, 1..=3),
        (GeometryKind::Metric, 2, 2..=4),
        (GeometryKind::Metric, 3, 2..=3),
        (GeometryKind::Conformal, 3, 2..=3),
    ] {
        for i in degrees {
            let object = GeometryObject::new(kind, zero_matrix(n, i), i).unwrap();
            let eq = GeometryEquation::new(&object);
            let a = sample::homogeneous_matrix(&mut rng, n, i, i);
            let rhs = VectorSeries::plain(a.scale(&q(-1, 1)).entries().to_vec());
            let closed = eq.solve_degree(i, &rhs).unwrap();
            let generic = solve_with_complement(&eq, i, &rhs, BelitskiiVariant::Classic, 0.0);
            assert_eq!(
                closed.residual,
                generic.residual.with_truncation(closed.residual.truncation()),
                "{kind} n={n} i={i}"
            );
            assert_eq!(
                closed.solution,
                generic.solution.with_truncation(closed.solution.truncation()),
                "{kind} n={n} i={i}"
            );
        }
    }
}

/// Dimension of `{M homogeneous of degree i : M·x = 0, (M symmetric), (trace M = 0)}` by direct linear algebra.
fn membership_dimension(kind: GeometryKind, n: usize, i: usize) -> usize {
    let basis = monomials(n, i);
    let coords: Vec<(usize, usize, MultiIndex)> =
        (0..n).flat_map(|r| (0..n).flat_map(move |c| monomials(n, i).into_iter().map(move |a| (r, c, a)))).collect();
    let up = monomials(n, i + 1);
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    // (M·x)_r coefficient at x^b
    for r in 0..n {
        for b in &up {
            rows.push(
                coords
                    .iter()
                    .map(|(rr, c, a)| if *rr == r && a.add(&MultiIndex::unit(n, *c)) == *b { q(1, 1) } else { q(0, 1) })
                    .collect(),
            );
        }
    }
    if kind != GeometryKind::Frame {
        for r in 0..n {
            for c in r + 1..n {
                for b in &basis {
                    rows.push(
                        coords
                            .iter()
                            .map(|(rr, cc, a)| {
                                if a != b {
                                    q(0, 1)
                                } else if (*rr, *cc) == (r, c) {
                                    q(1, 1)
                                } else if (*rr, *cc) == (c, r) {
                                    q(-1, 1)
                                } else {
                                    q(0, 1)
                                }
                            })
                            .collect(),
                    );
                }
            }
        }
    }
    if kind == GeometryKind::Conformal {
        for b in &basis {
            rows.push(coords.iter().map(|(r, c, a)| if r == c && a == b { q(1, 1) } else { q(0, 1) }).collect());
        }
    }
    let mut m = DenseMatrix::zeros(rows.len(), coords.len());
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            m.set(r, c, v.clone());
        }
    }
    coords.len() - m.rank(0.0)
}

#[test]
fn normal_space_matches_membership_equations() {
    for kind in [GeometryKind::Frame, GeometryKind::Metric, GeometryKind::Conformal] {
        for (n, i) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
            let basis: Vec<MatrixSeries<Rational>> = normal_space_basis(kind, n, i, 0.0);
            assert_eq!(basis.len(), membership_dimension(kind, n, i), "{kind} n={n} i={i}");
            for b in &basis {
                assert!(membership(b, kind, i, 0.0).passed());
            }
        }
    }
    let gauss: Vec<MatrixSeries<Rational>> = normal_space_basis(GeometryKind::Metric, 2, 2, 0.0);
    assert_eq!(gauss.len(), 1);
    let g = &gauss[0];
    let c = g.get(0, 0).coeff(&MultiIndex::from_slice(&[0, 2]));
    let expected = MatrixSeries::from_entries(
        2,
        vec![
            mono(2, 2, &[0, 2], c.clone()),
            mono(2, 2, &[1, 1], -c.clone()),
            mono(2, 2, &[1, 1], -c.clone()),
            mono(2, 2, &[2, 0], c.clone()),
        ],
    )
    .unwrap();
    assert_eq!(g, &expected);
    assert!(normal_space_basis::<Rational>(GeometryKind::Conformal, 2, 3, 0.0).is_empty());
}

#[test]
fn zero_object_is_fixed() {
    for kind in [GeometryKind::Frame, GeometryKind::Metric, GeometryKind::Conformal] {
        let out = geometry_normalize(&GeometryObject::new(kind, zero_matrix(3, 4), 4).unwrap()).unwrap();
        assert!(out.gauge.is_identity());
        assert!(out.normal_form.is_zero());
        assert!(out.passed());
    }
}

fn random_object(seed: u64, kind: GeometryKind, n: usize, d: usize) -> GeometryObject<Rational> {
    let mut rng = sample::rng(seed);
    let entries = (0..n * n).map(|_| sample::series(&mut rng, n, d, 1..=2, 0.4)).collect();
    GeometryObject::new(kind, MatrixSeries::from_entries(n, entries).unwrap(), d).unwrap()
}

#[test]
fn metric_two_dimensional() {
    let out = geometry_normalize(&random_object(8, GeometryKind::Metric, 2, 6)).unwrap();
    assert!(out.passed());
    let nf = &out.normal_form;
    assert!(is_symmetric(nf));
    assert!(contract(nf).iter().all(GradedSeries::is_zero));
    let two = nf.homogeneous(2);
    let c = two.get(1, 1).coeff(&MultiIndex::from_slice(&[2, 0]));
    assert_eq!(two.get(0, 0), &mono(2, 6, &[0, 2], c.clone()));
    assert_eq!(two.get(0, 1), &mono(2, 6, &[1, 1], -c.clone()));
    assert!(nf.homogeneous(1).is_zero());
}

#[test]
fn frame_and_conformal_normalize() {
    for (kind, n, d) in [(GeometryKind::Frame, 2, 5), (GeometryKind::Frame, 3, 4), (GeometryKind::Conformal, 3, 4)] {
        let out = geometry_normalize(&random_object(9, kind, n, d)).unwrap();
        assert!(out.passed(), "{kind} n={n}");
    }
    let out = geometry_normalize(&random_object(10, GeometryKind::Conformal, 2, 5)).unwrap();
    assert!(out.normal_form.is_zero());
}

#[test]
fn normalization_is_stable_under_refinement() {
    let short = geometry_normalize(&random_object(11, GeometryKind::Metric, 2, 4)).unwrap();
    let long = geometry_normalize(&random_object(11, GeometryKind::Metric, 2, 6)).unwrap();
    // same seed, the shorter object is a truncation of the longer one when both only carry degrees ≤ 2
    assert_eq!(short.normal_form, long.normal_form.with_truncation(4));
}

#[test]
fn float_mode_conformal() {
    let exact = random_object(12, GeometryKind::Conformal, 3, 4);
    let fl = GeometryObject::new(GeometryKind::Conformal, exact.matrix.convert(|c| c.to_f64()), 4).unwrap();
    let out = geometry_normalize(&fl).unwrap();
    assert!(out.passed());
}

#[test]
fn solver_norm_ratios_are_bounded() {
    let mut rng = sample::rng(13);
    let mut worst = Vec::new();
    for i in 2..=6 {
        let mut m = 0.0f64;
        for _ in 0..5 {
            let a: MatrixSeries<f64> = sample::homogeneous_matrix(&mut rng, 3, i, i).convert(|c| c.to_f64());
            let g = closed_form_solve(&a, GeometryKind::Conformal, i, 1e-12).unwrap().unwrap();
            let phi = g.phi.iter().map(|p| p.degree_norm(i + 1)).fold(0.0, f64::max);
            let norm = a.degree_norm(i);
            m = m.max(i as f64 * phi / norm).max(g.rotation.degree_norm(i) / norm).max(g.factor.degree_norm(i) / norm);
        }
        worst.push(m);
    }
    let first = worst[0];
    assert!(worst.iter().all(|w| w.is_finite() && *w <= 4.0 * first.max(1.0)), "{worst:?}");
}
