use normalform::graded::*;
use normalform::sample;
use normalform::singularity::*;
use num::Zero;

fn q(p: i64, r: i64) -> Rational {
    Rational::from_ratio(p, r)
}

fn mono(n: usize, d: usize, e: &[u16], c: Rational) -> GradedSeries<Rational> {
    GradedSeries::monomial(n, d, MultiIndex::from_slice(e), c)
}

/// `f∘(id+U)` by expanding every monomial as a product of powers.
fn compose_by_products(f: &GradedSeries<Rational>, u: &[GradedSeries<Rational>], d: usize) -> GradedSeries<Rational> {
    let n = f.nvars();
    let mut out = GradedSeries::zero(n, d);
    for (a, c) in f.iter() {
        let mut term = GradedSeries::constant(n, d, c.clone());
        for (j, &e) in a.exps().iter().enumerate() {
            let shifted = GradedSeries::variable(n, d, j).add(&u[j].with_truncation(d));
            for _ in 0..e {
                term = term.mul_truncated(&shifted, d);
            }
        }
        out.add_assign(&term);
    }
    out
}

/// Every `∂_j f₀ · x^b` landing in degree `i`.
fn image_spanning_set(f0: &GradedSeries<Rational>, i: usize) -> Vec<GradedSeries<Rational>> {
    let n = f0.nvars();
    let qdeg = f0.homogeneous_degree().unwrap();
    let mut out = Vec::new();
    for j in 0..n {
        for b in monomials(n, i + 1 - qdeg) {
            out.push(f0.partial(j).with_truncation(i).mul_truncated(&GradedSeries::monomial(n, i, b, q(1, 1)), i));
        }
    }
    out
}

fn assert_normalized(f0: &GradedSeries<Rational>, r: &GradedSeries<Rational>, d: usize) -> SingularityResult<Rational> {
    let p = SingularityProblem::new(f0.clone(), r.clone(), d).unwrap();
    let out = sing_normalize(&p).unwrap();
    assert!(out.certificate.passed(), "{:?}", out.certificate.violations);
    let moved = compose_by_products(&f0.add(r).with_truncation(d), out.transform.components(), d);
    let h = moved.sub(&f0.with_truncation(d));
    assert_eq!(h, out.remainder);
    let qdeg = f0.homogeneous_degree().unwrap();
    assert!(h.order().is_none_or(|o| o > qdeg));
    for i in qdeg + 1..=d {
        let part = h.homogeneous(i).with_truncation(i);
        for v in image_spanning_set(f0, i) {
            assert_eq!(belitskii_inner(&part, &v, BelitskiiVariant::Classic).unwrap(), q(0, 1), "degree {i}");
        }
    }
    out
}

#[test]
fn morse_one_variable_image() {
    let split = jacobian_image_basis(&mono(1, 3, &[2], q(1, 1)), 3, DEFAULT_TOL);
    assert_eq!(split.image, vec![mono(1, 3, &[3], q(1, 1))]);
    assert!(split.complement.is_empty());
}

#[test]
fn cusp_image_and_complement() {
    let f0 = mono(2, 3, &[2, 1], q(1, 1));
    let split = jacobian_image_basis(&f0, 3, DEFAULT_TOL);
    assert_eq!(
        split.image,
        vec![mono(2, 3, &[3, 0], q(1, 1)), mono(2, 3, &[2, 1], q(1, 1)), mono(2, 3, &[1, 2], q(1, 1))]
    );
    assert_eq!(split.complement.len(), 1);
    let c = &split.complement[0];
    assert_eq!(c.term_count(), 1);
    assert!(!c.coeff(&MultiIndex::from_slice(&[0, 3])).is_zero());
    // degree 4: only x₂⁴ is missing from the image
    let split = jacobian_image_basis(&f0.with_truncation(4), 4, DEFAULT_TOL);
    assert_eq!(split.image.len(), 4);
    assert_eq!(split.complement.len(), 1);
    assert!(!split.complement[0].coeff(&MultiIndex::from_slice(&[0, 4])).is_zero());
}

#[test]
fn zero_leading_part_has_full_complement() {
    let split = jacobian_image_basis(&GradedSeries::<Rational>::zero(2, 3), 3, DEFAULT_TOL);
    assert!(split.image.is_empty());
    assert_eq!(split.complement.len(), 4);
}

#[test]
fn morse_case_normalizes_to_leading_part() {
    let out = assert_normalized(&mono(1, 8, &[2], q(1, 1)), &mono(1, 8, &[3], q(1, 1)), 8);
    assert!(out.remainder.is_zero());
    assert!(!out.transform.is_zero());
}

#[test]
fn zero_perturbation_is_fixed() {
    let f0 = mono(2, 6, &[2, 1], q(1, 1));
    let out = assert_normalized(&f0, &GradedSeries::zero(2, 6), 6);
    assert!(out.transform.is_zero());
    assert!(out.remainder.is_zero());
}

#[test]
fn cusp_keeps_complement_term() {
    let f0 = mono(2, 7, &[2, 1], q(1, 1));
    let out = assert_normalized(&f0, &mono(2, 7, &[0, 4], q(1, 1)), 7);
    let h4 = out.remainder.homogeneous(4);
    assert_eq!(h4, mono(2, 7, &[0, 4], q(1, 1)));
}

#[test]
fn random_cusp_perturbations() {
    let mut rng = sample::rng(31);
    let f0 = mono(2, 9, &[2, 1], q(1, 1));
    for _ in 0..3 {
        let r = sample::series(&mut rng, 2, 9, 4..=5, 0.5);
        assert_normalized(&f0, &r, 9);
    }
}

#[test]
fn isolated_singularity_reduces_to_leading_part() {
    let mut rng = sample::rng(2);
    let f0 = mono(2, 7, &[2, 0], q(1, 1)).add(&mono(2, 7, &[0, 2], q(1, 1)));
    for i in 3..=7 {
        assert!(jacobian_image_basis(&f0, i, DEFAULT_TOL).complement.is_empty());
    }
    let r = sample::series(&mut rng, 2, 7, 3..=4, 0.6);
    let out = assert_normalized(&f0, &r, 7);
    assert!(out.remainder.is_zero());
}

#[test]
fn three_variable_cubic() {
    let mut rng = sample::rng(5);
    let f0 = mono(3, 6, &[3, 0, 0], q(1, 1)).add(&mono(3, 6, &[0, 1, 2], q(2, 1)));
    let r = sample::series(&mut rng, 3, 6, 4..=4, 0.4);
    assert_normalized(&f0, &r, 6);
}

#[test]
fn order_accounting() {
    let mut rng = sample::rng(13);
    let d = 10;
    let f0 = mono(2, d, &[2, 1], q(1, 1));
    let qdeg = 3;
    for k in 2..=4 {
        let u: Vec<_> = (0..2).map(|_| sample::homogeneous(&mut rng, 2, k).with_truncation(d)).collect();
        let r = sample::series(&mut rng, 2, d, 4..=5, 0.6);
        let sigma1 = f0.compose(&u).unwrap().sub(&f0).sub(&jacobian_apply(&f0, &u, d));
        let sigma2 = r.compose(&u).unwrap().sub(&r);
        assert!(sigma1.order().is_none_or(|o| o >= 2 * k + qdeg - 2));
        assert!(sigma2.order().is_none_or(|o| o >= k + qdeg));
    }
}

#[test]
fn float_mode_matches_exact() {
    let mut rng = sample::rng(8);
    let f0 = mono(2, 7, &[2, 1], q(1, 1));
    let r = sample::series(&mut rng, 2, 7, 4..=4, 0.6);
    let exact = sing_normalize(&SingularityProblem::new(f0.clone(), r.clone(), 7).unwrap()).unwrap();
    let fl =
        sing_normalize(&SingularityProblem::new(sample::convert::<f64>(&f0), sample::convert(&r), 7).unwrap()).unwrap();
    assert!(fl.certificate.passed());
    for (a, c) in exact.remainder.iter() {
        let approx = fl.remainder.coeff(a);
        assert!((approx - c.to_f64()).abs() < 1e-9);
    }
}

#[test]
fn rejects_invalid_problems() {
    let f0 = mono(2, 5, &[2, 1], q(1, 1));
    assert!(SingularityProblem::new(f0.clone(), mono(2, 5, &[3, 0], q(1, 1)), 5).is_err());
    assert!(SingularityProblem::new(f0.add(&mono(2, 5, &[4, 0], q(1, 1))), GradedSeries::zero(2, 5), 5).is_err());
    assert!(SingularityProblem::new(f0.clone(), GradedSeries::zero(2, 5), 3).is_err());
}
