//! Normal forms of function germs `f = f₀ + R` with `f₀` homogeneous.
//!
//! The operator is `U ↦ Df₀·U`; in each degree the remainder is pushed into
//! the Belitskii-orthogonal complement of its image.

use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::{
    complement_basis, number, operator_matrix, solve_degreewise, solve_with_complement, CohomologyProblem,
    DegreeSolution, DenseMatrix, EngineError, ProjectionSpec, SolveReport,
};
use crate::graded::{
    belitskii_inner, monomials, series_to_json, BelitskiiVariant, GradedError, GradedSeries, Scalar, VectorSeries,
    DEFAULT_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SingularityError {
    #[error("leading part must be a nonzero homogeneous polynomial of degree at least 2")]
    LeadingPart,
    #[error("perturbation must have order above {q} (found a term of degree {found})")]
    LowOrder { q: usize, found: usize },
    #[error("truncation {d} must exceed the leading degree {q}")]
    Truncation { d: usize, q: usize },
    #[error("leading part and perturbation use different variable counts")]
    Variables,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// `f = f₀ + R` with `f₀` homogeneous of degree `q ≥ 2` and `ord R > q`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularityProblem<S: Scalar> {
    pub leading: GradedSeries<S>,
    pub perturbation: GradedSeries<S>,
    pub d: usize,
    pub tol: f64,
}

impl<S: Scalar> SingularityProblem<S> {
    pub fn new(leading: GradedSeries<S>, perturbation: GradedSeries<S>, d: usize) -> Result<Self, SingularityError> {
        let q = match leading.homogeneous_degree() {
            Some(q) if q >= 2 && !leading.is_zero() => q,
            _ => return Err(SingularityError::LeadingPart),
        };
        if leading.nvars() != perturbation.nvars() {
            return Err(SingularityError::Variables);
        }
        if d <= q {
            return Err(SingularityError::Truncation { d, q });
        }
        if let Some(found) = perturbation.order() {
            if found <= q {
                return Err(SingularityError::LowOrder { q, found });
            }
        }
        Ok(SingularityProblem {
            leading: leading.with_truncation(d),
            perturbation: perturbation.with_truncation(d),
            d,
            tol: DEFAULT_TOL,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn nvars(&self) -> usize {
        self.leading.nvars()
    }

    pub fn degree(&self) -> usize {
        self.leading.homogeneous_degree().expect("validated on construction")
    }

    pub fn function(&self) -> GradedSeries<S> {
        self.leading.add(&self.perturbation)
    }
}

/// `Df₀·U = Σ ∂_j f₀ · U_j`, truncated at `dmax`.
pub fn jacobian_apply<S: Scalar>(leading: &GradedSeries<S>, u: &[GradedSeries<S>], dmax: usize) -> GradedSeries<S> {
    let mut acc = GradedSeries::zero(leading.nvars(), dmax);
    for (j, uj) in u.iter().enumerate() {
        acc.add_assign(&leading.partial(j).with_truncation(dmax).mul_truncated(uj, dmax));
    }
    acc
}

/// The equation `T(U) = Df₀·U − (f∘(id+U) − f₀)`, unknown `U` with zero offsets.
pub struct SingularityEquation<'a, S: Scalar> {
    pub problem: &'a SingularityProblem<S>,
}

impl<S: Scalar> CohomologyProblem<S> for SingularityEquation<'_, S> {
    fn nvars(&self) -> usize {
        self.problem.nvars()
    }
    fn offsets(&self) -> Vec<usize> {
        vec![0; self.nvars()]
    }
    fn target_len(&self) -> usize {
        1
    }
    fn order_shift(&self) -> usize {
        self.problem.degree() - 1
    }
    fn d_shift(&self) -> usize {
        1
    }
    fn projection(&self) -> ProjectionSpec {
        ProjectionSpec::BelitskiiComplement(BelitskiiVariant::Classic)
    }
    fn linear(&self, f: &VectorSeries<S>, dmax: usize) -> VectorSeries<S> {
        VectorSeries::plain(vec![jacobian_apply(&self.problem.leading, f.components(), dmax)])
    }
    fn solve_degree(&self, k: usize, rhs: &VectorSeries<S>) -> Result<DegreeSolution<S>, EngineError> {
        Ok(solve_with_complement(self, k, rhs, BelitskiiVariant::Classic, self.problem.tol))
    }
    fn evaluate(&self, f: &VectorSeries<S>, dmax: usize) -> Result<VectorSeries<S>, EngineError> {
        let p = self.problem;
        let u: Vec<GradedSeries<S>> = f.components().iter().map(|c| c.with_truncation(dmax)).collect();
        let moved = p.function().with_truncation(dmax).compose(&u)?;
        let acted = moved.sub(&p.leading.with_truncation(dmax));
        Ok(VectorSeries::plain(vec![jacobian_apply(&p.leading, &u, dmax).sub(&acted)]))
    }
}

/// Image of `U ↦ Df₀·U` in degree `i` (reduced echelon basis) and its
/// Belitskii-orthogonal complement.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianSplit<S: Scalar> {
    pub degree: usize,
    pub image: Vec<GradedSeries<S>>,
    pub complement: Vec<GradedSeries<S>>,
}

pub fn jacobian_image_basis<S: Scalar>(leading: &GradedSeries<S>, i: usize, tol: f64) -> JacobianSplit<S> {
    let n = leading.nvars();
    let all = || monomials(n, i).into_iter().map(|a| GradedSeries::monomial(n, i, a, S::one())).collect();
    let Some(q) = leading.homogeneous_degree().filter(|_| !leading.is_zero()) else {
        return JacobianSplit { degree: i, image: Vec::new(), complement: all() };
    };
    if i + 1 < q {
        return JacobianSplit { degree: i, image: Vec::new(), complement: all() };
    }
    let problem = SingularityProblem {
        leading: leading.with_truncation(i.max(q)),
        perturbation: GradedSeries::zero(n, i.max(q)),
        d: i.max(q),
        tol,
    };
    let eq = SingularityEquation { problem: &problem };
    let k = i + 1 - q;
    let (matrix, _, target) = operator_matrix(&eq, k);
    let mut rows = DenseMatrix::zeros(matrix.cols(), matrix.rows());
    for r in 0..matrix.rows() {
        for c in 0..matrix.cols() {
            rows.set(c, r, matrix.get(r, c).clone());
        }
    }
    let rank = rows.rref(tol).len();
    let image = (0..rank)
        .map(|r| {
            let mut g = GradedSeries::zero(n, i);
            for (c, (_, a)) in target.iter().enumerate() {
                g.add_term(a.clone(), rows.get(r, c).clone());
            }
            g
        })
        .collect();
    let complement =
        complement_basis(&eq, k, BelitskiiVariant::Classic, tol).into_iter().map(|v| v.component(0).clone()).collect();
    JacobianSplit { degree: i, image, complement }
}

/// Degrees where `f∘Φ − f₀` fails to be orthogonal to the image.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularityCertificate {
    pub violations: Vec<(usize, f64)>,
    pub checked_degree: usize,
}

impl SingularityCertificate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityResult<S: Scalar> {
    /// `U` in `Φ = id + U`.
    pub transform: VectorSeries<S>,
    /// `h` with `f∘Φ = f₀ + h`.
    pub remainder: GradedSeries<S>,
    pub splits: Vec<JacobianSplit<S>>,
    pub certificate: SingularityCertificate,
    pub report: SolveReport,
}

/// Checks `⟨h^{(i)}, v⟩ = 0` for every image basis vector `v` in degrees `q < i ≤ d`.
pub fn certify_remainder<S: Scalar>(
    remainder: &GradedSeries<S>,
    splits: &[JacobianSplit<S>],
    tol: f64,
) -> SingularityCertificate {
    let mut violations = Vec::new();
    let mut checked = 0;
    for split in splits {
        let part = remainder.homogeneous(split.degree).with_truncation(split.degree);
        let mut worst = 0.0f64;
        for v in &split.image {
            let ip = belitskii_inner(&part, v, BelitskiiVariant::Classic).expect("same degree");
            if !ip.is_negligible(tol) {
                worst = worst.max(ip.modulus());
            }
        }
        if worst > 0.0 {
            violations.push((split.degree, worst));
        }
        checked = split.degree;
    }
    SingularityCertificate { violations, checked_degree: checked }
}

pub fn sing_normalize<S: Scalar>(problem: &SingularityProblem<S>) -> Result<SingularityResult<S>, SingularityError> {
    let q = problem.degree();
    let d = problem.d;
    let eq = SingularityEquation { problem };
    let out = solve_degreewise(&eq, d + 1 - q)?;
    let u: Vec<GradedSeries<S>> = out.solution.components().iter().map(|c| c.with_truncation(d)).collect();
    let remainder = problem.function().compose(&u)?.sub(&problem.leading);
    let splits: Vec<JacobianSplit<S>> =
        (q + 1..=d).map(|i| jacobian_image_basis(&problem.leading, i, problem.tol)).collect();
    let certificate = certify_remainder(&remainder, &splits, problem.tol);
    Ok(SingularityResult {
        transform: VectorSeries::new(u, vec![0; problem.nvars()])?,
        remainder,
        splits,
        certificate,
        report: out.report,
    })
}

impl<S: Scalar> SingularityResult<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "mode": S::MODE.as_str(),
            "certificate": {
                "passed": self.certificate.passed(),
                "checked_degree": self.certificate.checked_degree,
                "violations": self.certificate.violations.iter()
                    .map(|(i, m)| json!({"degree": i, "modulus": number(*m)}))
                    .collect::<Vec<_>>(),
            },
            "complement_dimensions": self.splits.iter()
                .map(|s| json!({"degree": s.degree, "image": s.image.len(), "complement": s.complement.len()}))
                .collect::<Vec<_>>(),
            "transform": self.transform.components().iter().map(series_to_json).collect::<Vec<_>>(),
            "remainder": series_to_json(&self.remainder),
            "degrees": self.report.to_json(),
        })
    }
}
