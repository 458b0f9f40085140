//! Poincaré–Dulac normal forms of vector fields `ẋ = Ax + R(x)`.

use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::{
    classify_denominators, number, solve_degreewise, solve_with_complement, CohomologyProblem, DegreeSolution,
    DenominatorEntry, DenominatorProfile, EngineError, Growth, ProjectionSpec, SolveReport,
};
use crate::graded::{
    monomials, series_to_json, BelitskiiVariant, GradedError, GradedSeries, MatrixSeries, MultiIndex, Scalar,
    VectorSeries, DEFAULT_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VfError {
    #[error("expected {expected} perturbation components, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("perturbation must have order at least 2 (found a term of degree {0})")]
    LowOrder(usize),
    #[error("linear part must be a square matrix of size {0}")]
    LinearPart(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// Linear part `A` of the vector field.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearPart<S: Scalar> {
    Diagonal(Vec<S>),
    /// Row-major `n×n`.
    Dense(Vec<S>),
}

impl<S: Scalar> LinearPart<S> {
    pub fn size(&self) -> usize {
        match self {
            LinearPart::Diagonal(l) => l.len(),
            LinearPart::Dense(a) => (a.len() as f64).sqrt().round() as usize,
        }
    }

    fn entry(&self, i: usize, j: usize) -> S {
        match self {
            LinearPart::Diagonal(l) => {
                if i == j {
                    l[i].clone()
                } else {
                    S::zero()
                }
            }
            LinearPart::Dense(a) => a[i * self.size() + j].clone(),
        }
    }

    /// `A·v` for a tuple of series.
    pub fn apply(&self, v: &[GradedSeries<S>]) -> Vec<GradedSeries<S>> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut acc = GradedSeries::zero(v[0].nvars(), v[0].truncation());
                for (j, vj) in v.iter().enumerate() {
                    let a = self.entry(i, j);
                    if !a.is_zero() {
                        acc.add_assign(&vj.scale(&a));
                    }
                }
                acc
            })
            .collect()
    }

    /// `A·x` truncated at `d`.
    pub fn linear_field(&self, d: usize) -> Vec<GradedSeries<S>> {
        let n = self.size();
        let x: Vec<GradedSeries<S>> = (0..n).map(|j| GradedSeries::variable(n, d, j)).collect();
        self.apply(&x)
    }
}

/// `ẋ = Ax + R(x)` with `R` of order at least two.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldProblem<S: Scalar> {
    pub linear: LinearPart<S>,
    pub perturbation: Vec<GradedSeries<S>>,
    /// Ambient truncation degree of the normal form.
    pub d: usize,
    pub tol: f64,
}

impl<S: Scalar> VectorFieldProblem<S> {
    pub fn diagonal(lambda: Vec<S>, perturbation: Vec<GradedSeries<S>>, d: usize) -> Result<Self, VfError> {
        Self::new(LinearPart::Diagonal(lambda), perturbation, d)
    }

    pub fn new(linear: LinearPart<S>, perturbation: Vec<GradedSeries<S>>, d: usize) -> Result<Self, VfError> {
        let n = linear.size();
        if let LinearPart::Dense(a) = &linear {
            if a.len() != n * n {
                return Err(VfError::LinearPart(n));
            }
        }
        if perturbation.len() != n {
            return Err(VfError::Dimension { expected: n, found: perturbation.len() });
        }
        for p in &perturbation {
            if p.nvars() != n {
                return Err(VfError::Dimension { expected: n, found: p.nvars() });
            }
            if let Some(o) = p.order() {
                if o < 2 {
                    return Err(VfError::LowOrder(o));
                }
            }
        }
        let perturbation = perturbation.iter().map(|p| p.with_truncation(d)).collect();
        Ok(VectorFieldProblem { linear, perturbation, d, tol: DEFAULT_TOL })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn nvars(&self) -> usize {
        self.linear.size()
    }

    pub fn eigenvalues(&self) -> Option<&[S]> {
        match &self.linear {
            LinearPart::Diagonal(l) => Some(l),
            LinearPart::Dense(_) => None,
        }
    }
}

/// `λ_j − (Q, λ)`.
pub fn denominator<S: Scalar>(lambda: &[S], j: usize, q: &MultiIndex) -> S {
    let mut den = lambda[j].clone();
    for (i, &e) in q.exps().iter().enumerate() {
        if e > 0 {
            den -= &(lambda[i].clone() * S::from_i64(e as i64));
        }
    }
    den
}

/// Zero in exact modes; `|den| ≤ τ(1+|Q|)` in floating modes.
pub fn is_resonant<S: Scalar>(den: &S, degree: usize, tol: f64) -> bool {
    den.is_negligible(tol * (1.0 + degree as f64))
}

/// All resonant pairs `(j, Q)` with `2 ≤ |Q| ≤ d`, ordered by degree, component, monomial.
pub fn enumerate_resonances<S: Scalar>(lambda: &[S], d: usize, tol: f64) -> Vec<(usize, MultiIndex)> {
    let n = lambda.len();
    let mut out = Vec::new();
    for deg in 2..=d {
        for j in 0..n {
            for q in monomials(n, deg) {
                if is_resonant(&denominator(lambda, j, &q), deg, tol) {
                    out.push((j, q));
                }
            }
        }
    }
    out
}

/// True iff `0` is outside the convex hull of the eigenvalues in the complex plane.
pub fn poincare_domain<S: Scalar>(lambda: &[S]) -> bool {
    let zero = <S::Real as num::Zero>::zero();
    let pts: Vec<(S::Real, S::Real)> = lambda.iter().map(|l| (l.re(), l.im())).collect();
    let cross = |a: &(S::Real, S::Real), b: &(S::Real, S::Real)| a.0.clone() * b.1.clone() - a.1.clone() * b.0.clone();
    let dot = |a: &(S::Real, S::Real), b: &(S::Real, S::Real)| a.0.clone() * b.0.clone() + a.1.clone() * b.1.clone();
    if pts.is_empty() || pts.iter().any(|p| p.0 == zero && p.1 == zero) {
        return false;
    }
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            if cross(a, b) == zero && dot(a, b) < zero {
                return false;
            }
        }
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let (a, b, c) = (&pts[i], &pts[j], &pts[k]);
                let s1 = cross(a, b);
                let s2 = cross(b, c);
                let s3 = cross(c, a);
                let all_pos = s1 > zero && s2 > zero && s3 > zero;
                let all_neg = s1 < zero && s2 < zero && s3 < zero;
                if all_pos || all_neg {
                    return false;
                }
            }
        }
    }
    true
}

/// `(I + DF)⁻¹ (Ax + AF + R(x + F))` truncated at `d`, for `F` of order at least two.
pub fn pushforward<S: Scalar>(
    linear: &LinearPart<S>,
    perturbation: &[GradedSeries<S>],
    f: &[GradedSeries<S>],
    d: usize,
) -> Result<Vec<GradedSeries<S>>, VfError> {
    let n = linear.size();
    for fj in f {
        if let Some(o) = fj.order() {
            if o < 2 {
                return Err(VfError::LowOrder(o));
            }
        }
    }
    let f: Vec<GradedSeries<S>> = f.iter().map(|c| c.with_truncation(d)).collect();
    let shifted: Vec<GradedSeries<S>> = (0..n).map(|j| GradedSeries::variable(n, d, j).add(&f[j])).collect();
    let lin = linear.apply(&shifted);
    let mut rhs = Vec::with_capacity(n);
    for (j, l) in lin.into_iter().enumerate() {
        let rj = perturbation[j].with_truncation(d).compose(&f)?;
        rhs.push(l.add(&rj));
    }
    let jac = MatrixSeries::jacobian(&f).add(&MatrixSeries::identity(n, n, d));
    Ok(jac.solve_unipotent(&rhs, d)?)
}

/// The homological operator `S(F) = AF − DF·Ax`.
pub fn homological<S: Scalar>(linear: &LinearPart<S>, f: &[GradedSeries<S>], d: usize) -> Vec<GradedSeries<S>> {
    let ax = linear.linear_field(d);
    let af = linear.apply(f);
    let dfax = MatrixSeries::jacobian(f).mul_vec(&ax, d);
    af.iter().zip(&dfax).map(|(a, b)| a.with_truncation(d).sub(b)).collect()
}

/// The vector-field instance of the cohomological equation.
pub struct VfEquation<'a, S: Scalar> {
    pub problem: &'a VectorFieldProblem<S>,
}

impl<S: Scalar> CohomologyProblem<S> for VfEquation<'_, S> {
    fn nvars(&self) -> usize {
        self.problem.nvars()
    }
    fn offsets(&self) -> Vec<usize> {
        vec![1; self.nvars()]
    }
    fn target_len(&self) -> usize {
        self.nvars()
    }
    fn order_shift(&self) -> usize {
        1
    }
    fn projection(&self) -> ProjectionSpec {
        match self.problem.linear {
            LinearPart::Diagonal(_) => ProjectionSpec::Diagonal,
            LinearPart::Dense(_) => ProjectionSpec::BelitskiiComplement(BelitskiiVariant::Classic),
        }
    }
    fn linear(&self, f: &VectorSeries<S>, dmax: usize) -> VectorSeries<S> {
        VectorSeries::plain(homological(&self.problem.linear, f.components(), dmax))
    }
    fn solve_degree(&self, k: usize, rhs: &VectorSeries<S>) -> Result<DegreeSolution<S>, EngineError> {
        let Some(lambda) = self.problem.eigenvalues() else {
            return Ok(solve_with_complement(self, k, rhs, BelitskiiVariant::Classic, self.problem.tol));
        };
        let n = self.nvars();
        let deg = k + 1;
        let mut solution = VectorSeries::zero(n, deg, self.offsets());
        let mut residual = VectorSeries::zero(n, deg, vec![0; n]);
        let mut min_den: Option<f64> = None;
        for j in 0..n {
            for (q, c) in rhs.component(j).part(deg) {
                let den = denominator(lambda, j, q);
                if is_resonant(&den, deg, self.problem.tol) {
                    residual.component_mut(j).add_term(q.clone(), c.clone());
                } else {
                    solution.component_mut(j).add_term(q.clone(), c.clone() / den);
                }
            }
            for q in monomials(n, deg) {
                let den = denominator(lambda, j, &q);
                if !is_resonant(&den, deg, self.problem.tol) {
                    let m = den.modulus();
                    min_den = Some(min_den.map_or(m, |v: f64| v.min(m)));
                }
            }
        }
        Ok(DegreeSolution { solution, residual, min_denominator: min_den })
    }
    fn evaluate(&self, f: &VectorSeries<S>, dmax: usize) -> Result<VectorSeries<S>, EngineError> {
        let p = self.problem;
        let comps: Vec<GradedSeries<S>> = f.components().iter().map(|c| c.with_truncation(dmax)).collect();
        let pushed = pushforward(&p.linear, &p.perturbation, &comps, dmax)
            .map_err(|e| EngineError::SolveFailed { degree: dmax, reason: e.to_string() })?;
        let ax = p.linear.linear_field(dmax);
        let s = homological(&p.linear, &comps, dmax);
        Ok(VectorSeries::plain((0..self.nvars()).map(|j| s[j].sub(&pushed[j].sub(&ax[j]))).collect()))
    }
}

/// Coefficients of `NF − Ax` that should vanish but do not.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub violations: Vec<(usize, MultiIndex, f64)>,
    pub checked_degree: usize,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `field − Ax` has only resonant monomials in degrees `2..=d`
/// and no linear or constant remainder.
pub fn certify<S: Scalar>(lambda: &[S], field: &[GradedSeries<S>], d: usize, tol: f64) -> Certificate {
    let n = lambda.len();
    let linear = LinearPart::Diagonal(lambda.to_vec()).linear_field(d);
    let mut violations = Vec::new();
    for j in 0..n {
        let rest = field[j].with_truncation(d).sub(&linear[j]);
        for (q, c) in rest.iter() {
            let deg = q.degree();
            let allowed = deg >= 2 && is_resonant(&denominator(lambda, j, q), deg, tol);
            if !allowed && !c.is_negligible(tol) {
                violations.push((j, q.clone(), c.modulus()));
            }
        }
    }
    Certificate { violations, checked_degree: d }
}

/// Denominator profile over `2 ≤ |Q| ≤ d`; eigenvalues in the Poincaré domain are labelled big.
pub fn classify_growth<S: Scalar>(lambda: &[S], d: usize, tol: f64) -> DenominatorProfile {
    let n = lambda.len();
    let mut entries = Vec::new();
    for deg in 2..=d {
        for j in 0..n {
            for q in monomials(n, deg) {
                let den = denominator(lambda, j, &q);
                entries.push(DenominatorEntry {
                    component: j,
                    degree: deg,
                    modulus: den.modulus(),
                    resonant: is_resonant(&den, deg, tol),
                    index: Some(q),
                });
            }
        }
    }
    let mut profile = classify_denominators(entries, 1);
    if poincare_domain(lambda) && !matches!(profile.growth, Growth::Big { .. }) {
        let c = profile.minima().iter().map(|(&i, &v)| v / i as f64).fold(f64::INFINITY, f64::min);
        profile.growth = Growth::Big { c, beta: 1.0 };
    }
    profile
}

/// Result of a Poincaré–Dulac normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct PdResult<S: Scalar> {
    /// `F` in `Φ = id + F`.
    pub transform: VectorSeries<S>,
    pub normal_form: Vec<GradedSeries<S>>,
    pub resonances: Vec<(usize, MultiIndex)>,
    /// Non-resonant in exact arithmetic but below the tolerance (floating modes only).
    pub near_resonances: Vec<(usize, MultiIndex)>,
    pub profile: DenominatorProfile,
    pub certificate: Certificate,
    pub report: SolveReport,
}

/// Normalizes up to ambient degree `problem.d`.
pub fn pd_normalize<S: Scalar>(problem: &VectorFieldProblem<S>) -> Result<PdResult<S>, VfError> {
    let d = problem.d;
    let eq = VfEquation { problem };
    let out = solve_degreewise(&eq, d.saturating_sub(1))?;
    let f: Vec<GradedSeries<S>> = out.solution.components().iter().map(|c| c.with_truncation(d)).collect();
    let normal_form = pushforward(&problem.linear, &problem.perturbation, &f, d)?;
    let (resonances, near, profile, certificate) = match problem.eigenvalues() {
        Some(lambda) => {
            let res = enumerate_resonances(lambda, d, problem.tol);
            let near = if S::MODE.is_exact() {
                Vec::new()
            } else {
                res.iter().filter(|(j, q)| !denominator(lambda, *j, q).is_zero()).cloned().collect()
            };
            (res, near, classify_growth(lambda, d, problem.tol), certify(lambda, &normal_form, d, problem.tol))
        }
        None => (
            Vec::new(),
            Vec::new(),
            classify_denominators(Vec::new(), 1),
            Certificate { violations: Vec::new(), checked_degree: d },
        ),
    };
    Ok(PdResult {
        transform: VectorSeries::new(f, vec![1; problem.nvars()])?,
        normal_form,
        resonances,
        near_resonances: near,
        profile,
        certificate,
        report: out.report,
    })
}

/// `(j, Q)` as `{"j": j+1, "Q": [...]}`.
pub fn pair_json(j: usize, q: &MultiIndex) -> Value {
    json!({"j": j + 1, "Q": q.exps()})
}

pub fn profile_json(profile: &DenominatorProfile) -> Value {
    let minima: Vec<Value> =
        profile.minima().iter().map(|(i, v)| json!({"degree": i, "min_modulus": number(*v)})).collect();
    json!({"growth": profile.growth.to_json(), "order": profile.m, "minima": minima})
}

impl<S: Scalar> PdResult<S> {
    pub fn to_json(&self, lambda: &[S]) -> Value {
        json!({
            "lambda": lambda.iter().map(|l| l.encode_value()).collect::<Vec<_>>(),
            "mode": S::MODE.as_str(),
            "poincare_domain": poincare_domain(lambda),
            "resonances": self.resonances.iter().map(|(j, q)| pair_json(*j, q)).collect::<Vec<_>>(),
            "near_resonances": self.near_resonances.iter().map(|(j, q)| pair_json(*j, q)).collect::<Vec<_>>(),
            "classification": profile_json(&self.profile),
            "certificate": {
                "passed": self.certificate.passed(),
                "checked_degree": self.certificate.checked_degree,
                "violations": self.certificate.violations.iter()
                    .map(|(j, q, m)| json!({"j": j + 1, "Q": q.exps(), "modulus": number(*m)}))
                    .collect::<Vec<_>>(),
            },
            "transform": self.transform.components().iter().map(series_to_json).collect::<Vec<_>>(),
            "normal_form": self.normal_form.iter().map(series_to_json).collect::<Vec<_>>(),
            "degrees": self.report.to_json(),
        })
    }
}
