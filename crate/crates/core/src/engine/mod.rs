//! Degree-by-degree solver for fixed-point equations `F = S⁻¹ π T(F)`.
//!
//! A problem supplies the linear operator `S`, a per-degree solver for it
//! (which also splits off the part of the right-hand side outside the image),
//! and the nonlinear map `T`. The engine builds `F` one shifted degree at a
//! time and records the split-off residuals, which form the normal form.

mod denominators;
mod linalg;

use std::time::{Duration, Instant};

use serde_json::{json, Value};
use thiserror::Error;

use crate::graded::{
    format_f64, monomial_weight, monomials, BelitskiiVariant, GradedError, GradedSeries, MultiIndex, Scalar,
    VectorSeries,
};

pub use denominators::{classify_denominators, DenominatorEntry, DenominatorProfile, Growth, GROWTH_SLACK};
pub use linalg::{linear_solve_with_complement, orthogonal_basis, weighted_inner, ComplementSplit, DenseMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("T(0) has order {found}, but at least {required} is required")]
    Precondition { found: usize, required: usize },
    #[error("degree {degree}: {reason}")]
    SolveFailed { degree: usize, reason: String },
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// How the projection `π` onto the image of `S` is realised.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProjectionSpec {
    /// `S` is diagonal in the monomial basis; `π` keeps the non-resonant monomials.
    Diagonal,
    /// Orthogonal projection for the Belitskii inner product, computed per degree.
    BelitskiiComplement(BelitskiiVariant),
    /// A closed-form solver whose residual lies in a named normal space.
    ClosedForm(String),
}

/// Output of one per-degree solve.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSolution<S: Scalar> {
    /// Homogeneous of the solved shifted degree.
    pub solution: VectorSeries<S>,
    /// Homogeneous of the target degree, in the chosen complement of the image.
    pub residual: VectorSeries<S>,
    pub min_denominator: Option<f64>,
}

/// The data of one cohomological equation.
///
/// Unknowns are tuples with offsets [`offsets`](Self::offsets); targets are
/// `target_len`-tuples with zero offsets. `S` maps shifted degree `k` to
/// ambient target degree `k + order_shift()`.
pub trait CohomologyProblem<S: Scalar> {
    fn nvars(&self) -> usize;
    fn offsets(&self) -> Vec<usize>;
    fn target_len(&self) -> usize;
    fn order_shift(&self) -> usize;
    /// First solved shifted degree is `1 + d_shift`.
    fn d_shift(&self) -> usize {
        0
    }
    fn projection(&self) -> ProjectionSpec;
    /// The linear operator `S`, applied to a polynomial tuple.
    fn linear(&self, f: &VectorSeries<S>, dmax: usize) -> VectorSeries<S>;
    fn solve_degree(&self, k: usize, rhs: &VectorSeries<S>) -> Result<DegreeSolution<S>, EngineError>;
    /// `T(F)` truncated at ambient degree `dmax`.
    fn evaluate(&self, f: &VectorSeries<S>, dmax: usize) -> Result<VectorSeries<S>, EngineError>;
}

/// Per-degree line of a [`SolveReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeRecord {
    pub degree: usize,
    pub rhs_norm: f64,
    pub solution_norm: f64,
    pub residual_norm: f64,
    pub min_denominator: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub records: Vec<DegreeRecord>,
    /// Excluded from serialized output to keep it reproducible.
    pub wall_time: Duration,
}

pub const REPORT_CSV_HEADER: [&str; 5] = ["degree", "rhs_norm", "solution_norm", "residual_norm", "min_denominator"];

impl SolveReport {
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.records
                .iter()
                .map(|r| {
                    json!({
                        "degree": r.degree,
                        "rhs_norm": number(r.rhs_norm),
                        "solution_norm": number(r.solution_norm),
                        "residual_norm": number(r.residual_norm),
                        "min_denominator": r.min_denominator.map(number),
                    })
                })
                .collect(),
        )
    }

    pub fn csv_rows(&self) -> Vec<[String; 5]> {
        self.records
            .iter()
            .map(|r| {
                [
                    r.degree.to_string(),
                    format_f64(r.rhs_norm),
                    format_f64(r.solution_norm),
                    format_f64(r.residual_norm),
                    r.min_denominator.map(format_f64).unwrap_or_default(),
                ]
            })
            .collect()
    }

    pub fn solution_norms(&self) -> Vec<(usize, f64)> {
        self.records.iter().map(|r| (r.degree, r.solution_norm)).collect()
    }
}

/// A float as a JSON number with seventeen significant digits.
pub fn number(v: f64) -> Value {
    if v.is_finite() {
        Value::Number(format_f64(v).parse().expect("formatted float is valid JSON"))
    } else {
        Value::String(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutput<S: Scalar> {
    pub solution: VectorSeries<S>,
    /// `(1 − π) T(F)`, collected over all target degrees.
    pub residual: VectorSeries<S>,
    pub report: SolveReport,
}

/// Solves `F = S⁻¹ π T(F)` for shifted degrees `1 + d_shift ..= d`.
pub fn solve_degreewise<S: Scalar, P: CohomologyProblem<S> + ?Sized>(
    problem: &P,
    d: usize,
) -> Result<SolveOutput<S>, EngineError> {
    let started = Instant::now();
    let n = problem.nvars();
    let offsets = problem.offsets();
    let q = problem.order_shift();
    let first = 1 + problem.d_shift();
    let unknown_trunc = d + offsets.iter().copied().max().unwrap_or(0);
    let mut f = VectorSeries::zero(n, unknown_trunc, offsets.clone());
    let mut residual = VectorSeries::zero(n, q + d, vec![0; problem.target_len()]);

    let t0 = problem.evaluate(&f, q + d.max(first))?;
    if let Some(found) = t0.order() {
        if found < q + first {
            return Err(EngineError::Precondition { found, required: q + first });
        }
    }

    let mut records = Vec::new();
    for k in first..=d {
        let t = problem.evaluate(&f, q + k)?;
        let rhs = t.shifted_part(q + k);
        let step = problem.solve_degree(k, &rhs)?;
        records.push(DegreeRecord {
            degree: k,
            rhs_norm: homogeneous_norm(&rhs),
            solution_norm: step.solution.shifted_norm(k),
            residual_norm: homogeneous_norm(&step.residual),
            min_denominator: step.min_denominator,
        });
        f.add_assign(&step.solution.with_truncation(unknown_trunc));
        residual.add_assign(&step.residual.with_truncation(q + d));
    }
    Ok(SolveOutput { solution: f, residual, report: SolveReport { records, wall_time: started.elapsed() } })
}

/// Max over components of the summed coefficient moduli (the degree norm of a homogeneous tuple).
fn homogeneous_norm<S: Scalar>(v: &VectorSeries<S>) -> f64 {
    v.components().iter().map(|c| c.iter().map(|(_, x)| x.modulus()).sum::<f64>()).fold(0.0, f64::max)
}

/// Coordinates of a graded basis: `(component, monomial)` pairs.
pub type Basis = Vec<(usize, MultiIndex)>;

/// Monomial basis of shifted degree `k` for the given offsets.
pub fn shifted_basis(n: usize, offsets: &[usize], k: usize) -> Basis {
    offsets.iter().enumerate().flat_map(|(j, &m)| monomials(n, m + k).into_iter().map(move |a| (j, a))).collect()
}

pub fn basis_weights<S: Scalar>(basis: &Basis, variant: BelitskiiVariant) -> Vec<S> {
    basis.iter().map(|(_, a)| monomial_weight(a, variant)).collect()
}

pub fn to_coordinates<S: Scalar>(v: &VectorSeries<S>, basis: &Basis) -> Vec<S> {
    basis.iter().map(|(j, a)| v.component(*j).coeff(a)).collect()
}

pub fn from_coordinates<S: Scalar>(
    coords: &[S],
    basis: &Basis,
    n: usize,
    d: usize,
    offsets: Vec<usize>,
) -> VectorSeries<S> {
    let mut v = VectorSeries::zero(n, d, offsets);
    for ((j, a), c) in basis.iter().zip(coords) {
        v.component_mut(*j).add_term(a.clone(), c.clone());
    }
    v
}

/// Matrix of `S` from shifted degree `k` to target degree `k + q`.
pub fn operator_matrix<S: Scalar, P: CohomologyProblem<S> + ?Sized>(
    problem: &P,
    k: usize,
) -> (DenseMatrix<S>, Basis, Basis) {
    let n = problem.nvars();
    let offsets = problem.offsets();
    let q = problem.order_shift();
    let source = shifted_basis(n, &offsets, k);
    let target = shifted_basis(n, &vec![0; problem.target_len()], k + q);
    let dmax = k + q + offsets.iter().copied().max().unwrap_or(0);
    let columns: Vec<Vec<S>> = source
        .iter()
        .map(|(j, a)| {
            let mut e = VectorSeries::zero(n, dmax, offsets.clone());
            e.component_mut(*j).add_term(a.clone(), S::one());
            to_coordinates(&problem.linear(&e, dmax), &target)
        })
        .collect();
    (DenseMatrix::from_columns(target.len(), &columns), source, target)
}

/// Generic per-degree solve: Belitskii-orthogonal split of the right-hand side.
pub fn solve_with_complement<S: Scalar, P: CohomologyProblem<S> + ?Sized>(
    problem: &P,
    k: usize,
    rhs: &VectorSeries<S>,
    variant: BelitskiiVariant,
    tol: f64,
) -> DegreeSolution<S> {
    let n = problem.nvars();
    let offsets = problem.offsets();
    let q = problem.order_shift();
    let (matrix, source, target) = operator_matrix(problem, k);
    let b = to_coordinates(rhs, &target);
    let split = linear_solve_with_complement(
        &matrix,
        &b,
        &basis_weights(&source, variant),
        &basis_weights(&target, variant),
        tol,
    );
    let top = k + offsets.iter().copied().max().unwrap_or(0);
    DegreeSolution {
        solution: from_coordinates(&split.solution, &source, n, top, offsets),
        residual: from_coordinates(&split.residual, &target, n, k + q, vec![0; problem.target_len()]),
        min_denominator: None,
    }
}

/// Orthogonal complement (for `variant`) of the image of `S` in target degree `k + q`.
pub fn complement_basis<S: Scalar, P: CohomologyProblem<S> + ?Sized>(
    problem: &P,
    k: usize,
    variant: BelitskiiVariant,
    tol: f64,
) -> Vec<VectorSeries<S>> {
    let (matrix, _, target) = operator_matrix(problem, k);
    let weights: Vec<S> = basis_weights(&target, variant);
    // v ⟂ im S  ⇔  S^H W v = 0
    let mut adjoint = DenseMatrix::zeros(matrix.cols(), matrix.rows());
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            let mut v = matrix.get(i, j).conj();
            v *= &weights[i];
            adjoint.set(j, i, v);
        }
    }
    let n = problem.nvars();
    let q = problem.order_shift();
    adjoint
        .nullspace(tol)
        .iter()
        .map(|c| from_coordinates(c, &target, n, k + q, vec![0; problem.target_len()]))
        .collect()
}

/// Helper for problems: `T(F) = S(F) − (action(F) − base)` with the action supplied as a closure result.
pub fn defect_map<S: Scalar>(
    linear: &VectorSeries<S>,
    acted_minus_base: &VectorSeries<S>,
    dmax: usize,
) -> VectorSeries<S> {
    linear.with_truncation(dmax).sub(&acted_minus_base.with_truncation(dmax))
}

/// The tuple `(x_1, …, x_n)` truncated at `d`.
pub fn identity_tuple<S: Scalar>(n: usize, d: usize) -> Vec<GradedSeries<S>> {
    (0..n).map(|j| GradedSeries::variable(n, d, j)).collect()
}
