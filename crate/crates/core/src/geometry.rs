//! Normal forms of frames, Riemannian metrics and conformal structures near a point.
//!
//! An object is stored as `I + M(x)` with `M(0) = 0`. A gauge element is a
//! diffeomorphism `id + φ`, a skew field `Q` and (conformal kind only) a
//! factor `h`, acting by `(1 + h)·exp Q·(I + Dφ)⁻¹·(I + M∘(id + φ))`.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::{
    complement_basis, number, solve_degreewise, solve_with_complement, CohomologyProblem, DegreeSolution, DenseMatrix,
    EngineError, ProjectionSpec, SolveReport,
};
use crate::graded::{
    matrix_to_json, monomial_weight, monomials, series_to_json, BelitskiiVariant, GradedError, GradedSeries,
    MatrixSeries, MultiIndex, Rational, RealScalar, Scalar, VectorSeries, DEFAULT_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unsupported kind `{0}` (expected frame, metric or conformal)")]
    Kind(String),
    #[error("matrix size {size} does not match {nvars} variables")]
    Shape { size: usize, nvars: usize },
    #[error("M(0) must vanish")]
    ConstantTerm,
    #[error("gauge element does not match kind {0}")]
    GaugeMismatch(GeometryKind),
    #[error("rotation part is not skew-symmetric")]
    NotSkew,
    #[error("gauge part `{0}` has too low an order")]
    GaugeOrder(&'static str),
    #[error("closed-form conformal solve needs n ≥ 3 (got {0})")]
    ConformalDimension(usize),
    #[error("closed-form solve needs degree ≥ {min} (got {degree})")]
    LowDegree { degree: usize, min: usize },
    #[error("L_{i} is singular for n = {n}")]
    Singular { n: usize, i: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graded(#[from] GradedError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryKind {
    Frame,
    Metric,
    Conformal,
}

impl GeometryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeometryKind::Frame => "frame",
            GeometryKind::Metric => "metric",
            GeometryKind::Conformal => "conformal",
        }
    }

    fn has_rotation(self) -> bool {
        self != GeometryKind::Frame
    }

    fn has_factor(self) -> bool {
        self == GeometryKind::Conformal
    }
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeometryKind {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frame" => Ok(GeometryKind::Frame),
            "metric" => Ok(GeometryKind::Metric),
            "conformal" => Ok(GeometryKind::Conformal),
            other => Err(GeometryError::Kind(other.to_string())),
        }
    }
}

/// `I + M(x)` of the given kind.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryObject<S: Scalar> {
    pub kind: GeometryKind,
    pub matrix: MatrixSeries<S>,
    pub d: usize,
    pub tol: f64,
}

impl<S: Scalar> GeometryObject<S> {
    pub fn new(kind: GeometryKind, matrix: MatrixSeries<S>, d: usize) -> Result<Self, GeometryError> {
        if matrix.size() != matrix.nvars() {
            return Err(GeometryError::Shape { size: matrix.size(), nvars: matrix.nvars() });
        }
        let zero = MultiIndex::zero(matrix.nvars());
        if matrix.entries().iter().any(|e| !e.coeff(&zero).is_zero()) {
            return Err(GeometryError::ConstantTerm);
        }
        Ok(GeometryObject { kind, matrix: matrix.with_truncation(d), d, tol: DEFAULT_TOL })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.matrix.size()
    }
}

/// `(id + φ, Q, h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeElement<S: Scalar> {
    pub phi: Vec<GradedSeries<S>>,
    pub rotation: MatrixSeries<S>,
    pub factor: GradedSeries<S>,
}

impl<S: Scalar> GaugeElement<S> {
    pub fn identity(n: usize, d: usize) -> Self {
        GaugeElement {
            phi: vec![GradedSeries::zero(n, d); n],
            rotation: MatrixSeries::zero(n, n, d),
            factor: GradedSeries::zero(n, d),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.phi.iter().all(GradedSeries::is_zero) && self.rotation.is_zero() && self.factor.is_zero()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "phi": self.phi.iter().map(series_to_json).collect::<Vec<_>>(),
            "rotation": matrix_to_json(&self.rotation),
            "factor": series_to_json(&self.factor),
        })
    }
}

fn skew_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

/// Offsets of the unknown tuple `(φ_1..φ_n, Q_ab (a<b), h)` for a kind.
pub fn unknown_offsets(kind: GeometryKind, n: usize) -> Vec<usize> {
    let mut offsets = vec![1; n];
    if kind.has_rotation() {
        offsets.extend(std::iter::repeat_n(0, skew_pairs(n).len()));
    }
    if kind.has_factor() {
        offsets.push(0);
    }
    offsets
}

fn split_unknowns<S: Scalar>(v: &VectorSeries<S>, kind: GeometryKind, n: usize, d: usize) -> GaugeElement<S> {
    let comps = v.components();
    let mut gauge = GaugeElement::identity(n, d);
    for (j, phi) in gauge.phi.iter_mut().enumerate() {
        *phi = comps[j].with_truncation(d);
    }
    let mut next = n;
    if kind.has_rotation() {
        for (a, b) in skew_pairs(n) {
            let e = comps[next].with_truncation(d);
            gauge.rotation.set(b, a, e.neg());
            gauge.rotation.set(a, b, e);
            next += 1;
        }
    }
    if kind.has_factor() {
        gauge.factor = comps[next].with_truncation(d);
    }
    gauge
}

fn join_gauge<S: Scalar>(g: &GaugeElement<S>, kind: GeometryKind, d: usize) -> VectorSeries<S> {
    let n = g.phi.len();
    let mut comps: Vec<GradedSeries<S>> = g.phi.iter().map(|p| p.with_truncation(d)).collect();
    if kind.has_rotation() {
        for (a, b) in skew_pairs(n) {
            comps.push(g.rotation.get(a, b).with_truncation(d));
        }
    }
    if kind.has_factor() {
        comps.push(g.factor.with_truncation(d));
    }
    VectorSeries::new(comps, unknown_offsets(kind, n)).expect("consistent layout")
}

fn negligible<S: Scalar>(f: &GradedSeries<S>, tol: f64) -> bool {
    f.iter().all(|(_, c)| c.is_negligible(tol))
}

/// `(1 + h)·exp Q·(I + Dφ)⁻¹·(I + M∘(id + φ)) − I`, truncated at `d`.
pub fn apply_gauge<S: Scalar>(
    m: &MatrixSeries<S>,
    gauge: &GaugeElement<S>,
    kind: GeometryKind,
    d: usize,
) -> Result<MatrixSeries<S>, GeometryError> {
    let n = m.size();
    let nvars = m.nvars();
    if gauge.phi.len() != n || gauge.rotation.size() != n {
        return Err(GeometryError::GaugeMismatch(kind));
    }
    if (!kind.has_rotation() && !gauge.rotation.is_zero()) || (!kind.has_factor() && !gauge.factor.is_zero()) {
        return Err(GeometryError::GaugeMismatch(kind));
    }
    let skew = gauge.rotation.add(&gauge.rotation.transpose());
    if !skew.entries().iter().all(|e| negligible(e, 0.0)) {
        return Err(GeometryError::NotSkew);
    }
    if gauge.phi.iter().any(|p| p.order().is_some_and(|o| o < 2)) {
        return Err(GeometryError::GaugeOrder("phi"));
    }
    if gauge.rotation.order().is_some_and(|o| o < 1) {
        return Err(GeometryError::GaugeOrder("rotation"));
    }
    if gauge.factor.order().is_some_and(|o| o < 1) {
        return Err(GeometryError::GaugeOrder("factor"));
    }
    let phi: Vec<GradedSeries<S>> = gauge.phi.iter().map(|p| p.with_truncation(d)).collect();
    let phi_wide: Vec<GradedSeries<S>> = gauge.phi.iter().map(|p| p.with_truncation(d + 1)).collect();
    let identity = MatrixSeries::identity(n, nvars, d);
    let unipotent = identity.add(&MatrixSeries::jacobian(&phi_wide).with_truncation(d));
    let moved = identity.add(&m.with_truncation(d).compose(&phi)?);
    let mut pulled = MatrixSeries::zero(n, nvars, d);
    for c in 0..n {
        let column: Vec<GradedSeries<S>> = (0..n).map(|r| moved.get(r, c).clone()).collect();
        for (r, y) in unipotent.solve_unipotent(&column, d)?.into_iter().enumerate() {
            pulled.set(r, c, y);
        }
    }
    let mut result = gauge.rotation.with_truncation(d).exp(d)?.mul(&pulled, d);
    if !gauge.factor.is_zero() {
        let scale = GradedSeries::constant(nvars, d, S::one()).add(&gauge.factor.with_truncation(d));
        result = result.scale_series(&scale, d);
    }
    Ok(result.sub(&identity))
}

/// `A·x`, one degree up.
fn contract_position<S: Scalar>(a: &MatrixSeries<S>) -> Vec<GradedSeries<S>> {
    a.mul_position()
}

fn dot_position<S: Scalar>(v: &[GradedSeries<S>], d: usize) -> GradedSeries<S> {
    let mut acc = GradedSeries::zero(v[0].nvars(), d);
    for (j, vj) in v.iter().enumerate() {
        acc.add_assign(&vj.with_truncation(d).mul_var(j));
    }
    acc
}

fn gradient_poly<S: Scalar>(f: &GradedSeries<S>) -> Vec<GradedSeries<S>> {
    (0..f.nvars()).map(|j| f.partial(j).with_truncation(f.truncation())).collect()
}

fn radius_sq<S: Scalar>(n: usize, d: usize) -> GradedSeries<S> {
    GradedSeries::from_terms(n, d, (0..n).map(|j| (MultiIndex::unit(n, j).add(&MultiIndex::unit(n, j)), S::one())))
}

fn ratio<S: Scalar>(p: i64, q: i64) -> S {
    S::from_i64(p) / S::from_i64(q)
}

/// `φ = A·x/(i+1)`, so that `A − Dφ` annihilates `x`.
pub fn frame_solve<S: Scalar>(a: &MatrixSeries<S>, i: usize) -> Vec<GradedSeries<S>> {
    let a = a.homogeneous(i).with_truncation(i);
    let k = ratio::<S>(1, i as i64 + 1);
    contract_position(&a).iter().map(|c| c.scale(&k)).collect()
}

/// The symmetric-part solve shared by the metric and conformal cases.
fn symmetric_part_field<S: Scalar>(a: &MatrixSeries<S>, i: usize) -> Vec<GradedSeries<S>> {
    let f = contract_position(&a.add(&a.transpose()));
    let g = gradient_poly(&dot_position(&f, i + 2));
    let c1 = ratio::<S>(1, i as i64);
    let c2 = ratio::<S>(1, 2 * (i * (i + 1)) as i64);
    f.iter()
        .zip(&g)
        .map(|(fj, gj)| fj.scale(&c1).sub(&gj.with_truncation(i + 1).scale(&c2)).with_truncation(i + 1))
        .collect()
}

fn rotation_for<S: Scalar>(a: &MatrixSeries<S>, phi: &[GradedSeries<S>], i: usize) -> MatrixSeries<S> {
    let dphi = MatrixSeries::jacobian(phi).with_truncation(i);
    let half = ratio::<S>(1, 2);
    dphi.sub(&dphi.transpose()).sub(a).add(&a.transpose()).scale(&half)
}

/// `(φ, Q)` with `A − Dφ + Q` symmetric and annihilating `x`.
pub fn metric_solve<S: Scalar>(
    a: &MatrixSeries<S>,
    i: usize,
) -> Result<(Vec<GradedSeries<S>>, MatrixSeries<S>), GeometryError> {
    if i < 1 {
        return Err(GeometryError::LowDegree { degree: i, min: 1 });
    }
    let a = a.homogeneous(i).with_truncation(i);
    let phi = symmetric_part_field(&a, i);
    let q = rotation_for(&a, &phi, i);
    Ok((phi, q))
}

/// Eigenvalue of `L_i` on harmonic polynomials: `(n−2)(i−1)/(i+1)`.
pub fn harmonic_eigenvalue(n: usize, i: usize) -> f64 {
    (n as f64 - 2.0) * (i as f64 - 1.0) / (i as f64 + 1.0)
}

/// `L_i h = |x|²Δh/(i(i+1)) + (n−2)(i−1)/(i+1)·h` on homogeneous `h` of degree `i ≥ 1`.
pub fn l_apply<S: Scalar>(h: &GradedSeries<S>, n: usize, i: usize) -> GradedSeries<S> {
    let h = h.homogeneous(i).with_truncation(i);
    let shift = ratio::<S>((n as i64 - 2) * (i as i64 - 1), i as i64 + 1);
    let mut out = h.scale(&shift);
    if i >= 2 {
        let lap = h.laplacian().with_truncation(i);
        let term = radius_sq::<S>(h.nvars(), i).mul_truncated(&lap, i).scale(&ratio(1, (i * (i + 1)) as i64));
        out.add_assign(&term);
    }
    out
}

/// Matrix of `L_i` on the degree-`i` monomial basis (columns are images).
pub fn l_matrix<S: Scalar>(n: usize, i: usize) -> (DenseMatrix<S>, Vec<MultiIndex>) {
    let basis = monomials(n, i);
    let columns: Vec<Vec<S>> = basis
        .iter()
        .map(|a| {
            let img = l_apply(&GradedSeries::monomial(n, i, a.clone(), S::one()), n, i);
            basis.iter().map(|b| img.coeff(b)).collect()
        })
        .collect();
    (DenseMatrix::from_columns(basis.len(), &columns), basis)
}

/// Solves `L_i h = z` by a dense solve.
pub fn l_solve<S: Scalar>(z: &GradedSeries<S>, n: usize, i: usize, tol: f64) -> Result<GradedSeries<S>, GeometryError> {
    let (matrix, basis) = l_matrix::<S>(n, i);
    let rhs: Vec<S> = basis.iter().map(|b| z.coeff(b)).collect();
    let sol = matrix.solve(&rhs, tol).ok_or(GeometryError::Singular { n, i })?;
    Ok(GradedSeries::from_terms(n, i, basis.into_iter().zip(sol)))
}

/// Smallest eigenvalue of `L_i`, self-adjoint for the Belitskii product.
///
/// `L_i` preserves the parity of every exponent, so the spectrum is computed
/// block by block over parity classes.
pub fn l_min_eigenvalue(n: usize, i: usize) -> f64 {
    let (matrix, basis) = l_matrix::<f64>(n, i);
    let w: Vec<f64> =
        basis.iter().map(|a| monomial_weight::<Rational>(a, BelitskiiVariant::Classic).to_f64().sqrt()).collect();
    let mut classes: std::collections::BTreeMap<Vec<u16>, Vec<usize>> = std::collections::BTreeMap::new();
    for (k, a) in basis.iter().enumerate() {
        classes.entry(a.exps().iter().map(|e| e % 2).collect()).or_default().push(k);
    }
    classes
        .values()
        .map(|block| {
            let dim = block.len();
            let sym = DMatrix::from_fn(dim, dim, |r, c| {
                let (br, bc) = (block[r], block[c]);
                *matrix.get(br, bc) * w[br] / w[bc]
            });
            let sym = (&sym + sym.transpose()) * 0.5;
            SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `(φ, Q, h)` with `A − Dφ + Q + hI` symmetric, traceless and annihilating `x`.
#[allow(clippy::type_complexity)]
pub fn conformal_solve<S: Scalar>(
    a: &MatrixSeries<S>,
    i: usize,
    tol: f64,
) -> Result<(Vec<GradedSeries<S>>, MatrixSeries<S>, GradedSeries<S>), GeometryError> {
    let n = a.size();
    if n < 3 {
        return Err(GeometryError::ConformalDimension(n));
    }
    if i < 2 {
        return Err(GeometryError::LowDegree { degree: i, min: 2 });
    }
    let a = a.homogeneous(i).with_truncation(i);
    let s = symmetric_part_field(&a, i);
    let mut div = GradedSeries::zero(n, i);
    for (j, sj) in s.iter().enumerate() {
        div.add_assign(&sj.partial(j).with_truncation(i));
    }
    let z = div.sub(&a.trace());
    let h = l_solve(&z, n, i, tol)?;
    let r2 = radius_sq::<S>(n, i + 1);
    let c1 = ratio::<S>(1, (i * (i + 1)) as i64);
    let c2 = ratio::<S>(2, i as i64 + 1);
    let grad_h = gradient_poly(&h.with_truncation(i + 1));
    let phi: Vec<GradedSeries<S>> = s
        .iter()
        .enumerate()
        .map(|(j, sj)| {
            let bend = r2.mul_truncated(&grad_h[j], i + 1).scale(&c1);
            let radial = h.with_truncation(i + 1).mul_var(j).scale(&c2);
            sj.sub(&bend).add(&radial)
        })
        .collect();
    let q = rotation_for(&a, &phi, i);
    Ok((phi, q, h))
}

/// Membership of one homogeneous degree in the kind's normal space.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeMembership {
    pub degree: usize,
    pub annihilates_position: bool,
    pub symmetric: Option<bool>,
    pub traceless: Option<bool>,
}

impl DegreeMembership {
    pub fn passed(&self) -> bool {
        self.annihilates_position && self.symmetric.unwrap_or(true) && self.traceless.unwrap_or(true)
    }
}

pub fn membership<S: Scalar>(m: &MatrixSeries<S>, kind: GeometryKind, degree: usize, tol: f64) -> DegreeMembership {
    let part = m.homogeneous(degree).with_truncation(degree);
    let annihilates = contract_position(&part).iter().all(|c| negligible(c, tol));
    let symmetric =
        kind.has_rotation().then(|| part.sub(&part.transpose()).entries().iter().all(|e| negligible(e, tol)));
    let traceless = kind.has_factor().then(|| negligible(&part.trace(), tol));
    DegreeMembership { degree, annihilates_position: annihilates, symmetric, traceless }
}

/// Norms of one closed-form solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverNorms {
    pub degree: usize,
    pub input: f64,
    pub phi: f64,
    pub rotation: f64,
    pub factor: f64,
}

impl SolverNorms {
    pub const CSV_HEADER: [&'static str; 5] = ["degree", "input_norm", "phi_ratio", "rotation_ratio", "factor_ratio"];

    /// `(i·‖φ‖/‖A‖, ‖Q‖/‖A‖, ‖h‖/‖A‖)`.
    pub fn ratios(&self) -> (f64, f64, f64) {
        if self.input == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        (self.degree as f64 * self.phi / self.input, self.rotation / self.input, self.factor / self.input)
    }
}

fn measure<S: Scalar>(a: &MatrixSeries<S>, g: &GaugeElement<S>, i: usize) -> SolverNorms {
    let phi = g.phi.iter().map(|p| p.degree_norm(i + 1)).fold(0.0, f64::max);
    SolverNorms {
        degree: i,
        input: a.degree_norm(i),
        phi,
        rotation: g.rotation.degree_norm(i),
        factor: g.factor.degree_norm(i),
    }
}

/// Closed-form solve of degree `i` when one applies; `None` selects the generic route.
pub fn closed_form_solve<S: Scalar>(
    a: &MatrixSeries<S>,
    kind: GeometryKind,
    i: usize,
    tol: f64,
) -> Result<Option<GaugeElement<S>>, GeometryError> {
    let n = a.size();
    let mut g = GaugeElement::identity(n, i + 1);
    match kind {
        GeometryKind::Frame if i >= 1 => g.phi = frame_solve(a, i),
        GeometryKind::Metric if i >= 2 => {
            let (phi, q) = metric_solve(a, i)?;
            g.phi = phi;
            g.rotation = q.with_truncation(i + 1);
        }
        GeometryKind::Conformal if i >= 2 && n >= 3 => {
            let (phi, q, h) = conformal_solve(a, i, tol)?;
            g.phi = phi;
            g.rotation = q.with_truncation(i + 1);
            g.factor = h.with_truncation(i + 1);
        }
        _ => return Ok(None),
    }
    Ok(Some(g))
}

/// The gauge equation `T(g) = S(g) − apply_gauge(M, g)` with `S(φ, Q, h) = −Dφ + Q + hI`.
pub struct GeometryEquation<'a, S: Scalar> {
    pub object: &'a GeometryObject<S>,
    pub norms: RefCell<Vec<SolverNorms>>,
}

impl<'a, S: Scalar> GeometryEquation<'a, S> {
    pub fn new(object: &'a GeometryObject<S>) -> Self {
        GeometryEquation { object, norms: RefCell::new(Vec::new()) }
    }
}

/// `−Dφ + Q + hI`.
pub fn gauge_linear<S: Scalar>(g: &GaugeElement<S>, nvars: usize, dmax: usize) -> MatrixSeries<S> {
    let n = g.phi.len();
    let phi: Vec<GradedSeries<S>> = g.phi.iter().map(|p| p.with_truncation(dmax + 1)).collect();
    let mut out = g.rotation.with_truncation(dmax).sub(&MatrixSeries::jacobian(&phi).with_truncation(dmax));
    if !g.factor.is_zero() {
        let h = g.factor.with_truncation(dmax);
        for k in 0..n {
            let e = out.get(k, k).add(&h);
            out.set(k, k, e);
        }
    }
    debug_assert_eq!(out.nvars(), nvars);
    out
}

fn matrix_as_vector<S: Scalar>(m: &MatrixSeries<S>) -> VectorSeries<S> {
    VectorSeries::plain(m.entries().to_vec())
}

fn vector_as_matrix<S: Scalar>(v: &VectorSeries<S>, n: usize) -> MatrixSeries<S> {
    MatrixSeries::from_entries(n, v.components().to_vec()).expect("n² components")
}

impl<S: Scalar> CohomologyProblem<S> for GeometryEquation<'_, S> {
    fn nvars(&self) -> usize {
        self.object.n()
    }
    fn offsets(&self) -> Vec<usize> {
        unknown_offsets(self.object.kind, self.object.n())
    }
    fn target_len(&self) -> usize {
        self.object.n() * self.object.n()
    }
    fn order_shift(&self) -> usize {
        0
    }
    fn projection(&self) -> ProjectionSpec {
        ProjectionSpec::ClosedForm(self.object.kind.as_str().to_string())
    }
    fn linear(&self, f: &VectorSeries<S>, dmax: usize) -> VectorSeries<S> {
        let n = self.object.n();
        let g = split_unknowns(f, self.object.kind, n, dmax + 1);
        matrix_as_vector(&gauge_linear(&g, n, dmax))
    }
    fn solve_degree(&self, k: usize, rhs: &VectorSeries<S>) -> Result<DegreeSolution<S>, EngineError> {
        let n = self.object.n();
        let a = vector_as_matrix(rhs, n).with_truncation(k).scale(&(-S::one()));
        let closed = closed_form_solve(&a, self.object.kind, k, self.object.tol)
            .map_err(|e| EngineError::SolveFailed { degree: k, reason: e.to_string() })?;
        let Some(g) = closed else {
            return Ok(solve_with_complement(self, k, rhs, BelitskiiVariant::Classic, self.object.tol));
        };
        self.norms.borrow_mut().push(measure(&a, &g, k));
        let solution = join_gauge(&g, self.object.kind, k + 1);
        let residual = rhs.with_truncation(k).sub(&self.linear(&solution, k));
        Ok(DegreeSolution { solution, residual, min_denominator: None })
    }
    fn evaluate(&self, f: &VectorSeries<S>, dmax: usize) -> Result<VectorSeries<S>, EngineError> {
        let n = self.object.n();
        let g = split_unknowns(f, self.object.kind, n, dmax + 1);
        let acted = apply_gauge(&self.object.matrix, &g, self.object.kind, dmax)
            .map_err(|e| EngineError::SolveFailed { degree: dmax, reason: e.to_string() })?;
        Ok(matrix_as_vector(&gauge_linear(&g, n, dmax).sub(&acted)))
    }
}

/// Basis of the normal space in degree `i`: the Belitskii complement of the image of `S`.
pub fn normal_space_basis<S: Scalar>(kind: GeometryKind, n: usize, i: usize, tol: f64) -> Vec<MatrixSeries<S>> {
    let object = GeometryObject { kind, matrix: MatrixSeries::zero(n, n, i), d: i, tol };
    let eq = GeometryEquation::new(&object);
    complement_basis(&eq, i, BelitskiiVariant::Classic, tol).iter().map(|v| vector_as_matrix(v, n)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryResult<S: Scalar> {
    pub kind: GeometryKind,
    pub gauge: GaugeElement<S>,
    /// `M` of the normalized object `I + M`.
    pub normal_form: MatrixSeries<S>,
    pub membership: Vec<DegreeMembership>,
    pub solver_norms: Vec<SolverNorms>,
    pub report: SolveReport,
}

impl<S: Scalar> GeometryResult<S> {
    pub fn passed(&self) -> bool {
        self.membership.iter().all(DegreeMembership::passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.as_str(),
            "mode": S::MODE.as_str(),
            "certificate": {
                "passed": self.passed(),
                "degrees": self.membership.iter().map(|m| json!({
                    "degree": m.degree,
                    "annihilates_position": m.annihilates_position,
                    "symmetric": m.symmetric,
                    "traceless": m.traceless,
                })).collect::<Vec<_>>(),
            },
            "identity_gauge": self.gauge.is_identity(),
            "gauge": self.gauge.to_json(),
            "normal_form": matrix_to_json(&self.normal_form),
            "solver_norms": self.solver_norms.iter().map(|s| {
                let (p, q, h) = s.ratios();
                json!({"degree": s.degree, "input_norm": number(s.input), "phi_ratio": number(p),
                       "rotation_ratio": number(q), "factor_ratio": number(h)})
            }).collect::<Vec<_>>(),
            "degrees": self.report.to_json(),
        })
    }
}

/// Normalizes degrees `1..=d`; the result is checked against the kind's normal space.
pub fn geometry_normalize<S: Scalar>(object: &GeometryObject<S>) -> Result<GeometryResult<S>, GeometryError> {
    let n = object.n();
    let d = object.d;
    let eq = GeometryEquation::new(object);
    let out = solve_degreewise(&eq, d)?;
    let gauge = split_unknowns(&out.solution, object.kind, n, d + 1);
    let normal_form = apply_gauge(&object.matrix, &gauge, object.kind, d)?;
    let membership = (1..=d).map(|i| membership(&normal_form, object.kind, i, object.tol)).collect();
    Ok(GeometryResult {
        kind: object.kind,
        gauge,
        normal_form,
        membership,
        solver_norms: eq.norms.into_inner(),
        report: out.report,
    })
}
