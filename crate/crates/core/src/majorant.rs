//! Scalar majorant series for formal solutions with big denominators.
//!
//! One-variable series are plain coefficient vectors `a[i]` for `z^i`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::number;
use crate::graded::{derivative_constant, GradedSeries, HatSeries, Scalar, VectorSeries};
use crate::vf::{pushforward, PdResult, VectorFieldProblem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MajorantError {
    #[error("k = {k} must be at least q + 1 = {}", q + 1)]
    SmallK { k: usize, q: usize },
    #[error("parameter {0} must be a finite nonnegative number")]
    Parameter(&'static str),
    #[error("expected {r} derivative orders, found {found}")]
    Orders { r: usize, found: usize },
    #[error("coefficient iteration did not stabilize after {0} rounds")]
    NotStabilized(usize),
    #[error("{0}")]
    Input(String),
}

/// Inputs of the majorant system; `k` defaults to `q + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantParams {
    pub r: usize,
    pub n: usize,
    pub m: Vec<usize>,
    pub q: usize,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
}

impl MajorantParams {
    pub fn resolved_k(&self) -> usize {
        self.k.unwrap_or(self.q + 1)
    }

    fn validate(&self) -> Result<(), MajorantError> {
        if self.m.len() != self.r {
            return Err(MajorantError::Orders { r: self.r, found: self.m.len() });
        }
        let k = self.resolved_k();
        if k < self.q + 1 {
            return Err(MajorantError::SmallK { k, q: self.q });
        }
        for (name, v) in [("M", self.big_m), ("c", self.c), ("C", self.big_c)] {
            if !v.is_finite() || v < 0.0 {
                return Err(MajorantError::Parameter(name));
            }
        }
        if self.n == 0 {
            return Err(MajorantError::Input("n must be positive".into()));
        }
        Ok(())
    }
}

/// The solved majorant system.
#[derive(Clone, Debug, PartialEq)]
pub struct MajorantModel {
    pub params: MajorantParams,
    pub k: usize,
    /// `p[j][l] = max(0, l + q + 1 − m_j)`.
    pub p: Vec<Vec<usize>>,
    /// `c_l` for `l ≤ max m_j`.
    pub c_l: Vec<f64>,
    /// `f[j][i]`, `i = 0..=N`, with `f[j][0] = 0`.
    pub f: Vec<Vec<f64>>,
    pub iterations: usize,
}

pub fn p_table(m: &[usize], q: usize) -> Vec<Vec<usize>> {
    m.iter().map(|&mj| (0..=mj).map(|l| (l + q + 1).saturating_sub(mj)).collect()).collect()
}

/// `(p+q+k+m)!/(p+q+k)!`: coefficient of `z^{q+k+p}` in `d^m(z^{q+m+k} z^p)/dz^m`.
pub fn lhs_factor(p: usize, q: usize, k: usize, m: usize) -> f64 {
    ((p + q + k + 1)..=(p + q + k + m)).map(|v| v as f64).product()
}

fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `1/(1 − u)` for `u(0) = 0`.
fn geometric(u: &[f64], len: usize) -> Vec<f64> {
    let mut g = vec![0.0; len];
    g[0] = 1.0;
    for i in 1..len {
        g[i] = (1..=i).map(|j| u.get(j).copied().unwrap_or(0.0) * g[i - j]).sum();
    }
    g
}

fn monomial(coef: f64, power: usize, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    if power < len {
        v[power] = coef;
    }
    v
}

/// `d^l/dz^l (z^s f)` truncated to `len` coefficients.
fn shifted_derivative(f: &[f64], s: usize, l: usize, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &a) in f.iter().enumerate() {
        let e = i + s;
        if e < l || e - l >= len {
            continue;
        }
        let falling: f64 = ((e - l + 1)..=e).map(|v| v as f64).product();
        out[e - l] += a * falling;
    }
    out
}

impl MajorantModel {
    /// `C·G(z, d^l(z^{m_j+k} f_j)/dz^l)` with `len` coefficients.
    pub fn rhs(&self, f: &[Vec<f64>], len: usize) -> Vec<f64> {
        let pr = &self.params;
        let n = pr.n as f64;
        let k = self.k;
        let mut lin = monomial(n.powi((k + pr.q + 1) as i32), k + pr.q + 1, len);
        let mut sum = vec![0.0; len];
        for (j, fj) in f.iter().enumerate() {
            for l in 0..=pr.m[j] {
                let z = shifted_derivative(fj, pr.m[j] + k, l, len);
                let pw = self.p[j][l];
                let factor = monomial(n.powi(pw as i32) * self.c_l[l], pw, len);
                let term = mul(&factor, &z, len);
                for i in 0..len {
                    lin[i] += term[i];
                    sum[i] += self.c_l[l] * z[i];
                }
            }
        }
        let first = mul(&lin, &geometric(&monomial(pr.c * n, 1, len), len), len);
        let mut u = sum.iter().map(|v| pr.c * v).collect::<Vec<_>>();
        if len > 1 {
            u[1] += pr.c * n;
        }
        let second = mul(&mul(&sum, &sum, len), &geometric(&u, len), len);
        (0..len).map(|i| pr.big_c * pr.big_m * (first[i] + second[i])).collect()
    }

    /// Number of computed terms `N`.
    pub fn terms(&self) -> usize {
        self.f.first().map_or(0, |f| f.len().saturating_sub(1))
    }

    /// `d^{m_j}(z^{q+m_j+k} f_j)/dz^{m_j}`.
    pub fn lhs(&self, j: usize, len: usize) -> Vec<f64> {
        let pr = &self.params;
        shifted_derivative(&self.f[j], pr.q + pr.m[j] + self.k, pr.m[j], len)
    }

    /// Ratio-test interval for the radius of convergence, from the last ten terms.
    pub fn radius_interval(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for fj in &self.f {
            let end = fj.len();
            let start = end.saturating_sub(10).max(1);
            if end < start + 2 {
                return None;
            }
            for i in start..end - 1 {
                if fj[i] <= 0.0 || fj[i + 1] <= 0.0 {
                    return None;
                }
                let ratio = fj[i] / fj[i + 1];
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        (lo.is_finite() && lo > 0.0).then_some((lo, hi))
    }

    pub fn to_json(&self) -> Value {
        let pr = &self.params;
        json!({
            "r": pr.r,
            "n": pr.n,
            "m": pr.m,
            "q": pr.q,
            "k": self.k,
            "M": number(pr.big_m),
            "c": number(pr.c),
            "C": number(pr.big_c),
            "p": self.p,
            "c_l": self.c_l.iter().map(|v| number(*v)).collect::<Vec<_>>(),
            "f": self.f.iter().map(|fj| fj.iter().map(|v| number(*v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "iterations": self.iterations,
            "radius": self.radius_interval().map(|(a, b)| json!([number(a), number(b)])),
        })
    }
}

/// Solves the majorant system for `N = terms` coefficients of each `f_j`.
///
/// Iterates `f ↦ (C·G)_{q+k+p} / lhs_factor(p)` from `f = 0` until the
/// coefficients repeat bit for bit.
pub fn majorant_build(params: &MajorantParams, terms: usize) -> Result<MajorantModel, MajorantError> {
    params.validate()?;
    let k = params.resolved_k();
    let mmax = params.m.iter().copied().max().unwrap_or(0);
    let mut model = MajorantModel {
        params: MajorantParams { k: Some(k), ..params.clone() },
        k,
        p: p_table(&params.m, params.q),
        c_l: (0..=mmax).map(|l| derivative_constant(params.n, l)).collect(),
        f: vec![vec![0.0; terms + 1]; params.r],
        iterations: 0,
    };
    let len = params.q + k + terms + 1;
    let limit = terms + 3;
    for round in 1..=limit {
        let g = model.rhs(&model.f, len);
        let next: Vec<Vec<f64>> = (0..params.r)
            .map(|j| {
                let mut fj = vec![0.0; terms + 1];
                for (p, slot) in fj.iter_mut().enumerate().skip(1) {
                    *slot = g[params.q + k + p] / lhs_factor(p, params.q, k, params.m[j]);
                }
                fj
            })
            .collect();
        let stable = next == model.f;
        model.f = next;
        model.iterations = round;
        if stable {
            return Ok(model);
        }
    }
    Err(MajorantError::NotStabilized(limit))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominationFailure {
    pub component: usize,
    pub degree: usize,
    pub norm: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominationReport {
    pub first_failure: Option<DominationFailure>,
    pub checked: usize,
    /// Largest `‖F_j^{(m_j+k+i)}‖ / f_{j,i}` over checked pairs with nonzero bound.
    pub worst_ratio: f64,
}

impl DominationReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "checked": self.checked,
            "worst_ratio": number(self.worst_ratio),
            "first_failure": self.first_failure.as_ref().map(|e| json!({
                "component": e.component + 1,
                "degree": e.degree,
                "norm": number(e.norm),
                "bound": number(e.bound),
            })),
        })
    }
}

/// Checks `‖F_j^{(m_j+k+i)}‖ ≤ f_{j,i}` for `1 ≤ i ≤ N` within the truncation of `F`.
pub fn verify_domination<S: Scalar>(f: &VectorSeries<S>, model: &MajorantModel) -> DominationReport {
    let m = &model.params.m;
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut worst = 0.0f64;
    for (j, comp) in f.components().iter().enumerate().take(model.f.len()) {
        for i in 1..=model.terms() {
            let degree = m[j] + model.k + i;
            if degree > comp.truncation() {
                break;
            }
            let norm = comp.degree_norm(degree);
            let bound = model.f[j][i];
            checked += 1;
            if bound > 0.0 {
                worst = worst.max(norm / bound);
            }
            if norm > bound {
                failures.push(DominationFailure { component: j, degree, norm, bound });
            }
        }
    }
    failures.sort_by_key(|e| (e.degree, e.component));
    DominationReport { first_failure: failures.into_iter().next(), checked, worst_ratio: worst }
}

/// Cauchy-type bounds `(M, c)` with `c = 1/ρ`.
///
/// Every `data` coefficient obeys `a_i ≤ M c^i`, and the seed obeys
/// `w_i ≤ M n^i c^{i−order}` so that `M (nz)^{order}/(1 − cnz)` dominates it.
pub fn cauchy_bounds(seed: &HatSeries, order: usize, data: &[HatSeries], n: usize, rho: f64) -> (f64, f64) {
    let c = 1.0 / rho;
    let nf = n as f64;
    let mut big_m = 0.0f64;
    for h in data {
        for (i, &a) in h.coeffs().iter().enumerate() {
            big_m = big_m.max(a * rho.powi(i as i32));
        }
    }
    for (i, &w) in seed.coeffs().iter().enumerate().skip(order) {
        big_m = big_m.max(w / (nf.powi(i as i32) * c.powi((i - order) as i32)));
    }
    (big_m, c)
}

/// Smallest `C` with `(t+m)!/t! · ‖F‖ ≤ C ‖rhs‖` given the per-target-degree
/// minimal denominators.
pub fn big_denominator_constant(minima: &BTreeMap<usize, f64>, m: usize) -> f64 {
    minima
        .iter()
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| ((t + 1)..=(t + m)).map(|x| x as f64).product::<f64>() / v)
        .fold(0.0, f64::max)
}

/// Hat series of a tuple: max over components of each degree norm.
pub fn tuple_hat<S: Scalar>(components: &[GradedSeries<S>], d: usize) -> HatSeries {
    HatSeries::new((0..=d).map(|i| components.iter().map(|c| c.degree_norm(i)).fold(0.0, f64::max)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VfMajorant {
    pub model: MajorantModel,
    pub domination: DominationReport,
    pub radius: Option<(f64, f64)>,
}

impl VfMajorant {
    pub fn to_json(&self) -> Value {
        json!({
            "model": self.model.to_json(),
            "domination": self.domination.to_json(),
        })
    }
}

/// Majorant of a Poincaré–Dulac transform with `r = n`, `m_j = 1`, `q = 1`.
///
/// `M`, `c` come from [`cauchy_bounds`] on the seed `w = push(F^{≤1+k}) − Ax`
/// (degrees above `k + 1`), on `R`, `Ax` and `F^{≤1+k}`; `C` from the denominators.
pub fn vf_majorant<S: Scalar>(
    problem: &VectorFieldProblem<S>,
    result: &PdResult<S>,
    k: Option<usize>,
    terms: usize,
    rho: f64,
) -> Result<VfMajorant, MajorantError> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(MajorantError::Parameter("rho"));
    }
    let n = problem.nvars();
    let d = problem.d;
    let (q, m) = (1, 1);
    let k = k.unwrap_or(q + 1);
    if k < q + 1 {
        return Err(MajorantError::SmallK { k, q });
    }
    let low: Vec<GradedSeries<S>> = result.transform.components().iter().map(|c| c.with_truncation(m + k)).collect();
    let pushed = pushforward(&problem.linear, &problem.perturbation, &low, d)
        .map_err(|e| MajorantError::Input(e.to_string()))?;
    let ax = problem.linear.linear_field(d);
    let seed: Vec<GradedSeries<S>> = pushed.iter().zip(&ax).map(|(p, a)| p.sub(a)).collect();
    let data = [tuple_hat(&problem.perturbation, d), tuple_hat(&ax, d), tuple_hat(&low, d)];
    let (big_m, c) = cauchy_bounds(&tuple_hat(&seed, d), k + q + 1, &data, n, rho);
    let big_c = big_denominator_constant(&result.profile.minima(), m);
    let params = MajorantParams { r: n, n, m: vec![m; n], q, k: Some(k), big_m, c, big_c };
    let model = majorant_build(&params, terms)?;
    let domination = verify_domination(&result.transform, &model);
    let radius = model.radius_interval();
    Ok(VfMajorant { model, domination, radius })
}
