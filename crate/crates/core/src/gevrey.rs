//! Weighted one-variable norms, the operator `L`, and Gevrey-order fitting.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::{number, CohomologyProblem, DegreeSolution, EngineError, ProjectionSpec};
use crate::graded::{ln_factorial, GradedSeries, MultiIndex, VectorSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GevreyError {
    #[error("window [{lo}, {hi}] must satisfy 2 ≤ lo and contain at least 5 degrees")]
    Window { lo: usize, hi: usize },
    #[error("window [{lo}, {hi}] exceeds the available degrees (up to {available})")]
    OutOfRange { lo: usize, hi: usize, available: usize },
    #[error("only {0} nonzero norms inside the window; at least 5 are needed")]
    TooFewPoints(usize),
}

/// `Σ_{l≥1} |a_l| l^m`.
pub fn h_norm(f: &[f64], m: f64) -> f64 {
    f.iter().enumerate().skip(1).map(|(l, a)| a.abs() * (l as f64).powf(m)).sum()
}

/// `Σ_{i≥0} |a_i| i^β / (i!)^s`.
pub fn gevrey_norm(f: &[f64], s: f64, beta: f64) -> f64 {
    f.iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(i, a)| {
            if i == 0 {
                a.abs() * 0f64.powf(beta)
            } else {
                a.abs() * (beta * (i as f64).ln() - s * ln_factorial(i as u32)).exp()
            }
        })
        .sum()
}

/// `L(f) = Σ_{i≥1} f_i i^{m−α} z^i`; the constant term is dropped.
pub fn op_l(f: &[f64], m: f64, alpha: f64) -> Vec<f64> {
    f.iter().enumerate().map(|(i, a)| if i == 0 { 0.0 } else { a * (i as f64).powf(m - alpha) }).collect()
}

/// Fit of `log a_i ≈ logC·i + α·log(i!) + const`.
#[derive(Clone, Debug, PartialEq)]
pub struct GevreyEstimate {
    pub alpha: f64,
    pub log_c: f64,
    pub constant: f64,
    /// Root-mean-square regression residual.
    pub residual: f64,
    pub window: (usize, usize),
    pub points: usize,
    /// Set when every norm in the window vanished; then `α = 0`.
    pub all_zero: bool,
}

impl GevreyEstimate {
    pub fn to_json(&self) -> Value {
        json!({
            "alpha": number(self.alpha),
            "logC": number(self.log_c),
            "constant": number(self.constant),
            "residual": number(self.residual),
            "window": [self.window.0, self.window.1],
            "points": self.points,
            "all_zero": self.all_zero,
        })
    }
}

/// `[max(2, d/2), d]`.
pub fn default_window(d: usize) -> (usize, usize) {
    ((d / 2).max(2), d)
}

/// Least-squares Gevrey fit of `(degree, norm)` pairs over `window` (inclusive).
pub fn gevrey_fit(norms: &[(usize, f64)], window: (usize, usize)) -> Result<GevreyEstimate, GevreyError> {
    let (lo, hi) = window;
    if lo < 2 || hi < lo + 4 {
        return Err(GevreyError::Window { lo, hi });
    }
    let available = norms.iter().map(|p| p.0).max().unwrap_or(0);
    if hi > available {
        return Err(GevreyError::OutOfRange { lo, hi, available });
    }
    let inside: Vec<(usize, f64)> = norms.iter().copied().filter(|(i, _)| (lo..=hi).contains(i)).collect();
    let pts: Vec<(usize, f64)> = inside.iter().copied().filter(|(_, v)| *v > 0.0 && v.is_finite()).collect();
    if pts.is_empty() {
        return Ok(GevreyEstimate {
            alpha: 0.0,
            log_c: 0.0,
            constant: 0.0,
            residual: 0.0,
            window,
            points: 0,
            all_zero: true,
        });
    }
    if pts.len() < 5 {
        return Err(GevreyError::TooFewPoints(pts.len()));
    }
    let design = DMatrix::from_fn(pts.len(), 3, |r, c| {
        let i = pts[r].0;
        match c {
            0 => i as f64,
            1 => ln_factorial(i as u32),
            _ => 1.0,
        }
    });
    let y = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1.ln()));
    let coef = design.clone().svd(true, true).solve(&y, 1e-12).expect("SVD was computed with both factors");
    let fitted = &design * &coef;
    let rss: f64 = (&y - fitted).iter().map(|e| e * e).sum();
    Ok(GevreyEstimate {
        alpha: coef[1],
        log_c: coef[0],
        constant: coef[2],
        residual: (rss / pts.len() as f64).sqrt(),
        window,
        points: pts.len(),
        all_zero: false,
    })
}

/// Scalar test equation in one variable with denominators `i^{m−α}`:
/// `S(F) = Σ i^{m−α} F_i x^i`, `T(F) = x³ + x^{m+1} F^{(m)}`.
///
/// The recursion is `F_i = (i−1)!/(i−1−m)! · F_{i−1} / i^{m−α}`, so `F` is `α`-Gevrey.
#[derive(Clone, Debug, PartialEq)]
pub struct RelativeDenominatorProblem {
    pub m: usize,
    pub alpha: f64,
}

impl RelativeDenominatorProblem {
    pub fn denominator(&self, degree: usize) -> f64 {
        (degree as f64).powf(self.m as f64 - self.alpha)
    }
}

impl CohomologyProblem<f64> for RelativeDenominatorProblem {
    fn nvars(&self) -> usize {
        1
    }
    fn offsets(&self) -> Vec<usize> {
        vec![1]
    }
    fn target_len(&self) -> usize {
        1
    }
    fn order_shift(&self) -> usize {
        1
    }
    fn projection(&self) -> ProjectionSpec {
        ProjectionSpec::Diagonal
    }
    fn linear(&self, f: &VectorSeries<f64>, dmax: usize) -> VectorSeries<f64> {
        let src = f.component(0);
        let mut out = GradedSeries::zero(1, dmax);
        for (a, c) in src.iter().filter(|(a, _)| a.degree() <= dmax) {
            out.add_term(a.clone(), c * self.denominator(a.degree()));
        }
        VectorSeries::plain(vec![out])
    }
    fn solve_degree(&self, k: usize, rhs: &VectorSeries<f64>) -> Result<DegreeSolution<f64>, EngineError> {
        let deg = k + 1;
        let den = self.denominator(deg);
        let mut solution = VectorSeries::zero(1, deg, vec![1]);
        let c = rhs.component(0).coeff(&MultiIndex::from_slice(&[deg as u16]));
        solution.component_mut(0).add_term(MultiIndex::from_slice(&[deg as u16]), c / den);
        Ok(DegreeSolution { solution, residual: VectorSeries::zero(1, deg, vec![0]), min_denominator: Some(den) })
    }
    fn evaluate(&self, f: &VectorSeries<f64>, dmax: usize) -> Result<VectorSeries<f64>, EngineError> {
        let mut t = GradedSeries::monomial(1, dmax, MultiIndex::from_slice(&[3]), 1.0);
        let deriv = f.component(0).differentiate(&MultiIndex::from_slice(&[self.m as u16]));
        let lifted = deriv
            .mul_truncated(&GradedSeries::monomial(1, dmax, MultiIndex::from_slice(&[self.m as u16 + 1]), 1.0), dmax);
        t.add_assign(&lifted.with_truncation(dmax));
        Ok(VectorSeries::plain(vec![t.with_truncation(dmax)]))
    }
}
