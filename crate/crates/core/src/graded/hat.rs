use serde::{Deserialize, Serialize};

use super::multi_index::monomials;
use super::scalar::{RealScalar, Scalar};
use super::series::GradedSeries;

/// One-variable series with nonnegative coefficients, `Σ c_i z^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HatSeries {
    coeffs: Vec<f64>,
}

impl HatSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        debug_assert!(coeffs.iter().all(|c| *c >= 0.0), "hat coefficients must be nonnegative");
        HatSeries { coeffs }
    }

    pub fn zero(len: usize) -> Self {
        HatSeries { coeffs: vec![0.0; len] }
    }

    /// Hat series of a single series: degree norms.
    pub fn of_series<S: Scalar>(f: &GradedSeries<S>) -> Self {
        HatSeries::new((0..=f.truncation()).map(|i| f.degree_norm(i)).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `d^l/dz^l`.
    pub fn derivative(&self, l: usize) -> Self {
        let coeffs = (l..self.coeffs.len())
            .map(|i| {
                let falling: f64 = ((i - l + 1)..=i).map(|k| k as f64).product();
                self.coeffs[i] * falling
            })
            .collect();
        HatSeries { coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        let mut coeffs = vec![0.0; len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] += a * b;
            }
        }
        HatSeries { coeffs }
    }

    pub fn scale(&self, k: f64) -> Self {
        HatSeries { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// `self ≺ other` coefficientwise with relative slack `rel`.
    pub fn dominated_by(&self, other: &Self, rel: f64) -> bool {
        self.coeffs.iter().enumerate().all(|(i, &a)| a <= other.coeff(i) * (1.0 + rel) + f64::MIN_POSITIVE)
    }
}

/// `G` dominates `F`: every coefficient of `G` is a nonnegative real and `|F_α| ≤ G_α`.
pub fn dominates<S: Scalar>(f: &GradedSeries<S>, g: &GradedSeries<S>) -> bool {
    let zero = <S::Real as num::Zero>::zero();
    for (_, c) in g.iter() {
        if c.im() != zero || c.re() < zero {
            return false;
        }
    }
    let d = f.truncation().min(g.truncation());
    f.iter().filter(|(a, _)| a.degree() <= d).all(|(a, c)| {
        let bound = g.coeff(a).re();
        c.modulus_sq() <= RealScalar::abs(&bound) * bound
    })
}

/// `c_l = Σ_{|Q|=l} Q!/l!` in `n` variables (`c_0 = 1`).
pub fn derivative_constant(n: usize, l: usize) -> f64 {
    let lf = super::scalar::factorial_f64(l as u32);
    monomials(n, l)
        .iter()
        .map(|q| q.exps().iter().map(|&e| super::scalar::factorial_f64(e as u32)).product::<f64>() / lf)
        .sum()
}
