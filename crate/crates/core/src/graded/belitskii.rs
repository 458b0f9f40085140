use serde::{Deserialize, Serialize};

use super::multi_index::MultiIndex;
use super::scalar::Scalar;
use super::series::GradedSeries;
use super::GradedError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BelitskiiVariant {
    /// `⟨x^α, x^β⟩ = α! δ_{αβ}`.
    #[default]
    Classic,
    /// `⟨x^α, x^β⟩ = (α!/|α|!) δ_{αβ}`.
    Modified,
}

/// Weight of the monomial `x^α` in the chosen inner product.
pub fn monomial_weight<S: Scalar>(alpha: &MultiIndex, variant: BelitskiiVariant) -> S {
    let mut w = S::one();
    for &e in alpha.exps() {
        for k in 2..=e as i64 {
            w *= &S::from_i64(k);
        }
    }
    if variant == BelitskiiVariant::Modified {
        for k in 2..=alpha.degree() as i64 {
            w /= &S::from_i64(k);
        }
    }
    w
}

/// `Σ w_α f_α conj(g_α)` for homogeneous `f`, `g` of one common degree.
pub fn belitskii_inner<S: Scalar>(
    f: &GradedSeries<S>,
    g: &GradedSeries<S>,
    variant: BelitskiiVariant,
) -> Result<S, GradedError> {
    check_homogeneous_pair(f, g)?;
    let mut acc = S::zero();
    for (a, c) in f.iter() {
        let gc = g.coeff(a);
        if gc.is_zero() {
            continue;
        }
        let mut term = monomial_weight::<S>(a, variant);
        term *= c;
        term *= &gc.conj();
        acc += &term;
    }
    Ok(acc)
}

/// Componentwise sum of inner products of two tuples.
pub fn belitskii_inner_tuple<S: Scalar>(
    f: &[GradedSeries<S>],
    g: &[GradedSeries<S>],
    variant: BelitskiiVariant,
) -> Result<S, GradedError> {
    if f.len() != g.len() {
        return Err(GradedError::ArityMismatch { expected: f.len(), found: g.len() });
    }
    let mut acc = S::zero();
    for (a, b) in f.iter().zip(g) {
        acc += &belitskii_inner(a, b, variant)?;
    }
    Ok(acc)
}

fn check_homogeneous_pair<S: Scalar>(f: &GradedSeries<S>, g: &GradedSeries<S>) -> Result<(), GradedError> {
    if f.nvars() != g.nvars() {
        return Err(GradedError::VariableMismatch);
    }
    let df = if f.is_zero() { None } else { Some(f.homogeneous_degree().ok_or(GradedError::NotHomogeneous)?) };
    let dg = if g.is_zero() { None } else { Some(g.homogeneous_degree().ok_or(GradedError::NotHomogeneous)?) };
    match (df, dg) {
        (Some(a), Some(b)) if a != b => Err(GradedError::DegreeMismatch { left: a, right: b }),
        _ => Ok(()),
    }
}
