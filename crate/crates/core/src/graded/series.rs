use std::collections::BTreeMap;

use super::multi_index::MultiIndex;
use super::scalar::{RealScalar, Scalar};
use super::GradedError;

pub type Terms<S> = BTreeMap<MultiIndex, S>;

/// Truncated power series in `n` variables, stored degree by degree.
///
/// Coefficients above the truncation degree `d` are unknown and never stored.
/// Exact zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSeries<S: Scalar> {
    n: usize,
    d: usize,
    parts: Vec<Terms<S>>,
    empty: Terms<S>,
}

impl<S: Scalar> GradedSeries<S> {
    pub fn zero(n: usize, d: usize) -> Self {
        GradedSeries { n, d, parts: vec![Terms::new(); d + 1], empty: Terms::new() }
    }

    pub fn constant(n: usize, d: usize, c: S) -> Self {
        let mut s = Self::zero(n, d);
        s.add_term(MultiIndex::zero(n), c);
        s
    }

    /// The coordinate function `x_j` (0-based).
    pub fn variable(n: usize, d: usize, j: usize) -> Self {
        Self::monomial(n, d, MultiIndex::unit(n, j), S::one())
    }

    pub fn monomial(n: usize, d: usize, alpha: MultiIndex, c: S) -> Self {
        let mut s = Self::zero(n, d);
        s.add_term(alpha, c);
        s
    }

    /// Builds a series from terms; terms above degree `d` are dropped.
    pub fn from_terms(n: usize, d: usize, terms: impl IntoIterator<Item = (MultiIndex, S)>) -> Self {
        let mut s = Self::zero(n, d);
        for (alpha, c) in terms {
            assert_eq!(alpha.nvars(), n, "exponent length must equal the variable count");
            s.add_term(alpha, c);
        }
        s
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> super::Mode {
        S::MODE
    }

    /// Adds `c·x^α`, silently ignoring degrees above the truncation.
    pub fn add_term(&mut self, alpha: MultiIndex, c: S) {
        let deg = alpha.degree();
        if deg > self.d || c.is_zero() {
            return;
        }
        let slot = &mut self.parts[deg];
        match slot.get_mut(&alpha) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    slot.remove(&alpha);
                }
            }
            None => {
                slot.insert(alpha, c);
            }
        }
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> S {
        let deg = alpha.degree();
        if deg > self.d {
            return S::zero();
        }
        self.parts[deg].get(alpha).cloned().unwrap_or_else(S::zero)
    }

    /// Terms of homogeneous degree `i` (empty above the truncation).
    pub fn part(&self, i: usize) -> &Terms<S> {
        self.parts.get(i).unwrap_or(&self.empty)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.parts.iter().flat_map(|p| p.iter())
    }

    pub fn term_count(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.is_empty())
    }

    /// Lowest degree with a nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.parts.iter().position(|p| !p.is_empty())
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.parts.iter().rposition(|p| !p.is_empty())
    }

    /// `Some(i)` if all stored terms have degree `i`; the zero series returns `None`.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let lo = self.order()?;
        (self.max_degree() == Some(lo)).then_some(lo)
    }

    /// Only the degree-`i` part, same truncation.
    pub fn homogeneous(&self, i: usize) -> Self {
        let mut s = Self::zero(self.n, self.d);
        if i <= self.d {
            s.parts[i] = self.parts[i].clone();
        }
        s
    }

    /// Terms of degree in `lo..=hi`.
    pub fn degree_range(&self, lo: usize, hi: usize) -> Self {
        let mut s = Self::zero(self.n, self.d);
        for i in lo..=hi.min(self.d) {
            s.parts[i] = self.parts[i].clone();
        }
        s
    }

    /// Changes the truncation degree; raising it treats the unknown tail as zero.
    pub fn with_truncation(&self, d: usize) -> Self {
        let mut parts = self.parts.clone();
        parts.resize(d + 1, Terms::new());
        GradedSeries { n: self.n, d, parts, empty: Terms::new() }
    }

    pub fn set_part(&mut self, i: usize, terms: Terms<S>) {
        if i <= self.d {
            self.parts[i] = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.with_truncation(self.d.min(other.d));
        for (a, c) in other.iter() {
            out.add_term(a.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.with_truncation(self.d.min(other.d));
        for (a, c) in other.iter() {
            out.add_term(a.clone(), -c.clone());
        }
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, c) in other.iter() {
            self.add_term(a.clone(), c.clone());
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, k: &S) -> Self {
        if k.is_zero() {
            return Self::zero(self.n, self.d);
        }
        self.map(|c| {
            let mut v = c.clone();
            v *= k;
            v
        })
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|p| {
                p.iter()
                    .filter_map(|(a, c)| {
                        let v = f(c);
                        (!v.is_zero()).then(|| (a.clone(), v))
                    })
                    .collect()
            })
            .collect();
        GradedSeries { n: self.n, d: self.d, parts, empty: Terms::new() }
    }

    /// Coefficientwise conversion into another scalar mode.
    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> GradedSeries<T> {
        GradedSeries::from_terms(self.n, self.d, self.iter().map(|(a, c)| (a.clone(), f(c))))
    }

    /// Product truncated at `min(d_self, d_other)`.
    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, self.d.min(other.d))
    }

    /// Product truncated at `dmax` (which should not exceed either truncation).
    pub fn mul_truncated(&self, other: &Self, dmax: usize) -> Self {
        let mut out = Self::zero(self.n, dmax);
        for (da, pa) in self.parts.iter().enumerate().take(dmax + 1) {
            if pa.is_empty() {
                continue;
            }
            for (db, pb) in other.parts.iter().enumerate().take(dmax + 1 - da) {
                if pb.is_empty() {
                    continue;
                }
                let slot = &mut out.parts[da + db];
                for (a, ca) in pa {
                    for (b, cb) in pb {
                        let mut v = ca.clone();
                        v *= cb;
                        let key = a.add(b);
                        match slot.get_mut(&key) {
                            Some(e) => *e += &v,
                            None => {
                                slot.insert(key, v);
                            }
                        }
                    }
                }
                slot.retain(|_, c| !c.is_zero());
            }
        }
        out
    }

    /// `x_j · f`, truncated at `d`.
    pub fn mul_var(&self, j: usize) -> Self {
        let mut out = Self::zero(self.n, self.d);
        for (a, c) in self.iter() {
            out.add_term(a.bump(j), c.clone());
        }
        out
    }

    /// `∂f/∂x_j`. The truncation degree drops by one (floored at zero).
    pub fn partial(&self, j: usize) -> Self {
        let mut out = Self::zero(self.n, self.d.saturating_sub(1));
        for (a, c) in self.iter() {
            let e = a.get(j);
            if e == 0 {
                continue;
            }
            out.add_term(a.with(j, e - 1), c.clone() * S::from_i64(e as i64));
        }
        out
    }

    /// `∂^{|α|} f / ∂x^α`, truncation lowered by `|α|`.
    pub fn differentiate(&self, alpha: &MultiIndex) -> Self {
        let mut out = Self::zero(self.n, self.d.saturating_sub(alpha.degree()));
        for (a, c) in self.iter() {
            let Some(rest) = a.checked_sub(alpha) else { continue };
            let mut factor = 1i64;
            for j in 0..self.n {
                for t in 0..alpha.get(j) {
                    factor *= (a.get(j) - t) as i64;
                }
            }
            out.add_term(rest, c.clone() * S::from_i64(factor));
        }
        out
    }

    /// Euler operator `Σ x_j ∂f/∂x_j`: multiplies the degree-`i` part by `i`.
    pub fn euler(&self) -> Self {
        let mut out = Self::zero(self.n, self.d);
        for (a, c) in self.iter() {
            out.add_term(a.clone(), c.clone() * S::from_i64(a.degree() as i64));
        }
        out
    }

    /// Gradient as a vector of partial derivatives, each kept at truncation `d`.
    pub fn gradient(&self) -> Vec<Self> {
        (0..self.n).map(|j| self.partial(j).with_truncation(self.d)).collect()
    }

    /// Laplacian `Σ ∂²f/∂x_j²`, kept at truncation `d`.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.n, self.d);
        for j in 0..self.n {
            out.add_assign(&self.partial(j).partial(j).with_truncation(self.d));
        }
        out
    }

    /// Sum of absolute values of the degree-`i` coefficients.
    pub fn degree_norm(&self, i: usize) -> f64 {
        self.part(i).values().map(|c| c.modulus()).sum()
    }

    /// Exact sum of moduli, available only for real exact or float modes.
    pub fn degree_norm_real(&self, i: usize) -> S
    where
        S: RealScalar,
    {
        let mut acc = S::zero();
        for c in self.part(i).values() {
            acc += &RealScalar::abs(c);
        }
        acc
    }

    /// `R ∘ (id + F)` truncated at `min(d_R, d_F)`; `F` must have no constant term.
    pub fn compose(&self, f: &[GradedSeries<S>]) -> Result<Self, GradedError> {
        if f.len() != self.n {
            return Err(GradedError::ArityMismatch { expected: self.n, found: f.len() });
        }
        let mut d = self.d;
        for (j, fj) in f.iter().enumerate() {
            if fj.nvars() != self.n {
                return Err(GradedError::ArityMismatch { expected: self.n, found: fj.nvars() });
            }
            if !fj.part(0).is_empty() {
                return Err(GradedError::ConstantSubstitution(j));
            }
            d = d.min(fj.d);
        }
        let ys: Vec<Self> =
            f.iter().enumerate().map(|(j, fj)| fj.with_truncation(d).add(&Self::variable(self.n, d, j))).collect();
        Ok(compose_with(self, &ys, d))
    }

    /// `R ∘ Y` for arbitrary substitutions `Y` without constant terms, truncated at `d`.
    pub fn substitute(&self, ys: &[GradedSeries<S>], d: usize) -> Result<Self, GradedError> {
        for (j, y) in ys.iter().enumerate() {
            if !y.part(0).is_empty() {
                return Err(GradedError::ConstantSubstitution(j));
            }
        }
        if ys.len() != self.n {
            return Err(GradedError::ArityMismatch { expected: self.n, found: ys.len() });
        }
        let nvars = ys.first().map(|y| y.nvars()).unwrap_or(self.n);
        let ys: Vec<Self> = ys.iter().map(|y| y.with_truncation(d)).collect();
        if ys.is_empty() {
            return Ok(GradedSeries::constant(nvars, d, self.coeff(&MultiIndex::zero(0))));
        }
        Ok(compose_with(self, &ys, d))
    }
}

/// Horner evaluation over the variables: `R(Y₁,…,Yₙ)` truncated at `d`.
fn compose_with<S: Scalar>(r: &GradedSeries<S>, ys: &[GradedSeries<S>], d: usize) -> GradedSeries<S> {
    let nvars = ys[0].nvars();
    let terms: Vec<(MultiIndex, S)> =
        r.iter().filter(|(a, _)| a.degree() <= d).map(|(a, c)| (a.clone(), c.clone())).collect();
    let mut powers: Vec<Vec<GradedSeries<S>>> = Vec::with_capacity(ys.len());
    for (j, y) in ys.iter().enumerate() {
        let top = terms.iter().map(|(a, _)| a.get(j) as usize).max().unwrap_or(0);
        let mut table = vec![GradedSeries::constant(nvars, d, S::one())];
        for _ in 0..top {
            let next = table.last().expect("nonempty").mul_truncated(y, d);
            table.push(next);
        }
        powers.push(table);
    }
    horner(&terms, 0, &powers, nvars, d)
}

fn horner<S: Scalar>(
    terms: &[(MultiIndex, S)],
    var: usize,
    powers: &[Vec<GradedSeries<S>>],
    nvars: usize,
    d: usize,
) -> GradedSeries<S> {
    if var == powers.len() {
        let mut total = S::zero();
        for (_, c) in terms {
            total += c;
        }
        return GradedSeries::constant(nvars, d, total);
    }
    let mut groups: BTreeMap<u16, Vec<(MultiIndex, S)>> = BTreeMap::new();
    for (a, c) in terms {
        groups.entry(a.get(var)).or_default().push((a.clone(), c.clone()));
    }
    let mut acc: Option<GradedSeries<S>> = None;
    let mut prev: u16 = 0;
    for (&e, group) in groups.iter().rev() {
        let inner = horner(group, var + 1, powers, nvars, d);
        acc = Some(match acc {
            None => inner,
            Some(a) => a.mul_truncated(&powers[var][(prev - e) as usize], d).add(&inner),
        });
        prev = e;
    }
    let acc = acc.unwrap_or_else(|| GradedSeries::zero(nvars, d));
    if prev == 0 {
        acc
    } else {
        acc.mul_truncated(&powers[var][prev as usize], d)
    }
}

/// `out += a·b` (or `out −= a·b` when `negate`) for homogeneous term maps.
pub fn accumulate_product<S: Scalar>(out: &mut Terms<S>, a: &Terms<S>, b: &Terms<S>, negate: bool) {
    for (ka, ca) in a {
        for (kb, cb) in b {
            let mut v = ca.clone();
            v *= cb;
            let key = ka.add(kb);
            match out.get_mut(&key) {
                Some(e) => {
                    if negate {
                        *e -= &v;
                    } else {
                        *e += &v;
                    }
                }
                None => {
                    out.insert(key, if negate { -v } else { v });
                }
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
}
