use super::multi_index::MultiIndex;
use super::scalar::Scalar;
use super::series::{accumulate_product, GradedSeries, Terms};
use super::GradedError;

/// Square matrix of series sharing variable count and truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSeries<S: Scalar> {
    size: usize,
    entries: Vec<GradedSeries<S>>,
}

impl<S: Scalar> MatrixSeries<S> {
    pub fn zero(size: usize, nvars: usize, d: usize) -> Self {
        MatrixSeries { size, entries: (0..size * size).map(|_| GradedSeries::zero(nvars, d)).collect() }
    }

    pub fn identity(size: usize, nvars: usize, d: usize) -> Self {
        let mut m = Self::zero(size, nvars, d);
        for i in 0..size {
            m.entries[i * size + i] = GradedSeries::constant(nvars, d, S::one());
        }
        m
    }

    /// Row-major entries.
    pub fn from_entries(size: usize, entries: Vec<GradedSeries<S>>) -> Result<Self, GradedError> {
        if entries.len() != size * size {
            return Err(GradedError::ArityMismatch { expected: size * size, found: entries.len() });
        }
        if let Some(first) = entries.first() {
            if entries.iter().any(|e| e.nvars() != first.nvars()) {
                return Err(GradedError::VariableMismatch);
            }
        }
        Ok(MatrixSeries { size, entries })
    }

    /// Constant matrix from row-major scalars.
    pub fn constant(size: usize, nvars: usize, d: usize, values: &[S]) -> Self {
        let entries = values.iter().map(|v| GradedSeries::constant(nvars, d, v.clone())).collect();
        MatrixSeries { size, entries }
    }

    /// `∂v_i/∂x_j`; `v` is treated as a polynomial so the truncation is kept.
    pub fn jacobian(v: &[GradedSeries<S>]) -> Self {
        let size = v.len();
        let mut entries = Vec::with_capacity(size * size);
        for vi in v {
            for j in 0..size {
                entries.push(vi.partial(j).with_truncation(vi.truncation()));
            }
        }
        MatrixSeries { size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nvars(&self) -> usize {
        self.entries.first().map(|e| e.nvars()).unwrap_or(0)
    }

    pub fn truncation(&self) -> usize {
        self.entries.iter().map(|e| e.truncation()).min().unwrap_or(0)
    }

    pub fn get(&self, i: usize, j: usize) -> &GradedSeries<S> {
        &self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: GradedSeries<S>) {
        self.entries[i * self.size + j] = v;
    }

    pub fn entries(&self) -> &[GradedSeries<S>] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn order(&self) -> Option<usize> {
        self.entries.iter().filter_map(|e| e.order()).min()
    }

    pub fn map(&self, f: impl Fn(&GradedSeries<S>) -> GradedSeries<S>) -> Self {
        MatrixSeries { size: self.size, entries: self.entries.iter().map(f).collect() }
    }

    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> MatrixSeries<T> {
        MatrixSeries { size: self.size, entries: self.entries.iter().map(|e| e.convert(f)).collect() }
    }

    pub fn with_truncation(&self, d: usize) -> Self {
        self.map(|e| e.with_truncation(d))
    }

    /// Degree-`i` part of every entry.
    pub fn homogeneous(&self, i: usize) -> Self {
        self.map(|e| e.homogeneous(i))
    }

    pub fn degree_norm(&self, i: usize) -> f64 {
        self.entries.iter().map(|e| e.degree_norm(i)).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Self {
        MatrixSeries {
            size: self.size,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        MatrixSeries {
            size: self.size,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale(&self, k: &S) -> Self {
        self.map(|e| e.scale(k))
    }

    pub fn scale_series(&self, h: &GradedSeries<S>, dmax: usize) -> Self {
        self.map(|e| e.mul_truncated(h, dmax))
    }

    pub fn transpose(&self) -> Self {
        let n = self.size;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.get(j, i).clone());
            }
        }
        MatrixSeries { size: n, entries }
    }

    pub fn trace(&self) -> GradedSeries<S> {
        let mut t = GradedSeries::zero(self.nvars(), self.truncation());
        for i in 0..self.size {
            t.add_assign(self.get(i, i));
        }
        t
    }

    /// Matrix product truncated at `dmax`.
    pub fn mul(&self, other: &Self, dmax: usize) -> Self {
        let n = self.size;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = GradedSeries::zero(self.nvars(), dmax);
                for k in 0..n {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc.add_assign(&a.mul_truncated(b, dmax));
                }
                entries.push(acc);
            }
        }
        MatrixSeries { size: n, entries }
    }

    /// `M·v` truncated at `dmax`.
    pub fn mul_vec(&self, v: &[GradedSeries<S>], dmax: usize) -> Vec<GradedSeries<S>> {
        (0..self.size)
            .map(|i| {
                let mut acc = GradedSeries::zero(self.nvars(), dmax);
                for (k, vk) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if a.is_zero() || vk.is_zero() {
                        continue;
                    }
                    acc.add_assign(&a.mul_truncated(vk, dmax));
                }
                acc
            })
            .collect()
    }

    /// `M(x)·x`, the contraction with the position vector.
    pub fn mul_position(&self) -> Vec<GradedSeries<S>> {
        let d = self.truncation();
        (0..self.size)
            .map(|i| {
                let mut acc = GradedSeries::zero(self.nvars(), d + 1);
                for k in 0..self.size {
                    acc.add_assign(&self.get(i, k).with_truncation(d + 1).mul_var(k));
                }
                acc
            })
            .collect()
    }

    /// Entrywise `M ∘ (id + g)`.
    pub fn compose(&self, g: &[GradedSeries<S>]) -> Result<Self, GradedError> {
        Ok(MatrixSeries {
            size: self.size,
            entries: self.entries.iter().map(|e| e.compose(g)).collect::<Result<_, _>>()?,
        })
    }

    fn nilpotent_part(&self) -> Result<Self, GradedError> {
        let n = self.size;
        let zero = MultiIndex::zero(self.nvars());
        let mut part = self.clone();
        for i in 0..n {
            for j in 0..n {
                let c = self.get(i, j).coeff(&zero);
                let expected = if i == j { S::one() } else { S::zero() };
                if c != expected {
                    return Err(GradedError::ConstantTerm);
                }
                if i == j {
                    let e = part.get(i, j).sub(&GradedSeries::constant(self.nvars(), self.truncation(), S::one()));
                    part.set(i, j, e);
                }
            }
        }
        Ok(part)
    }

    /// For `self = I + N` with `N(0) = 0`: `Σ_{k≤d} (−N)^k`.
    pub fn neumann_inverse(&self, d: usize) -> Result<Self, GradedError> {
        let n = self.nilpotent_part()?.with_truncation(d).scale(&(-S::one()));
        let mut total = Self::identity(self.size, self.nvars(), d);
        let mut power = total.clone();
        for _ in 0..d {
            power = power.mul(&n, d);
            if power.is_zero() {
                break;
            }
            total = total.add(&power);
        }
        Ok(total)
    }

    /// Solves `(I + N)·y = b` degree by degree, truncated at `d`.
    pub fn solve_unipotent(&self, b: &[GradedSeries<S>], d: usize) -> Result<Vec<GradedSeries<S>>, GradedError> {
        let n = self.nilpotent_part()?;
        let size = self.size;
        let nvars = self.nvars();
        let mut y: Vec<GradedSeries<S>> = (0..size).map(|_| GradedSeries::zero(nvars, d)).collect();
        for t in 0..=d {
            for i in 0..size {
                let mut acc: Terms<S> = b[i].part(t).clone();
                for k in 0..size {
                    let nik = n.get(i, k);
                    for a in 1..=t {
                        let (pa, pb) = (nik.part(a), y[k].part(t - a));
                        if pa.is_empty() || pb.is_empty() {
                            continue;
                        }
                        accumulate_product(&mut acc, pa, pb, true);
                    }
                }
                y[i].set_part(t, acc);
            }
        }
        Ok(y)
    }

    /// Truncated exponential `Σ Q^k/k!`; requires `Q(0) = 0`.
    pub fn exp(&self, d: usize) -> Result<Self, GradedError> {
        let zero = MultiIndex::zero(self.nvars());
        if self.entries.iter().any(|e| !e.coeff(&zero).is_zero()) {
            return Err(GradedError::ConstantTerm);
        }
        let q = self.with_truncation(d);
        let mut total = Self::identity(self.size, self.nvars(), d);
        let mut power = total.clone();
        for k in 1..=d {
            power = power.mul(&q, d).scale(&(S::one() / S::from_i64(k as i64)));
            if power.is_zero() {
                break;
            }
            total = total.add(&power);
        }
        Ok(total)
    }
}
