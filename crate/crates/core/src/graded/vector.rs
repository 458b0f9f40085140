use super::hat::HatSeries;
use super::scalar::Scalar;
use super::series::GradedSeries;
use super::GradedError;

/// Tuple of series with per-component degree offsets `m_j`.
///
/// "Shifted degree `k`" selects ambient degree `m_j + k` in component `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSeries<S: Scalar> {
    components: Vec<GradedSeries<S>>,
    offsets: Vec<usize>,
}

impl<S: Scalar> VectorSeries<S> {
    pub fn zero(n: usize, d: usize, offsets: Vec<usize>) -> Self {
        VectorSeries { components: offsets.iter().map(|_| GradedSeries::zero(n, d)).collect(), offsets }
    }

    /// Components with all offsets zero.
    pub fn plain(components: Vec<GradedSeries<S>>) -> Self {
        let offsets = vec![0; components.len()];
        VectorSeries { components, offsets }
    }

    pub fn new(components: Vec<GradedSeries<S>>, offsets: Vec<usize>) -> Result<Self, GradedError> {
        if components.len() != offsets.len() {
            return Err(GradedError::ArityMismatch { expected: offsets.len(), found: components.len() });
        }
        if let Some(first) = components.first() {
            for c in &components {
                if c.nvars() != first.nvars() {
                    return Err(GradedError::ArityMismatch { expected: first.nvars(), found: c.nvars() });
                }
            }
        }
        Ok(VectorSeries { components, offsets })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.components.first().map(|c| c.nvars()).unwrap_or(0)
    }

    pub fn truncation(&self) -> usize {
        self.components.iter().map(|c| c.truncation()).min().unwrap_or(0)
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn components(&self) -> &[GradedSeries<S>] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &GradedSeries<S> {
        &self.components[j]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut GradedSeries<S> {
        &mut self.components[j]
    }

    pub fn into_components(self) -> Vec<GradedSeries<S>> {
        self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Shifted order: smallest `k` with a nonzero shifted-degree-`k` part.
    pub fn order(&self) -> Option<usize> {
        self.components.iter().zip(&self.offsets).filter_map(|(c, &m)| c.order().map(|o| o.saturating_sub(m))).min()
    }

    /// The shifted-degree-`k` part (component `j` keeps ambient degree `m_j + k`).
    pub fn shifted_part(&self, k: usize) -> Self {
        VectorSeries {
            components: self.components.iter().zip(&self.offsets).map(|(c, &m)| c.homogeneous(m + k)).collect(),
            offsets: self.offsets.clone(),
        }
    }

    /// Shifted degrees `0..=k`.
    pub fn shifted_jet(&self, k: usize) -> Self {
        VectorSeries {
            components: self.components.iter().zip(&self.offsets).map(|(c, &m)| c.degree_range(0, m + k)).collect(),
            offsets: self.offsets.clone(),
        }
    }

    /// Norm of the shifted-degree-`k` part: max over components.
    pub fn shifted_norm(&self, k: usize) -> f64 {
        self.components.iter().zip(&self.offsets).map(|(c, &m)| c.degree_norm(m + k)).fold(0.0, f64::max)
    }

    /// Norm of an ambient-homogeneous tuple; rejects mixed degrees.
    pub fn norm_homogeneous(&self) -> Result<f64, GradedError> {
        let mut degree = None;
        for c in &self.components {
            if c.is_zero() {
                continue;
            }
            let dc = c.homogeneous_degree().ok_or(GradedError::NotHomogeneous)?;
            if degree.is_some_and(|d| d != dc) {
                return Err(GradedError::NotHomogeneous);
            }
            degree = Some(dc);
        }
        Ok(match degree {
            None => 0.0,
            Some(i) => self.components.iter().map(|c| c.degree_norm(i)).fold(0.0, f64::max),
        })
    }

    /// `F̂(z) = Σ_k ‖F^{(k)}‖ z^k` over shifted degrees.
    pub fn hat(&self) -> HatSeries {
        let top = self
            .components
            .iter()
            .zip(&self.offsets)
            .map(|(c, &m)| c.truncation().saturating_sub(m))
            .max()
            .unwrap_or(0);
        HatSeries::new((0..=top).map(|k| self.shifted_norm(k)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.add_assign(b);
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, k: &S) -> Self {
        self.map(|c| c.scale(k))
    }

    pub fn with_truncation(&self, d: usize) -> Self {
        self.map(|c| c.with_truncation(d))
    }

    pub fn with_offsets(&self, offsets: Vec<usize>) -> Self {
        assert_eq!(offsets.len(), self.len());
        VectorSeries { components: self.components.clone(), offsets }
    }

    pub fn map(&self, f: impl Fn(&GradedSeries<S>) -> GradedSeries<S>) -> Self {
        VectorSeries { components: self.components.iter().map(f).collect(), offsets: self.offsets.clone() }
    }

    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> VectorSeries<T> {
        VectorSeries {
            components: self.components.iter().map(|c| c.convert(f)).collect(),
            offsets: self.offsets.clone(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&GradedSeries<S>, &GradedSeries<S>) -> GradedSeries<S>) -> Self {
        assert_eq!(self.len(), other.len(), "tuple lengths differ");
        VectorSeries {
            components: self.components.iter().zip(&other.components).map(|(a, b)| f(a, b)).collect(),
            offsets: self.offsets.clone(),
        }
    }

    /// Componentwise `F_j ∘ (id + G)`.
    pub fn compose(&self, g: &[GradedSeries<S>]) -> Result<Self, GradedError> {
        Ok(VectorSeries {
            components: self.components.iter().map(|c| c.compose(g)).collect::<Result<_, _>>()?,
            offsets: self.offsets.clone(),
        })
    }
}
