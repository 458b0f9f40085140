use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// Exponent vector of a monomial `x^α`.
///
/// Ordering is graded: lower total degree first, then lexicographic with
/// `x₁ > x₂ > …`, larger monomials first. Within one degree iteration
/// therefore runs `x₁³, x₁²x₂, x₁x₂², x₂³`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(SmallVec<[u16; 6]>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, n))
    }

    pub fn from_slice(exps: &[u16]) -> Self {
        MultiIndex(SmallVec::from_slice(exps))
    }

    /// The exponent of `x_j`, i.e. the index `e_j`.
    pub fn unit(n: usize, j: usize) -> Self {
        let mut m = Self::zero(n);
        m.0[j] = 1;
        m
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exps(&self) -> &[u16] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u16 {
        self.0[j]
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// `self − other`, or `None` if some exponent would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    pub fn with(&self, j: usize, e: u16) -> Self {
        let mut m = self.clone();
        m.0[j] = e;
        m
    }

    pub fn bump(&self, j: usize) -> Self {
        let mut m = self.clone();
        m.0[j] += 1;
        m
    }

    /// `α! = Π α_j!`.
    pub fn factorial_u128(&self) -> u128 {
        self.0.iter().map(|&e| (2..=e as u128).product::<u128>()).product()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", j + 1)?;
            } else {
                write!(f, "x{}^{}", j + 1, e)?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// All exponent vectors of total degree `deg` in `n` variables, in iteration order.
pub fn monomials(n: usize, deg: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if n == 0 {
        if deg == 0 {
            out.push(MultiIndex::zero(0));
        }
        return out;
    }
    let mut current = vec![0u16; n];
    fill(&mut out, &mut current, 0, deg);
    out
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut [u16], pos: usize, remaining: usize) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u16;
        out.push(MultiIndex::from_slice(current));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e as u16;
        fill(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

/// Number of monomials of degree `deg` in `n` variables.
pub fn monomial_count(n: usize, deg: usize) -> usize {
    if n == 0 {
        return usize::from(deg == 0);
    }
    binomial(deg + n - 1, n - 1)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
