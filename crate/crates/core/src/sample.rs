//! Seeded random inputs for self-checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graded::{monomials, GradedSeries, MatrixSeries, Rational, Scalar};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `p/q` with `|p| ≤ max_num`, `1 ≤ q ≤ max_den`.
pub fn rational(rng: &mut SampleRng, max_num: i64, max_den: i64) -> Rational {
    let p = rng.gen_range(-max_num..=max_num);
    let q = rng.gen_range(1..=max_den);
    Rational::from_ratio(p, q)
}

/// Random polynomial with every monomial of degree in `degrees` present with probability `density`.
pub fn series(
    rng: &mut SampleRng,
    n: usize,
    d: usize,
    degrees: std::ops::RangeInclusive<usize>,
    density: f64,
) -> GradedSeries<Rational> {
    let mut f = GradedSeries::zero(n, d);
    for deg in degrees {
        for a in monomials(n, deg) {
            if rng.gen_bool(density) {
                f.add_term(a, rational(rng, 5, 4));
            }
        }
    }
    f
}

/// A nonzero homogeneous polynomial of degree `deg`.
pub fn homogeneous(rng: &mut SampleRng, n: usize, deg: usize) -> GradedSeries<Rational> {
    loop {
        let f = series(rng, n, deg + 1, deg..=deg, 0.7);
        if !f.is_zero() {
            return f;
        }
    }
}

/// Random `n×n` matrix of homogeneous polynomials of degree `deg`.
pub fn homogeneous_matrix(rng: &mut SampleRng, n: usize, deg: usize, d: usize) -> MatrixSeries<Rational> {
    let entries = (0..n * n).map(|_| series(rng, n, d, deg..=deg, 0.6)).collect();
    MatrixSeries::from_entries(n, entries).expect("square by construction")
}

/// Converts an exact rational series into another mode.
pub fn convert<S: Scalar>(f: &GradedSeries<Rational>) -> GradedSeries<S> {
    f.convert(|c| S::from_real(rational_to_real::<S>(c)))
}

fn rational_to_real<S: Scalar>(c: &Rational) -> S::Real {
    let num = <S::Real as Scalar>::from_i64(c.numer().try_into().expect("small numerator"));
    let den = <S::Real as Scalar>::from_i64(c.denom().try_into().expect("small denominator"));
    num / den
}
