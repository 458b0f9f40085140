//! Dense linear algebra over any [`Scalar`], exact in the exact modes.

use crate::graded::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<S: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<S>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m.data[i * m.cols + j] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (j, xj) in x.iter().enumerate() {
                    let a = self.get(i, j);
                    if a.is_zero() || xj.is_zero() {
                        continue;
                    }
                    let mut t = a.clone();
                    t *= xj;
                    acc += &t;
                }
                acc
            })
            .collect()
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self, tol: f64) -> Vec<usize> {
        let exact = S::MODE.is_exact();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let pick = if exact {
                (r..self.rows).find(|&i| !self.get(i, c).is_zero())
            } else {
                let best =
                    (r..self.rows).max_by(|&a, &b| self.get(a, c).modulus().total_cmp(&self.get(b, c).modulus()));
                best.filter(|&i| !self.get(i, c).is_negligible(tol))
            };
            let Some(p) = pick else {
                if !exact {
                    for i in r..self.rows {
                        self.set(i, c, S::zero());
                    }
                }
                continue;
            };
            self.swap_rows(r, p);
            let inv = S::one() / self.get(r, c).clone();
            for j in c..self.cols {
                let mut v = self.get(r, j).clone();
                v *= &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let pj = self.get(r, j);
                    if pj.is_zero() {
                        continue;
                    }
                    let mut t = pj.clone();
                    t *= &factor;
                    let mut v = self.get(i, j).clone();
                    v -= &t;
                    self.set(i, j, v);
                }
                self.set(i, c, S::zero());
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.clone().rref(tol).len()
    }

    /// Basis of `{x : A x = 0}` read off the reduced echelon form.
    pub fn nullspace(&self, tol: f64) -> Vec<Vec<S>> {
        let mut r = self.clone();
        let pivots = r.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![S::zero(); self.cols];
                v[f] = S::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.get(row, f).clone();
                }
                v
            })
            .collect()
    }

    /// Some solution of `A x = b` (free variables zero), or `None` if inconsistent.
    pub fn particular_solution(&self, b: &[S], tol: f64) -> Option<Vec<S>> {
        let mut aug = DenseMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let scale = b.iter().map(|v| v.modulus()).fold(1.0, f64::max);
        let pivots = aug.rref(tol * scale);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![S::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(row, self.cols).clone();
        }
        Some(x)
    }

    /// Unique solution of a square nonsingular system.
    pub fn solve(&self, b: &[S], tol: f64) -> Option<Vec<S>> {
        if self.rows != self.cols || self.rank(tol) != self.cols {
            return None;
        }
        self.particular_solution(b, tol)
    }
}

/// Weighted Hermitian product `Σ w_i u_i conj(v_i)`.
pub fn weighted_inner<S: Scalar>(u: &[S], v: &[S], w: &[S]) -> S {
    let mut acc = S::zero();
    for ((a, b), wi) in u.iter().zip(v).zip(w) {
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let mut t = wi.clone();
        t *= a;
        t *= &b.conj();
        acc += &t;
    }
    acc
}

fn axpy<S: Scalar>(y: &mut [S], a: &S, x: &[S]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        if xi.is_zero() {
            continue;
        }
        let mut t = xi.clone();
        t *= a;
        *yi -= &t;
    }
}

/// Orthogonal (not normalized) basis of the span of `vectors` under weights `w`.
pub fn orthogonal_basis<S: Scalar>(vectors: &[Vec<S>], w: &[S], tol: f64) -> Vec<Vec<S>> {
    let exact = S::MODE.is_exact();
    let mut basis: Vec<(Vec<S>, S)> = Vec::new();
    for v in vectors {
        let original = weighted_inner(v, v, w).re();
        let mut u = v.clone();
        let passes = if exact { 1 } else { 2 };
        for _ in 0..passes {
            for (b, bb) in &basis {
                let coef = weighted_inner(&u, b, w) / bb.clone();
                axpy(&mut u, &coef, b);
            }
        }
        let uu = weighted_inner(&u, &u, w);
        let keep = if exact {
            !uu.is_zero()
        } else {
            let o = crate::graded::RealScalar::to_f64(&original);
            uu.modulus() > tol * tol * o.max(f64::MIN_POSITIVE) && uu.modulus() > 0.0
        };
        if keep {
            basis.push((u, uu));
        }
    }
    basis.into_iter().map(|(b, _)| b).collect()
}

/// Orthogonal projection of `v` onto the span of an orthogonal basis.
pub fn project<S: Scalar>(v: &[S], basis: &[Vec<S>], w: &[S]) -> Vec<S> {
    let mut p = vec![S::zero(); v.len()];
    for b in basis {
        let coef = weighted_inner(v, b, w) / weighted_inner(b, b, w);
        let neg = -coef;
        axpy(&mut p, &neg, b);
    }
    p
}

/// `rhs = A u + ν` with `ν ⟂ im A` (target weights) and `u ⟂ ker A` (source weights).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplementSplit<S: Scalar> {
    pub solution: Vec<S>,
    pub residual: Vec<S>,
    pub rank: usize,
}

pub fn linear_solve_with_complement<S: Scalar>(
    a: &DenseMatrix<S>,
    rhs: &[S],
    source_weights: &[S],
    target_weights: &[S],
    tol: f64,
) -> ComplementSplit<S> {
    let columns: Vec<Vec<S>> = (0..a.cols()).map(|j| a.column(j)).collect();
    let image = orthogonal_basis(&columns, target_weights, tol);
    let projected = project(rhs, &image, target_weights);
    let residual: Vec<S> = rhs.iter().zip(&projected).map(|(r, p)| r.clone() - p.clone()).collect();
    let mut u = a.particular_solution(&projected, tol).unwrap_or_else(|| vec![S::zero(); a.cols()]);
    let kernel = orthogonal_basis(&a.nullspace(tol), source_weights, tol);
    let along_kernel = project(&u, &kernel, source_weights);
    for (ui, ki) in u.iter_mut().zip(&along_kernel) {
        *ui -= ki;
    }
    ComplementSplit { solution: u, residual, rank: image.len() }
}
