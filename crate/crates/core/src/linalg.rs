//! Small dense complex linear algebra: LU with partial pivoting, determinants
//! and a 2-norm condition number estimate.

use std::ops::{Index, IndexMut};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ops::OpCount;
use crate::C64;

/// Pivots smaller than this fraction of the largest entry mark a matrix as
/// singular.
pub const SINGULAR_TOL: f64 = 1e-10;

const COND_MAX_ITERS: usize = 200;
const COND_REL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working tolerance (pivot {pivot})")]
    Singular { pivot: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
}

/// Row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows * cols");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// Append one row at the bottom.
    pub fn push_row(&mut self, row: &[C64]) {
        assert_eq!(row.len(), self.cols, "row length must equal column count");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// `diag(self, other)`.
    pub fn block_diag(&self, other: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            out.data[i * out.cols..i * out.cols + self.cols].copy_from_slice(self.row(i));
        }
        for i in 0..other.rows {
            let start = (self.rows + i) * out.cols + self.cols;
            out.data[start..start + other.cols].copy_from_slice(other.row(i));
        }
        out
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self^H x`.
    pub fn conj_mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Serialized as nested arrays of `[re, im]` pairs.
impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<[f64; 2]> = self.row(i).iter().map(|v| [v.re, v.im]).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// `PA = LU` with unit-diagonal `L` stored below the diagonal of `lu`.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: DenseMatrix,
    /// Row `i` of `PA` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn determinant(&self) -> C64 {
        let mut det = if self.swaps.is_multiple_of(2) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        };
        for i in 0..self.dim() {
            det *= self.lu[(i, i)];
        }
        det
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[C64], ops: &mut OpCount) -> Vec<C64> {
        let n = self.dim();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in 0..i {
                acc -= row[j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
        let offdiag = (n * n.saturating_sub(1)) as u64;
        ops.mul(offdiag);
        ops.add(offdiag);
        ops.div(n as u64);
        x
    }

    /// Solve `A^H y = b`.
    fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        // A^H = U^H L^H P, so U^H z = b, L^H u = z, y = P^T u.
        let mut z = b.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for j in 0..i {
                acc -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = acc / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = acc;
        }
        let mut y = vec![C64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = z[i];
        }
        y
    }
}

/// Factor without any singularity check; zero pivots are left in place.
fn factor(a: &DenseMatrix, ops: &mut OpCount) -> Lu {
    assert!(a.is_square(), "LU needs a square matrix");
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if p != k {
            for j in 0..n {
                lu.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            swaps += 1;
        }
        if pmag == 0.0 {
            continue;
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let m = lu[(i, k)] / pivot;
            lu[(i, k)] = m;
            if m.re == 0.0 && m.im == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= m * u;
            }
        }
        let below = (n - k - 1) as u64;
        ops.div(below);
        ops.mul(below * below);
        ops.add(below * below);
    }
    Lu { lu, perm, swaps }
}

/// LU factorization with partial pivoting. Fails when some pivot falls below
/// `tol` times the largest entry of `a`.
pub fn lu_factor(a: &DenseMatrix, tol: f64, ops: &mut OpCount) -> Result<Lu, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Dimension("LU needs a square matrix"));
    }
    let scale = a.max_abs();
    let lu = factor(a, ops);
    for i in 0..lu.dim() {
        if !(lu.lu[(i, i)].norm() >= tol * scale) || scale == 0.0 {
            return Err(LinalgError::Singular { pivot: i });
        }
    }
    Ok(lu)
}

/// Solve `A x = b` with the default singularity tolerance.
pub fn lu_solve(a: &DenseMatrix, b: &[C64], ops: &mut OpCount) -> Result<Vec<C64>, LinalgError> {
    lu_solve_tol(a, b, SINGULAR_TOL, ops)
}

pub fn lu_solve_tol(a: &DenseMatrix, b: &[C64], tol: f64, ops: &mut OpCount) -> Result<Vec<C64>, LinalgError> {
    if b.len() != a.rows {
        return Err(LinalgError::Dimension("right-hand side length must equal row count"));
    }
    Ok(lu_factor(a, tol, ops)?.solve(b, ops))
}

/// Product of the LU pivots with the permutation sign. Exactly zero when a
/// pivot column vanishes.
pub fn determinant(a: &DenseMatrix) -> C64 {
    if a.rows == 0 {
        return C64::new(1.0, 0.0);
    }
    factor(a, &mut OpCount::new()).determinant()
}

/// `sigma_max / sigma_min` in the 2-norm.
pub fn cond2<R: Rng + ?Sized>(a: &DenseMatrix, rng: &mut R) -> Result<f64, LinalgError> {
    let lu = lu_factor(a, SINGULAR_TOL, &mut OpCount::new())?;
    Ok(cond2_with_lu(a, &lu, rng))
}

/// Condition number from an existing factorization of `a`.
///
/// `sigma_max^2` comes from power iteration on `A^H A`; `sigma_min^{-2}` from
/// the same iteration on `(A^H A)^{-1}`, applied through the LU factors.
pub fn cond2_with_lu<R: Rng + ?Sized>(a: &DenseMatrix, lu: &Lu, rng: &mut R) -> f64 {
    let n = a.rows;
    if n == 0 {
        return 1.0;
    }
    if n == 1 {
        return 1.0;
    }
    let start = random_unit(n, rng);
    let top = power_iterate(start.clone(), |v| {
        let w = a.mul_vec(v);
        let lambda = norm_sqr(&w);
        (lambda, a.conj_mul_vec(&w))
    });
    let inv = power_iterate(start, |v| {
        let y = lu.solve_adjoint(v);
        let lambda = norm_sqr(&y);
        (lambda, lu.solve(&y, &mut OpCount::new()))
    });
    let cond = (top * inv).sqrt();
    if cond.is_finite() {
        cond.max(1.0)
    } else {
        f64::INFINITY
    }
}

/// Iterate `v <- B v / |B v|` where `step(v)` returns the Rayleigh quotient
/// `v^H B v` and `B v`. Returns the dominant eigenvalue estimate.
fn power_iterate(mut v: Vec<C64>, step: impl Fn(&[C64]) -> (f64, Vec<C64>)) -> f64 {
    let mut prev = 0.0;
    let mut lambda = 0.0;
    for _ in 0..COND_MAX_ITERS {
        let (l, next) = step(&v);
        lambda = l;
        let norm = norm_sqr(&next).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        v = next.into_iter().map(|x| x / norm).collect();
        if (lambda - prev).abs() <= COND_REL_TOL * lambda {
            break;
        }
        prev = lambda;
    }
    lambda
}

fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = norm_sqr(&v).sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0)];
        let x = lu_solve(&DenseMatrix::identity(3), &b, &mut OpCount::new()).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn two_by_two_worked_system() {
        // columns for frequencies 0 and 512 at shifts 0 and 1, N = 1024
        let w = C64::from_polar(1.0, -2.0 * PI * 512.0 / 1024.0);
        let a = DenseMatrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), w]]);
        let (s0, s1) = (c(3.0, -1.0), c(0.5, 2.0));
        let x = lu_solve(&a, &[s0, s1], &mut OpCount::new()).unwrap();
        assert!((x[0] - (s0 + s1) / 2.0).norm() < 1e-14);
        assert!((x[1] - (s0 - s1) / 2.0).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = DenseMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        assert_eq!(
            lu_solve(&a, &[c(1.0, 0.0), c(1.0, 0.0)], &mut OpCount::new()),
            Err(LinalgError::Singular { pivot: 1 })
        );
        assert_eq!(determinant(&a).norm(), 0.0);
        assert!(cond2(&a, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(lu_solve(&DenseMatrix::zeros(2, 2), &[c(0.0, 0.0); 2], &mut OpCount::new()).is_err());
    }

    #[test]
    fn dimension_errors() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            lu_factor(&a, SINGULAR_TOL, &mut OpCount::new()),
            Err(LinalgError::Dimension(_))
        ));
        assert!(matches!(
            lu_solve(&DenseMatrix::identity(2), &[c(1.0, 0.0)], &mut OpCount::new()),
            Err(LinalgError::Dimension(_))
        ));
    }

    #[test]
    fn cond_of_simple_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_relative_eq!(cond2(&DenseMatrix::identity(4), &mut rng).unwrap(), 1.0, epsilon = 1e-9);
        let d = DenseMatrix::from_rows(&[vec![c(2.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        assert_relative_eq!(cond2(&d, &mut rng).unwrap(), 2.0, max_relative = 1e-6);
    }

    #[test]
    fn determinant_with_row_swap() {
        let a = DenseMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        assert_relative_eq!(determinant(&a).re, -1.0);
        assert_relative_eq!(determinant(&DenseMatrix::identity(5)).re, 1.0);
    }

    #[test]
    fn block_diag_layout() {
        let a = DenseMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)]]);
        let b = DenseMatrix::from_rows(&[vec![c(3.0, 0.0)], vec![c(4.0, 0.0)]]);
        let m = a.block_diag(&b);
        assert_eq!((m.rows(), m.cols()), (3, 3));
        assert_eq!(m[(0, 1)], c(2.0, 0.0));
        assert_eq!(m[(1, 2)], c(3.0, 0.0));
        assert_eq!(m[(2, 2)], c(4.0, 0.0));
        assert_eq!(m[(1, 0)], c(0.0, 0.0));
    }

    #[test]
    fn solve_counts_operations() {
        let mut ops = OpCount::new();
        lu_solve(&DenseMatrix::identity(3), &[c(1.0, 0.0); 3], &mut ops).unwrap();
        // elimination: 2 + 1 divisions, 4 + 1 mult/add pairs; solve: 6 pairs, 3 divisions
        assert_eq!(ops.complex_divs, 6);
        assert_eq!(ops.complex_mults, 11);
        assert_eq!(ops.complex_adds, 11);
    }
}
