//! Small dense linear algebra over R^d.
//!
//! The ambient dimensions here are tiny (the lifted zippers of the shipped
//! presets live in R^2 and R^3), so everything is stored densely in
//! row-major `Vec<f64>` and every operation is a plain loop.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivots with magnitude below this are treated as zero by [`solve_linear`].
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Iteration cap for the power iteration in [`operator_norm`].
pub const POWER_ITERATION_CAP: usize = 10_000;

/// A point or displacement in R^d.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty or non-finite input.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Vector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// The `axis`-th standard basis vector.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[axis] = 1.0;
        v
    }

    pub fn scalar(value: f64) -> Self {
        Vector(vec![value])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Prepends a coordinate: `(head, self)`.
    pub fn prepend(&self, head: f64) -> Vector {
        let mut out = Vec::with_capacity(self.dim() + 1);
        out.push(head);
        out.extend_from_slice(&self.0);
        Vector(out)
    }

    /// Drops the first coordinate.
    pub fn tail(&self) -> Vector {
        Vector(self.0[1..].to_vec())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    fn check_dim(&self, other: &Vector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl From<f64> for Vector {
    fn from(value: f64) -> Self {
        Vector::scalar(value)
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(value: [f64; N]) -> Self {
        Vector(value.to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

/// A square matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    entries: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from rows, which must form a finite square array.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Matrix { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn scalar(value: f64) -> Self {
        Matrix {
            dim: 1,
            entries: vec![value],
        }
    }

    /// Counter-clockwise rotation of the plane by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Matrix {
            dim: 2,
            entries: vec![c, -s, s, c],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        Ok(self.mul_vec_unchecked(v))
    }

    pub(crate) fn mul_vec_unchecked(&self, v: &Vector) -> Vector {
        Vector(
            self.entries
                .chunks(self.dim)
                .map(|row| row.iter().zip(&v.0).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn mul_mat(&self, other: &Matrix) -> Result<Matrix> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(self.mul_mat_unchecked(other))
    }

    pub(crate) fn mul_mat_unchecked(&self, other: &Matrix) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        out
    }

    /// Block matrix `[[corner, 0], [column, block]]` of dimension `block.dim() + 1`.
    pub fn bordered(corner: f64, column: &Vector, block: &Matrix) -> Result<Matrix> {
        if column.dim() != block.dim {
            return Err(Error::DimensionMismatch {
                expected: block.dim,
                found: column.dim(),
            });
        }
        let n = block.dim + 1;
        let mut m = Matrix::zeros(n);
        m[(0, 0)] = corner;
        for i in 0..block.dim {
            m[(i + 1, 0)] = column[i];
            for j in 0..block.dim {
                m[(i + 1, j + 1)] = block[(i, j)];
            }
        }
        Ok(m)
    }

    /// Lower-right `(dim-1)×(dim-1)` block.
    pub fn minor_block(&self) -> Matrix {
        let n = self.dim - 1;
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self[(i + 1, j + 1)];
            }
        }
        m
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.entries.chunks(self.dim))
            .finish()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        debug_assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        debug_assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        debug_assert_eq!(self.dim, rhs.dim);
        self.mul_mat_unchecked(rhs)
    }
}

/// `x ↦ linear·x + translation`.
#[derive(Clone, PartialEq)]
pub struct AffineMap {
    linear: Matrix,
    translation: Vector,
}

impl AffineMap {
    pub fn new(linear: Matrix, translation: Vector) -> Result<Self> {
        if linear.dim() != translation.dim() {
            return Err(Error::DimensionMismatch {
                expected: linear.dim(),
                found: translation.dim(),
            });
        }
        Ok(AffineMap {
            linear,
            translation,
        })
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap {
            linear: Matrix::identity(dim),
            translation: Vector::zeros(dim),
        }
    }

    pub fn translation_only(offset: Vector) -> Self {
        AffineMap {
            linear: Matrix::identity(offset.dim()),
            translation: offset,
        }
    }

    /// `x ↦ factor·x + offset` on the real line.
    pub fn scalar(factor: f64, offset: f64) -> Self {
        AffineMap {
            linear: Matrix::scalar(factor),
            translation: Vector::scalar(offset),
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.dim()
    }

    pub fn linear(&self) -> &Matrix {
        &self.linear
    }

    pub fn translation(&self) -> &Vector {
        &self.translation
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let n = self.dim();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            cols.push(solve_linear(&self.linear, &Vector::basis(n, j))?);
        }
        let mut inv = Matrix::zeros(n);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        let translation = -&inv.mul_vec_unchecked(&self.translation);
        Ok(AffineMap {
            linear: inv,
            translation,
        })
    }

    pub(crate) fn apply_unchecked(&self, point: &Vector) -> Vector {
        let mut out = self.linear.mul_vec_unchecked(point);
        for (o, t) in out.0.iter_mut().zip(&self.translation.0) {
            *o += t;
        }
        out
    }
}

impl fmt::Debug for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffineMap")
            .field("linear", &self.linear)
            .field("translation", &self.translation)
            .finish()
    }
}

/// `map.linear·point + map.translation`.
pub fn apply(map: &AffineMap, point: &Vector) -> Result<Vector> {
    map.translation.check_dim(point)?;
    Ok(map.apply_unchecked(point))
}

/// The map `x ↦ outer(inner(x))`.
pub fn compose(outer: &AffineMap, inner: &AffineMap) -> Result<AffineMap> {
    outer.translation.check_dim(&inner.translation)?;
    Ok(AffineMap {
        linear: outer.linear.mul_mat_unchecked(&inner.linear),
        translation: outer.apply_unchecked(&inner.translation),
    })
}

/// Solves `matrix·x = rhs` by Gaussian elimination with partial pivoting.
pub fn solve_linear(matrix: &Matrix, rhs: &Vector) -> Result<Vector> {
    let n = matrix.dim();
    if rhs.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rhs.dim(),
        });
    }
    let mut a = matrix.entries.clone();
    let mut b = rhs.0.clone();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .expect("non-empty pivot range");
        let pivot = a[pivot_row * n + col];
        if pivot.abs() < PIVOT_THRESHOLD {
            return Err(Error::SingularSystem { pivot: pivot.abs() });
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|j| a[row * n + j] * x[j]).sum();
        x[row] = (b[row] - tail) / a[row * n + row];
    }
    Ok(Vector(x))
}

/// Spectral norm together with the unit vector that attains it.
#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub value: f64,
    pub witness: Vector,
}

/// Largest singular value of `matrix` by power iteration on `MᵀM`.
pub fn operator_norm(matrix: &Matrix) -> f64 {
    operator_norm_with_witness(matrix).value
}

/// Power iteration on `MᵀM`, started from the all-ones vector and then from
/// each standard basis vector; the largest Rayleigh quotient wins. A single
/// start can be orthogonal to the dominant singular vector, but not all
/// `d + 1` of them can.
pub fn operator_norm_with_witness(matrix: &Matrix) -> NormEstimate {
    let n = matrix.dim();
    if n == 1 {
        return NormEstimate {
            value: matrix.entries[0].abs(),
            witness: Vector::scalar(1.0),
        };
    }
    let gram = matrix.transpose().mul_mat_unchecked(matrix);
    let ones = Vector(vec![1.0 / (n as f64).sqrt(); n]);
    let mut best = power_iterate(&gram, ones);
    for axis in 0..n {
        let candidate = power_iterate(&gram, Vector::basis(n, axis));
        if candidate.0 > best.0 {
            best = candidate;
        }
    }
    NormEstimate {
        value: best.0.max(0.0).sqrt(),
        witness: best.1,
    }
}

/// Returns (largest Rayleigh quotient seen, its unit vector).
fn power_iterate(gram: &Matrix, start: Vector) -> (f64, Vector) {
    let mut v = start;
    let mut lambda = v.dot(&gram.mul_vec_unchecked(&v));
    for _ in 0..POWER_ITERATION_CAP {
        let w = gram.mul_vec_unchecked(&v);
        let len = w.norm();
        if len == 0.0 {
            return (0.0, v);
        }
        let next = w.scale(1.0 / len);
        let next_lambda = next.dot(&gram.mul_vec_unchecked(&next));
        let settled = (next_lambda - lambda).abs() <= 1e-15 * next_lambda.abs();
        if next_lambda >= lambda {
            v = next;
            lambda = next_lambda;
        }
        if settled {
            break;
        }
    }
    (lambda, v)
}
