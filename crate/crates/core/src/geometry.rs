//! Point sets, barycentric coordinates and closed-simplex membership.
//!
//! A simplex on vertices `v_0 < v_1 < ... < v_d` (point indices, sorted) is
//! factorized once through its centered matrix
//! `X = [x_{v_0} - x_{v_d}, ..., x_{v_{d-1}} - x_{v_d}]`. Every later query
//! costs a single `O(d^2)` triangular solve, and a batch of queries is one
//! multi-right-hand-side solve against the same factors.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DepthError, Result};

/// Default tolerance on barycentric components for closed containment.
pub const DEFAULT_CONTAINMENT_TOL: f64 = 1e-9;
/// Default relative pivot threshold for declaring a simplex singular.
pub const DEFAULT_PIVOT_TOL: f64 = 1e-12;

/// `n` points in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl PointSet {
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if data.len() != n * d {
            return Err(invalid(format!(
                "data length {} does not match {n} x {d}",
                data.len()
            )));
        }
        if n < d + 2 {
            return Err(invalid(format!(
                "need at least d + 2 = {} points, got {n}",
                d + 2
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite coordinate at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { data, n, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(invalid(format!(
                    "row {i} has {} columns, expected {d}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(data, rows.len(), d)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(DepthError::IndexOutOfRange {
                index: i,
                n: self.n,
            })
        }
    }

    /// Applies `x -> A x + b` to every point. `matrix` is `d x d` row-major.
    pub fn affine_map(&self, matrix: &[f64], offset: &[f64]) -> Result<Self> {
        let d = self.d;
        if matrix.len() != d * d || offset.len() != d {
            return Err(invalid("affine map has wrong shape"));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for p in self.rows() {
            for r in 0..d {
                let row = &matrix[r * d..(r + 1) * d];
                data.push(row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() + offset[r]);
            }
        }
        Self::new(data, self.n, d)
    }
}

/// Normalized barycentric coordinates. Entry `j < d` is the weight of the
/// `j`-th sorted vertex, entry `d` the weight of the last (pivot) vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricCoords {
    pub lambda: Vec<f64>,
}

impl BarycentricCoords {
    pub fn min(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_inside(&self, tol: f64) -> bool {
        self.lambda.iter().all(|&l| l >= -tol)
    }
}

/// LU factorization (partial pivoting) of a simplex's centered matrix.
#[derive(Debug, Clone)]
pub struct SimplexFactorization {
    vertices: Vec<usize>,
    base: Vec<f64>,
    // packed L (unit lower, below diagonal) and U, row-major d x d
    lu: Vec<f64>,
    perm: Vec<usize>,
    singular: bool,
    pivot_tolerance: f64,
}

impl SimplexFactorization {
    /// Factorizes the simplex spanned by `indices` (any order, must be
    /// `d + 1` distinct in-range indices).
    pub fn new(points: &PointSet, indices: &[usize]) -> Result<Self> {
        Self::with_tolerance(points, indices, DEFAULT_PIVOT_TOL)
    }

    pub fn with_tolerance(
        points: &PointSet,
        indices: &[usize],
        pivot_tolerance: f64,
    ) -> Result<Self> {
        let d = points.dim();
        if indices.len() != d + 1 {
            return Err(invalid(format!(
                "a simplex in {d} dimensions needs {} vertices, got {}",
                d + 1,
                indices.len()
            )));
        }
        for &i in indices {
            points.check_index(i)?;
        }
        let mut vertices = indices.to_vec();
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("simplex vertex indices must be distinct"));
        }
        Ok(Self::factor_sorted(points, vertices, pivot_tolerance))
    }

    /// Hot-path constructor: `vertices` must already be sorted, distinct and
    /// in range.
    pub(crate) fn factor_sorted(
        points: &PointSet,
        vertices: Vec<usize>,
        pivot_tolerance: f64,
    ) -> Self {
        let d = points.dim();
        let base = points.point(vertices[d]).to_vec();
        let mut lu = vec![0.0; d * d];
        for (col, &v) in vertices[..d].iter().enumerate() {
            let p = points.point(v);
            for row in 0..d {
                lu[row * d + col] = p[row] - base[row];
            }
        }
        let mut perm: Vec<usize> = (0..d).collect();
        let mut max_pivot = 0.0f64;
        let mut min_pivot = f64::INFINITY;
        for k in 0..d {
            let mut best = k;
            let mut best_abs = lu[k * d + k].abs();
            for r in k + 1..d {
                let a = lu[r * d + k].abs();
                if a > best_abs {
                    best = r;
                    best_abs = a;
                }
            }
            if best != k {
                for c in 0..d {
                    lu.swap(k * d + c, best * d + c);
                }
                perm.swap(k, best);
            }
            max_pivot = max_pivot.max(best_abs);
            min_pivot = min_pivot.min(best_abs);
            let pivot = lu[k * d + k];
            if pivot == 0.0 {
                continue;
            }
            for r in k + 1..d {
                let factor = lu[r * d + k] / pivot;
                lu[r * d + k] = factor;
                if factor != 0.0 {
                    for c in k + 1..d {
                        lu[r * d + c] -= factor * lu[k * d + c];
                    }
                }
            }
        }
        let singular = max_pivot == 0.0 || min_pivot < pivot_tolerance * max_pivot;
        Self {
            vertices,
            base,
            lu,
            perm,
            singular,
            pivot_tolerance,
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn pivot_tolerance(&self) -> f64 {
        self.pivot_tolerance
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Solves `X Y = B` in place for a `d x m` row-major right-hand side.
    /// Every column sees exactly the same operation sequence, so batched and
    /// single solves agree bit for bit.
    fn solve_in_place(&self, rhs: &mut [f64], m: usize) {
        let d = self.dim();
        debug_assert_eq!(rhs.len(), d * m);
        // row permutation
        let mut permuted = vec![0.0; d * m];
        for (k, &src) in self.perm.iter().enumerate() {
            permuted[k * m..(k + 1) * m].copy_from_slice(&rhs[src * m..(src + 1) * m]);
        }
        rhs.copy_from_slice(&permuted);
        // forward substitution, unit lower
        for r in 1..d {
            for k in 0..r {
                let l = self.lu[r * d + k];
                if l != 0.0 {
                    let (head, tail) = rhs.split_at_mut(r * m);
                    let src = &head[k * m..(k + 1) * m];
                    for (t, s) in tail[..m].iter_mut().zip(src) {
                        *t -= l * s;
                    }
                }
            }
        }
        // back substitution
        for r in (0..d).rev() {
            for k in r + 1..d {
                let u = self.lu[r * d + k];
                if u != 0.0 {
                    let (head, tail) = rhs.split_at_mut(k * m);
                    let src = &tail[..m];
                    for (t, s) in head[r * m..(r + 1) * m].iter_mut().zip(src) {
                        *t -= u * s;
                    }
                }
            }
            let inv = self.lu[r * d + r];
            for t in &mut rhs[r * m..(r + 1) * m] {
                *t /= inv;
            }
        }
    }

    pub fn barycentric(&self, query: &[f64]) -> Result<BarycentricCoords> {
        let d = self.dim();
        if query.len() != d {
            return Err(invalid(format!(
                "query has {} coordinates, expected {d}",
                query.len()
            )));
        }
        if self.singular {
            return Err(DepthError::DegenerateSimplex);
        }
        let mut rhs: Vec<f64> = query.iter().zip(&self.base).map(|(q, b)| q - b).collect();
        self.solve_in_place(&mut rhs, 1);
        let last = 1.0 - rhs.iter().sum::<f64>();
        rhs.push(last);
        Ok(BarycentricCoords { lambda: rhs })
    }

    /// Closed containment with tolerance `tol` on every barycentric
    /// component. Singular simplices contain nothing.
    pub fn contains(&self, query: &[f64], tol: f64) -> bool {
        match self.barycentric(query) {
            Ok(coords) => coords.is_inside(tol),
            Err(_) => false,
        }
    }

    /// Membership of many dataset points at once. A query that is one of the
    /// simplex's own vertices is always inside (closed simplex), even when
    /// the simplex is singular.
    pub fn batch_contains(
        &self,
        points: &PointSet,
        query_indices: &[usize],
        tol: f64,
    ) -> Vec<bool> {
        let mut out = vec![false; query_indices.len()];
        self.batch_contains_into(points, query_indices, tol, &mut out);
        out
    }

    pub(crate) fn batch_contains_into(
        &self,
        points: &PointSet,
        query_indices: &[usize],
        tol: f64,
        out: &mut [bool],
    ) {
        let m = query_indices.len();
        if m == 0 {
            return;
        }
        if self.singular {
            for (o, q) in out.iter_mut().zip(query_indices) {
                *o = self.vertices.binary_search(q).is_ok();
            }
            return;
        }
        let d = self.dim();
        let mut rhs = vec![0.0; d * m];
        for (j, &q) in query_indices.iter().enumerate() {
            let p = points.point(q);
            for r in 0..d {
                rhs[r * m + j] = p[r] - self.base[r];
            }
        }
        self.solve_in_place(&mut rhs, m);
        for (j, o) in out.iter_mut().enumerate() {
            let mut sum = 0.0;
            let mut inside = true;
            for r in 0..d {
                let l = rhs[r * m + j];
                sum += l;
                inside &= l >= -tol;
            }
            inside &= 1.0 - sum >= -tol;
            *o = inside || self.vertices.binary_search(&query_indices[j]).is_ok();
        }
    }
}

/// Convenience wrapper for [`SimplexFactorization::new`].
pub fn factorize_simplex(points: &PointSet, indices: &[usize]) -> Result<SimplexFactorization> {
    SimplexFactorization::new(points, indices)
}
