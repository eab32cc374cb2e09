use std::cmp::Ordering;
use std::sync::OnceLock;

use rayon::prelude::*;

use super::{DepthEstimate, ExactDepth};
use crate::error::{DepthError, Result};
use crate::geometry::{PointSet, SimplexFactorization, DEFAULT_CONTAINMENT_TOL, DEFAULT_PIVOT_TOL};

/// Largest number of subsets the enumeration oracles will visit.
pub const DEFAULT_NAIVE_CAP: u128 = 1_000_000_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

/// Calls `f` with every sorted `k`-subset of `0..n` whose smallest element
/// is `first`.
fn for_each_subset_starting_at(n: usize, k: usize, first: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || first + k > n {
        return;
    }
    let mut idx: Vec<usize> = (first..first + k).collect();
    loop {
        f(&idx);
        // advance positions 1..k lexicographically, position 0 stays fixed
        let mut pos = k;
        loop {
            if pos == 1 {
                return;
            }
            pos -= 1;
            if idx[pos] < n - k + pos {
                break;
            }
        }
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn check_cap(count: u128, cap: u128) -> Result<()> {
    if count > cap {
        Err(DepthError::TooLarge { count, cap })
    } else {
        Ok(())
    }
}

/// Number of closed simplices (over all `C(n, d+1)` vertex subsets)
/// containing point `i`. Simplices with `i` as a vertex always count;
/// singular simplices otherwise never do.
pub fn simplicial_count_naive(points: &PointSet, i: usize, cap: u128) -> Result<u64> {
    points.check_index(i)?;
    let n = points.len();
    let k = points.dim() + 1;
    check_cap(binomial(n, k), cap)?;
    let q = points.point(i);
    let count = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut c = 0u64;
            for_each_subset_starting_at(n, k, first, |s| {
                if s.binary_search(&i).is_ok() {
                    c += 1;
                } else {
                    let f =
                        SimplexFactorization::factor_sorted(points, s.to_vec(), DEFAULT_PIVOT_TOL);
                    if f.contains(q, DEFAULT_CONTAINMENT_TOL) {
                        c += 1;
                    }
                }
            });
            c
        })
        .sum();
    Ok(count)
}

/// Containment counts for every point at once: each simplex is factorized a
/// single time and tested against all `n` points.
pub fn naive_counts_all(points: &PointSet, cap: u128) -> Result<Vec<u64>> {
    let n = points.len();
    let k = points.dim() + 1;
    check_cap(binomial(n, k), cap)?;
    let all: Vec<usize> = (0..n).collect();
    let counts = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut c = vec![0u64; n];
            let mut inside = vec![false; n];
            for_each_subset_starting_at(n, k, first, |s| {
                let f = SimplexFactorization::factor_sorted(points, s.to_vec(), DEFAULT_PIVOT_TOL);
                f.batch_contains_into(points, &all, DEFAULT_CONTAINMENT_TOL, &mut inside);
                for (ci, &b) in c.iter_mut().zip(&inside) {
                    *ci += b as u64;
                }
            });
            c
        })
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

pub fn exact_depth_naive(points: &PointSet, i: usize) -> Result<DepthEstimate> {
    NaiveSimplicial::new(points).depth(i)
}

/// Full enumeration of all `C(n, d+1)` simplices.
#[derive(Debug, Clone, Copy)]
pub struct NaiveSimplicial<'a> {
    points: &'a PointSet,
    cap: u128,
}

impl<'a> NaiveSimplicial<'a> {
    pub fn new(points: &'a PointSet) -> Self {
        Self {
            points,
            cap: DEFAULT_NAIVE_CAP,
        }
    }

    pub fn with_cap(points: &'a PointSet, cap: u128) -> Self {
        Self { points, cap }
    }
}

impl ExactDepth for NaiveSimplicial<'_> {
    fn cost(&self) -> f64 {
        binomial(self.points.len(), self.points.dim() + 1) as f64
    }

    fn depth(&self, i: usize) -> Result<DepthEstimate> {
        let total = binomial(self.points.len(), self.points.dim() + 1);
        let count = simplicial_count_naive(self.points, i, self.cap)?;
        Ok(DepthEstimate {
            point_index: i,
            mean: count as f64 / total as f64,
            samples: total as u64,
            exact: true,
        })
    }
}

/// Number of triangles (over all `C(n, 3)` vertex triples) whose closed hull
/// contains point `i`, by angular sweep around `x_i` in `O(n log n)`.
///
/// A triangle on three other points misses `x_i` exactly when all three lie
/// in an open half-plane through `x_i`; each such triple is counted once from
/// its first vertex in counter-clockwise order. Points coincident with `x_i`
/// put it on a vertex of every triangle they belong to.
pub fn planar_contained_count(points: &PointSet, i: usize) -> Result<u64> {
    if points.dim() != 2 {
        return Err(DepthError::UnsupportedDimension {
            what: "planar depth",
            expected: 2,
            got: points.dim(),
        });
    }
    points.check_index(i)?;
    let n = points.len();
    let x = points.point(i);
    let mut dirs: Vec<(f64, f64, f64, usize)> = Vec::with_capacity(n - 1);
    for (j, p) in points.rows().enumerate() {
        if j == i {
            continue;
        }
        let (dx, dy) = (p[0] - x[0], p[1] - x[1]);
        if dx == 0.0 && dy == 0.0 {
            continue;
        }
        dirs.push((dy.atan2(dx), dx, dy, j));
    }
    dirs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.3.cmp(&b.3)));

    let m = dirs.len();
    // q is in the open half-turn counter-clockwise after p; equal directions
    // count as "after" only in sorted order (no wrap-around)
    let in_half_turn = |p: usize, q: usize| -> bool {
        let a = &dirs[p];
        let b = &dirs[q % m];
        let cross = a.1 * b.2 - a.2 * b.1;
        match cross.partial_cmp(&0.0) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Less) => false,
            _ => a.1 * b.1 + a.2 * b.2 > 0.0 && q < m,
        }
    };

    let mut missing: u128 = 0;
    let mut end = 0usize;
    for p in 0..m {
        end = end.max(p + 1);
        while end < p + m && in_half_turn(p, end) {
            end += 1;
        }
        let c = (end - p - 1) as u128;
        missing += c * c.saturating_sub(1) / 2;
    }
    let contained = binomial(n - 1, 3) - missing + binomial(n - 1, 2);
    Ok(contained as u64)
}

pub fn exact_depth_planar(points: &PointSet, i: usize) -> Result<DepthEstimate> {
    PlanarSimplicial::new(points).depth(i)
}

/// Exact simplicial depth of every point: the angular sweep per point when
/// `d = 2`, one shared enumeration otherwise.
pub fn exact_depths_all(points: &PointSet) -> Result<Vec<f64>> {
    let n = points.len();
    let total = binomial(n, points.dim() + 1) as f64;
    let counts = if points.dim() == 2 {
        (0..n)
            .into_par_iter()
            .map(|i| planar_contained_count(points, i))
            .collect::<Result<Vec<u64>>>()?
    } else {
        naive_counts_all(points, DEFAULT_NAIVE_CAP)?
    };
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// Angular-sweep exact depth for planar data, billed at `n ln n` units.
#[derive(Debug, Clone, Copy)]
pub struct PlanarSimplicial<'a> {
    points: &'a PointSet,
}

impl<'a> PlanarSimplicial<'a> {
    pub fn new(points: &'a PointSet) -> Self {
        Self { points }
    }
}

impl ExactDepth for PlanarSimplicial<'_> {
    fn cost(&self) -> f64 {
        let n = self.points.len() as f64;
        n * n.ln()
    }

    fn depth(&self, i: usize) -> Result<DepthEstimate> {
        let count = planar_contained_count(self.points, i)?;
        let total = binomial(self.points.len(), 3);
        Ok(DepthEstimate {
            point_index: i,
            mean: count as f64 / total as f64,
            samples: total as u64,
            exact: true,
        })
    }
}

/// A hyperplane through `d` data points together with which of its closed
/// sides hold at least half the data.
#[derive(Debug, Clone)]
pub(crate) struct MajorityPlane {
    normal: Vec<f64>,
    origin: Vec<f64>,
    members: Vec<usize>,
    upper_major: bool,
    lower_major: bool,
}

const SIDE_TOL: f64 = 1e-9;

fn det_in_place(m: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&a, &b| m[a * k + c].abs().total_cmp(&m[b * k + c].abs()))
            .unwrap();
        if m[piv * k + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for j in 0..k {
                m.swap(c * k + j, piv * k + j);
            }
            det = -det;
        }
        let p = m[c * k + c];
        det *= p;
        for r in c + 1..k {
            let f = m[r * k + c] / p;
            for j in c..k {
                m[r * k + j] -= f * m[c * k + j];
            }
        }
    }
    det
}

impl MajorityPlane {
    /// Returns `None` when the `d` points do not span a hyperplane.
    pub(crate) fn new(points: &PointSet, members: &[usize]) -> Option<Self> {
        let d = points.dim();
        let origin = points.point(members[0]).to_vec();
        let rows: Vec<Vec<f64>> = members[1..]
            .iter()
            .map(|&j| {
                points
                    .point(j)
                    .iter()
                    .zip(&origin)
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect();
        // generalized cross product: cofactor expansion along a virtual row
        let k = d - 1;
        let mut normal = vec![0.0; d];
        let mut minor = vec![0.0; k * k];
        for (col, nc) in normal.iter_mut().enumerate() {
            for (r, row) in rows.iter().enumerate() {
                let mut w = 0;
                for (c, &v) in row.iter().enumerate() {
                    if c != col {
                        minor[r * k + w] = v;
                        w += 1;
                    }
                }
            }
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            *nc = sign * det_in_place(&mut minor, k);
        }
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale: f64 = rows
            .iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
            .product();
        if norm == 0.0 || norm < DEFAULT_PIVOT_TOL * scale {
            return None;
        }
        normal.iter_mut().for_each(|v| *v /= norm);
        let mut plane = Self {
            normal,
            origin,
            members: members.to_vec(),
            upper_major: false,
            lower_major: false,
        };
        let (mut upper, mut lower) = (0usize, 0usize);
        for j in 0..points.len() {
            let (u, l) = plane.sides(points, j);
            upper += u as usize;
            lower += l as usize;
        }
        let half = points.len().div_ceil(2);
        plane.upper_major = upper >= half;
        plane.lower_major = lower >= half;
        Some(plane)
    }

    /// Membership of point `j` in the (upper, lower) closed sides.
    fn sides(&self, points: &PointSet, j: usize) -> (bool, bool) {
        if self.members.contains(&j) {
            return (true, true);
        }
        let p = points.point(j);
        let mut s = 0.0;
        let mut spread = 0.0f64;
        for ((a, o), nv) in p.iter().zip(&self.origin).zip(&self.normal) {
            s += nv * (a - o);
            spread = spread.max((a - o).abs());
        }
        let tol = SIDE_TOL * (1.0 + spread);
        (s >= -tol, s <= tol)
    }

    pub(crate) fn in_major_side(&self, points: &PointSet, j: usize) -> bool {
        let (u, l) = self.sides(points, j);
        (self.upper_major && u) || (self.lower_major && l)
    }
}

/// Majority-depth counts of every point over all `C(n, d)` hyperplanes.
pub fn majority_counts_all(points: &PointSet, cap: u128) -> Result<Vec<u64>> {
    let n = points.len();
    let d = points.dim();
    check_cap(binomial(n, d).saturating_mul(n as u128), cap)?;
    let counts = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut c = vec![0u64; n];
            for_each_subset_starting_at(n, d, first, |s| {
                if let Some(plane) = MajorityPlane::new(points, s) {
                    for (j, cj) in c.iter_mut().enumerate() {
                        *cj += plane.in_major_side(points, j) as u64;
                    }
                }
            });
            c
        })
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

pub fn exact_majority_depth(points: &PointSet, i: usize) -> Result<DepthEstimate> {
    MajorityExact::new(points).depth(i)
}

/// Exact majority depth. All `C(n, d)` hyperplanes and their major sides are
/// built once on first use; each point evaluation then costs `C(n, d)` side
/// tests.
pub struct MajorityExact<'a> {
    points: &'a PointSet,
    cap: u128,
    planes: OnceLock<Result<Vec<Option<MajorityPlane>>>>,
}

impl<'a> MajorityExact<'a> {
    pub fn new(points: &'a PointSet) -> Self {
        Self::with_cap(points, DEFAULT_NAIVE_CAP)
    }

    pub fn with_cap(points: &'a PointSet, cap: u128) -> Self {
        Self {
            points,
            cap,
            planes: OnceLock::new(),
        }
    }

    fn planes(&self) -> Result<&[Option<MajorityPlane>]> {
        let built = self.planes.get_or_init(|| {
            let n = self.points.len();
            let d = self.points.dim();
            check_cap(binomial(n, d).saturating_mul(n as u128), self.cap)?;
            let per_first: Vec<Vec<Option<MajorityPlane>>> = (0..n)
                .into_par_iter()
                .map(|first| {
                    let mut v = Vec::new();
                    for_each_subset_starting_at(n, d, first, |s| {
                        v.push(MajorityPlane::new(self.points, s));
                    });
                    v
                })
                .collect();
            Ok(per_first.into_iter().flatten().collect())
        });
        built.as_deref().map_err(Clone::clone)
    }
}

impl ExactDepth for MajorityExact<'_> {
    fn cost(&self) -> f64 {
        binomial(self.points.len(), self.points.dim()) as f64
    }

    fn depth(&self, i: usize) -> Result<DepthEstimate> {
        self.points.check_index(i)?;
        let planes = self.planes()?;
        let count = planes
            .iter()
            .flatten()
            .filter(|p| p.in_major_side(self.points, i))
            .count();
        Ok(DepthEstimate {
            point_index: i,
            mean: count as f64 / planes.len() as f64,
            samples: planes.len() as u64,
            exact: true,
        })
    }
}
