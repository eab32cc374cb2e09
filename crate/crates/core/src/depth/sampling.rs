use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::MajorityPlane;
use super::{hoeffding_samples, ApproxDepth, DepthEstimate};
use crate::geometry::{PointSet, SimplexFactorization, DEFAULT_CONTAINMENT_TOL, DEFAULT_PIVOT_TOL};

/// Subsets evaluated per parallel task.
const CHUNK: usize = 64;

/// One random-subset indicator per active point.
pub trait SampleKernel: Sync {
    /// Size of each random subset drawn from the data.
    fn subset_size(&self, points: &PointSet) -> usize;

    /// Adds the indicator for `subset` (sorted, distinct) to `hits` for each
    /// point in `active`. Returns `false` if the subset was degenerate.
    fn accumulate(
        &self,
        points: &PointSet,
        subset: &[usize],
        active: &[usize],
        hits: &mut [u64],
    ) -> bool;
}

/// Closed-simplex membership on `d + 1` random vertices.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimplexKernel;

impl SampleKernel for SimplexKernel {
    fn subset_size(&self, points: &PointSet) -> usize {
        points.dim() + 1
    }

    fn accumulate(
        &self,
        points: &PointSet,
        subset: &[usize],
        active: &[usize],
        hits: &mut [u64],
    ) -> bool {
        let f = SimplexFactorization::factor_sorted(points, subset.to_vec(), DEFAULT_PIVOT_TOL);
        let inside = f.batch_contains(points, active, DEFAULT_CONTAINMENT_TOL);
        for (h, b) in hits.iter_mut().zip(inside) {
            *h += b as u64;
        }
        !f.is_singular()
    }
}

/// Membership in a major closed side of the hyperplane through `d` random
/// points.
#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityKernel;

impl SampleKernel for MajorityKernel {
    fn subset_size(&self, points: &PointSet) -> usize {
        points.dim()
    }

    fn accumulate(
        &self,
        points: &PointSet,
        subset: &[usize],
        active: &[usize],
        hits: &mut [u64],
    ) -> bool {
        match MajorityPlane::new(points, subset) {
            Some(plane) => {
                for (h, &j) in hits.iter_mut().zip(active) {
                    *h += plane.in_major_side(points, j) as u64;
                }
                true
            }
            None => false,
        }
    }
}

/// Per-point success counts from a batch of random subsets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampleCounts {
    /// `hits[j]` belongs to `active[j]`.
    pub hits: Vec<u64>,
    pub samples: u64,
    pub degenerate: u64,
}

impl SampleCounts {
    /// Containment checks performed (one per subset per active point).
    pub fn cost_units(&self) -> u64 {
        self.samples * self.hits.len() as u64
    }
}

fn draw_subsets<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, count: usize) -> Vec<usize> {
    let mut flat = Vec::with_capacity(count * k);
    for _ in 0..count {
        let start = flat.len();
        flat.extend(sample_indices(rng, n, k));
        flat[start..].sort_unstable();
    }
    flat
}

/// Draws `num_new` uniformly random subsets (sequentially from `rng`) and
/// evaluates every one against all active points. Subsets are evaluated in
/// parallel; counts are integer sums, so the result does not depend on the
/// number of workers.
pub fn sample_with<K: SampleKernel, R: Rng + ?Sized>(
    kernel: &K,
    points: &PointSet,
    active: &[usize],
    num_new: usize,
    rng: &mut R,
) -> SampleCounts {
    let k = kernel.subset_size(points);
    let flat = draw_subsets(rng, points.len(), k, num_new);
    let m = active.len();
    if m == 0 {
        return SampleCounts {
            hits: Vec::new(),
            samples: num_new as u64,
            degenerate: 0,
        };
    }
    let (hits, degenerate) = flat
        .par_chunks(k * CHUNK)
        .map(|chunk| {
            let mut hits = vec![0u64; m];
            let mut degenerate = 0u64;
            for subset in chunk.chunks_exact(k) {
                if !kernel.accumulate(points, subset, active, &mut hits) {
                    degenerate += 1;
                }
            }
            (hits, degenerate)
        })
        .reduce(
            || (vec![0u64; m], 0),
            |(mut a, da), (b, db)| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                (a, da + db)
            },
        );
    SampleCounts {
        hits,
        samples: num_new as u64,
        degenerate,
    }
}

/// Monte-Carlo simplicial depth: `num_new` random simplices shared by all
/// active points.
pub fn mc_estimate<R: Rng + ?Sized>(
    points: &PointSet,
    active: &[usize],
    num_new: usize,
    rng: &mut R,
) -> SampleCounts {
    sample_with(&SimplexKernel, points, active, num_new, rng)
}

/// Monte-Carlo majority depth: `num_new` random hyperplanes shared by all
/// active points.
pub fn majority_sample<R: Rng + ?Sized>(
    points: &PointSet,
    active: &[usize],
    num_new: usize,
    rng: &mut R,
) -> SampleCounts {
    sample_with(&MajorityKernel, points, active, num_new, rng)
}

/// Random stream for one round, a function of `(seed, round)` only.
pub fn round_rng(seed: u64, round: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round as u64);
    rng
}

/// Cumulative sampler with subsets shared across arms. Each refinement
/// tops the common sample count up to the Hoeffding target and every
/// estimate uses all samples drawn so far.
pub struct SubsetSampler<'a, K> {
    points: &'a PointSet,
    kernel: K,
    seed: u64,
    schedule_scale: f64,
    drawn: u64,
    hits: Vec<u64>,
    degenerate: u64,
}

pub type SimplexSampler<'a> = SubsetSampler<'a, SimplexKernel>;
pub type MajoritySampler<'a> = SubsetSampler<'a, MajorityKernel>;

impl<'a, K: SampleKernel> SubsetSampler<'a, K> {
    pub fn new(points: &'a PointSet, kernel: K, seed: u64, schedule_scale: f64) -> Self {
        Self {
            points,
            kernel,
            seed,
            schedule_scale,
            drawn: 0,
            hits: vec![0; points.len()],
            degenerate: 0,
        }
    }

    pub fn samples_drawn(&self) -> u64 {
        self.drawn
    }
}

impl<'a> SimplexSampler<'a> {
    pub fn simplices(points: &'a PointSet, seed: u64, schedule_scale: f64) -> Self {
        Self::new(points, SimplexKernel, seed, schedule_scale)
    }
}

impl<'a> MajoritySampler<'a> {
    pub fn hyperplanes(points: &'a PointSet, seed: u64, schedule_scale: f64) -> Self {
        Self::new(points, MajorityKernel, seed, schedule_scale)
    }
}

impl<K: SampleKernel> ApproxDepth for SubsetSampler<'_, K> {
    fn cost(&self, accuracy: f64, failure: f64) -> f64 {
        hoeffding_samples(accuracy, failure, self.schedule_scale)
    }

    fn refine(
        &mut self,
        round: u32,
        active: &[usize],
        accuracy: f64,
        failure: f64,
    ) -> Vec<DepthEstimate> {
        let target = self.cost(accuracy, failure) as u64;
        if target > self.drawn {
            let mut rng = round_rng(self.seed, round);
            let fresh = (target - self.drawn) as usize;
            let counts = sample_with(&self.kernel, self.points, active, fresh, &mut rng);
            for (&i, h) in active.iter().zip(&counts.hits) {
                self.hits[i] += h;
            }
            self.degenerate += counts.degenerate;
            self.drawn = target;
        }
        active
            .iter()
            .map(|&i| DepthEstimate {
                point_index: i,
                mean: if self.drawn == 0 {
                    0.0
                } else {
                    self.hits[i] as f64 / self.drawn as f64
                },
                samples: self.drawn,
                exact: false,
            })
            .collect()
    }

    fn degenerate_samples(&self) -> u64 {
        self.degenerate
    }
}
