//! Simplicial (and majority) depth: exact evaluation, Monte-Carlo sampling
//! and the cost model that decides between them.

mod exact;
mod sampling;

pub use exact::{
    binomial, exact_depth_naive, exact_depth_planar, exact_depths_all, exact_majority_depth,
    majority_counts_all, naive_counts_all, planar_contained_count, simplicial_count_naive,
    MajorityExact, NaiveSimplicial, PlanarSimplicial, DEFAULT_NAIVE_CAP,
};
pub use sampling::{
    majority_sample, mc_estimate, round_rng, MajorityKernel, MajoritySampler, SampleCounts,
    SampleKernel, SimplexKernel, SimplexSampler, SubsetSampler,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::PointSet;

/// Depth of one point, either exact or a running Monte-Carlo mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthEstimate {
    pub point_index: usize,
    pub mean: f64,
    pub samples: u64,
    pub exact: bool,
}

/// Containment-check units for exact and approximate evaluation of one
/// point. One barycentric check (or one hyperplane side test) is one unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub exact_cost: f64,
    /// Multiplier on the Hoeffding sample count (`1.0` is the worst-case
    /// guarantee; `0.1` the tighter practical schedule).
    pub schedule_scale: f64,
}

impl CostModel {
    pub fn new(exact_cost: f64, schedule_scale: f64) -> Self {
        Self {
            exact_cost,
            schedule_scale,
        }
    }

    /// Samples needed for an `(accuracy, failure)` Hoeffding estimate of a
    /// `[0, 1]` mean: `ceil(scale * ln(2 / failure) / (2 accuracy^2))`.
    pub fn approx_cost(&self, accuracy: f64, failure: f64) -> f64 {
        hoeffding_samples(accuracy, failure, self.schedule_scale)
    }
}

pub(crate) fn hoeffding_samples(accuracy: f64, failure: f64, scale: f64) -> f64 {
    (scale * (2.0 / failure).ln() / (2.0 * accuracy * accuracy)).ceil()
}

/// Exact depth plug-in.
pub trait ExactDepth: Sync {
    /// Units billed for one exact evaluation.
    fn cost(&self) -> f64;
    fn depth(&self, i: usize) -> Result<DepthEstimate>;
}

/// Approximate depth plug-in. Implementations keep state across rounds so
/// successive calls can refine earlier estimates.
pub trait ApproxDepth {
    /// Units needed to estimate one point to `accuracy` with probability at
    /// least `1 - failure`.
    fn cost(&self, accuracy: f64, failure: f64) -> f64;

    /// Estimates every point in `active` to the requested accuracy.
    /// `round` identifies the random stream used for fresh draws.
    fn refine(
        &mut self,
        round: u32,
        active: &[usize],
        accuracy: f64,
        failure: f64,
    ) -> Vec<DepthEstimate>;

    /// Degenerate (rank-deficient) subsets drawn so far.
    fn degenerate_samples(&self) -> u64 {
        0
    }
}

/// Exact simplicial-depth method matching the data: the planar angular
/// method for `d = 2`, full enumeration otherwise.
pub fn default_exact(points: &PointSet) -> Box<dyn ExactDepth + '_> {
    if points.dim() == 2 {
        Box::new(PlanarSimplicial::new(points))
    } else {
        Box::new(NaiveSimplicial::new(points))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hoeffding_count_shrinks_with_looser_targets() {
        let c = CostModel::new(100.0, 1.0);
        assert!(c.approx_cost(0.1, 0.01) > c.approx_cost(0.2, 0.01));
        assert!(c.approx_cost(0.1, 0.01) > c.approx_cost(0.1, 0.1));
        // ln(2 / 1.25e-4) / (2 * 0.0625) = 8 ln 16000
        let direct = (8.0 * 16000f64.ln()).ceil();
        assert_eq!(c.approx_cost(0.25, 1.25e-4), direct);
    }

    #[test]
    fn default_exact_picks_planar_in_2d() {
        let pts = PointSet::from_rows(&[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [1.0, 1.0]]).unwrap();
        let e = default_exact(&pts);
        assert!((e.cost() - 4.0 * 4f64.ln()).abs() < 1e-12);
        let pts3 = PointSet::new((0..15).map(|v| (v * v % 7) as f64).collect(), 5, 3).unwrap();
        assert_eq!(default_exact(&pts3).cost(), 5.0);
    }
}
