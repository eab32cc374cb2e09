//! Adaptive simplicial depth.
//!
//! Finds the simplicial median, the `k` deepest points, or a coarse depth
//! ranking of a point set by successive elimination over Monte-Carlo
//! simplex samples, switching individual points to exact evaluation once
//! sampling them further would cost more.
//!
//! ```
//! use depthbandit::{adaptive_median, Answer, BanditConfig, PointSet};
//!
//! let pts = PointSet::from_rows(&[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [1.0, 1.0]]).unwrap();
//! let report = adaptive_median(&pts, &BanditConfig::median(0.05, 7)).unwrap();
//! assert_eq!(report.answer, Answer::Index(3));
//! ```

pub mod analysis;
pub mod bandit;
pub mod cli;
pub mod data;
pub mod depth;
pub mod error;
pub mod geometry;

pub use bandit::{
    adaptive_median, adaptive_topk, coarse_rank, meta_run, next_round, run, Answer, ArmSummary,
    BanditConfig, RoundSchedule, RoundTrace, RunReport, Task,
};
pub use depth::{
    exact_depth_naive, exact_depth_planar, majority_sample, mc_estimate, ApproxDepth, CostModel,
    DepthEstimate, ExactDepth,
};
pub use error::{DepthError, Result};
pub use geometry::{factorize_simplex, BarycentricCoords, PointSet, SimplexFactorization};
