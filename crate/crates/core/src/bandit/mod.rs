//! Successive-elimination bandits over data points.
//!
//! Every point is an arm whose mean is its depth. Rounds halve the target
//! accuracy `eps_r = 2^-r`; active arms share the same random subsets, and
//! an arm leaves the active set once its confidence interval separates it
//! from the decision boundary of the task. When sampling to the next
//! accuracy would cost more than exact evaluation, the survivors are
//! computed exactly instead.

mod engine;

pub use engine::meta_run;

use serde::{Deserialize, Serialize};

use crate::depth::{default_exact, SimplexSampler};
use crate::error::{invalid, Result};
use crate::geometry::PointSet;

/// What the run is asked to find.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Median,
    TopK {
        k: usize,
    },
    /// Boundaries `0 = m_0 < m_1 < ... < m_l = n`; cluster `j` holds the
    /// points of depth rank `m_j + 1 ..= m_{j+1}`.
    CoarseRank {
        boundaries: Vec<usize>,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Median => "median",
            Task::TopK { .. } => "topk",
            Task::CoarseRank { .. } => "rank",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    /// Failure probability, in `(0, 1)`.
    pub delta: f64,
    /// Additive slack; `0` asks for exact identification.
    pub epsilon: f64,
    /// Scale on the per-round sample target (`c_t`).
    pub schedule_scale: f64,
    /// Exact evaluation replaces sampling once the round target exceeds
    /// `switch_factor * exact_cost`.
    pub switch_factor: f64,
    /// Overrides the exact method's own cost when set.
    pub exact_cost: Option<f64>,
    pub task: Task,
    pub seed: u64,
    /// Keep per-round snapshots of the active set in the report.
    #[serde(default)]
    pub record_trace: bool,
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            epsilon: 0.0,
            schedule_scale: 1.0,
            switch_factor: 1.0,
            exact_cost: None,
            task: Task::Median,
            seed: 0,
            record_trace: false,
        }
    }
}

impl BanditConfig {
    pub fn median(delta: f64, seed: u64) -> Self {
        Self {
            delta,
            seed,
            ..Self::default()
        }
    }

    pub fn top_k(k: usize, delta: f64, seed: u64) -> Self {
        Self {
            delta,
            seed,
            task: Task::TopK { k },
            ..Self::default()
        }
    }

    pub fn coarse_rank(boundaries: Vec<usize>, delta: f64, seed: u64) -> Self {
        Self {
            delta,
            seed,
            task: Task::CoarseRank { boundaries },
            ..Self::default()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.schedule_scale > 0.0 && self.schedule_scale.is_finite()) {
            return Err(invalid("schedule scale must be positive"));
        }
        if !(self.switch_factor > 0.0 && self.switch_factor <= 1.0) {
            return Err(invalid(format!(
                "switch factor must lie in (0, 1], got {}",
                self.switch_factor
            )));
        }
        if let Some(e) = self.exact_cost {
            if !(e > 0.0 && e.is_finite()) {
                return Err(invalid("exact cost must be positive"));
            }
        }
        match &self.task {
            Task::Median => {}
            Task::TopK { k } => {
                if *k == 0 || *k >= n {
                    return Err(invalid(format!("k must satisfy 1 <= k < n = {n}, got {k}")));
                }
            }
            Task::CoarseRank { boundaries } => {
                if boundaries.len() < 2
                    || boundaries[0] != 0
                    || *boundaries.last().unwrap() != n
                    || boundaries.windows(2).any(|w| w[0] >= w[1])
                {
                    return Err(invalid(format!(
                        "boundaries must increase strictly from 0 to n = {n}, got {boundaries:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Accuracy and cumulative sample target of one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundSchedule {
    pub round: u32,
    pub epsilon: f64,
    pub target: u64,
}

/// `eps_r = 2^-r`, `t_r = ceil(c_t * 2 eps_r^-2 ln(4 n r^2 / delta))`.
pub fn next_round(prev: Option<&RoundSchedule>, n: usize, delta: f64, scale: f64) -> RoundSchedule {
    let round = prev.map_or(1, |p| p.round + 1);
    let epsilon = 0.5f64.powi(round as i32);
    let r = round as f64;
    let t = scale * 2.0 / (epsilon * epsilon) * (4.0 * n as f64 * r * r / delta).ln();
    RoundSchedule {
        round,
        epsilon,
        target: t.ceil() as u64,
    }
}

/// Final answer of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Index(usize),
    /// Sorted point indices.
    Set(Vec<usize>),
    /// One list of point indices per cluster, deepest cluster first.
    Clusters(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub index: usize,
    pub mu_hat: f64,
    /// Sampled containment checks spent on this point.
    pub pulls: u64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: u32,
    pub epsilon: f64,
    pub target: f64,
    pub exact: bool,
    pub active: Vec<usize>,
    /// Aligned with `active`.
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub answer: Answer,
    pub per_point: Vec<ArmSummary>,
    pub rounds: u32,
    pub total_cost_units: f64,
    pub exact_cost: f64,
    pub degenerate_samples: u64,
    /// Round at whose end each point left the active set by elimination.
    pub retired_round: Vec<Option<u32>>,
    pub trace: Vec<RoundTrace>,
}

impl RunReport {
    pub fn pulls(&self) -> Vec<u64> {
        self.per_point.iter().map(|a| a.pulls).collect()
    }

    pub fn exact_computed(&self) -> Vec<bool> {
        self.per_point.iter().map(|a| a.exact).collect()
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.per_point.iter().map(|a| a.mu_hat).collect()
    }

    /// `max_j mu_hat_j - mu_hat_i` from the final estimates.
    pub fn gap_estimates(&self) -> Vec<f64> {
        let best = self
            .per_point
            .iter()
            .map(|a| a.mu_hat)
            .fold(f64::NEG_INFINITY, f64::max);
        self.per_point.iter().map(|a| best - a.mu_hat).collect()
    }

    pub fn median_index(&self) -> Option<usize> {
        match &self.answer {
            Answer::Index(i) => Some(*i),
            _ => None,
        }
    }
}

fn expect_task(cfg: &BanditConfig, want: &str) -> Result<()> {
    if cfg.task.name() == want {
        Ok(())
    } else {
        Err(invalid(format!(
            "configuration task is {}, expected {want}",
            cfg.task.name()
        )))
    }
}

/// Dispatches on `cfg.task` with Monte-Carlo simplices for approximation and
/// the default exact method.
pub fn run(points: &PointSet, cfg: &BanditConfig) -> Result<RunReport> {
    cfg.validate(points.len())?;
    let mut sampler = SimplexSampler::simplices(points, cfg.seed, cfg.schedule_scale);
    let exact = default_exact(points);
    meta_run(points, cfg, &mut sampler, exact.as_ref())
}

/// Simplicial median by successive elimination.
pub fn adaptive_median(points: &PointSet, cfg: &BanditConfig) -> Result<RunReport> {
    expect_task(cfg, "median")?;
    run(points, cfg)
}

/// The `k` deepest points.
pub fn adaptive_topk(points: &PointSet, cfg: &BanditConfig) -> Result<RunReport> {
    expect_task(cfg, "topk")?;
    run(points, cfg)
}

/// Partition into depth-ordered clusters.
pub fn coarse_rank(points: &PointSet, cfg: &BanditConfig) -> Result<RunReport> {
    expect_task(cfg, "rank")?;
    run(points, cfg)
}
