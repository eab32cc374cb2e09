use std::cmp::Ordering;

use rayon::prelude::*;

use super::{Answer, ArmSummary, BanditConfig, RoundTrace, RunReport, Task};
use crate::depth::{ApproxDepth, ExactDepth};
use crate::error::Result;
use crate::geometry::PointSet;

/// Indices into `values`, deepest first; ties go to the lower point index.
fn rank_desc(active: &[usize], values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..active.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(Ordering::Equal)
            .then(active[a].cmp(&active[b]))
    });
    order
}

/// Task-specific elimination and answer logic.
trait Strategy {
    /// Arms to retire after a sampling round (`values` aligned with `active`).
    fn observe(&mut self, eps_r: f64, active: &[usize], values: &[f64]) -> Vec<usize>;

    /// Whether the remaining active arms are already decided.
    fn settled(&self, active: &[usize]) -> bool;

    /// Resolves the remaining active arms from their current values.
    fn finish(self: Box<Self>, active: &[usize], values: &[f64]) -> Answer;
}

struct Median;

impl Strategy for Median {
    fn observe(&mut self, eps_r: f64, active: &[usize], values: &[f64]) -> Vec<usize> {
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        active
            .iter()
            .zip(values)
            .filter(|(_, &v)| v < best - eps_r)
            .map(|(&i, _)| i)
            .collect()
    }

    fn settled(&self, active: &[usize]) -> bool {
        active.len() <= 1
    }

    fn finish(self: Box<Self>, active: &[usize], values: &[f64]) -> Answer {
        Answer::Index(active[rank_desc(active, values)[0]])
    }
}

struct TopK {
    k: usize,
    accepted: Vec<usize>,
}

impl Strategy for TopK {
    fn observe(&mut self, eps_r: f64, active: &[usize], values: &[f64]) -> Vec<usize> {
        let need = self.k - self.accepted.len();
        let order = rank_desc(active, values);
        let thresh = values[order[need - 1]];
        let mut retired = Vec::new();
        for (&i, &v) in active.iter().zip(values) {
            if v >= thresh + eps_r {
                self.accepted.push(i);
            }
            if (v - thresh).abs() >= eps_r {
                retired.push(i);
            }
        }
        retired
    }

    fn settled(&self, active: &[usize]) -> bool {
        self.accepted.len() >= self.k || active.len() <= self.k - self.accepted.len()
    }

    fn finish(mut self: Box<Self>, active: &[usize], values: &[f64]) -> Answer {
        let need = self.k - self.accepted.len().min(self.k);
        let order = rank_desc(active, values);
        self.accepted
            .extend(order.into_iter().take(need).map(|j| active[j]));
        self.accepted.sort_unstable();
        Answer::Set(self.accepted)
    }
}

struct CoarseRank {
    sizes: Vec<usize>,
    clusters: Vec<Vec<usize>>,
}

impl CoarseRank {
    fn new(boundaries: &[usize]) -> Self {
        let sizes: Vec<usize> = boundaries.windows(2).map(|w| w[1] - w[0]).collect();
        let clusters = vec![Vec::new(); sizes.len()];
        Self { sizes, clusters }
    }

    /// Remaining capacity per cluster.
    fn capacities(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .zip(&self.clusters)
            .map(|(s, c)| s - c.len())
            .collect()
    }

    /// Cluster owning remaining (1-based) position `pos`.
    fn cluster_at(caps: &[usize], pos: usize) -> usize {
        let mut acc = 0;
        for (c, &cap) in caps.iter().enumerate() {
            acc += cap;
            if acc >= pos {
                return c;
            }
        }
        caps.len() - 1
    }

    /// Distinct cumulative positions strictly inside `1..m`, i.e. the
    /// boundaries the active arms still straddle.
    fn live_boundaries(caps: &[usize], m: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut acc = 0;
        for &cap in caps {
            acc += cap;
            if acc > 0 && acc < m && out.last() != Some(&acc) {
                out.push(acc);
            }
        }
        out
    }
}

impl Strategy for CoarseRank {
    fn observe(&mut self, eps_r: f64, active: &[usize], values: &[f64]) -> Vec<usize> {
        let caps = self.capacities();
        let live = Self::live_boundaries(&caps, active.len());
        let order = rank_desc(active, values);
        let stats: Vec<f64> = live.iter().map(|&p| values[order[p - 1]]).collect();
        let mut retired = Vec::new();
        for (&i, &v) in active.iter().zip(values) {
            if stats.iter().all(|s| (v - s).abs() > eps_r) {
                let below = stats.iter().filter(|&&s| v < s).count();
                let pos = if below == 0 { 1 } else { live[below - 1] + 1 };
                self.clusters[Self::cluster_at(&caps, pos)].push(i);
                retired.push(i);
            }
        }
        retired
    }

    fn settled(&self, active: &[usize]) -> bool {
        Self::live_boundaries(&self.capacities(), active.len()).is_empty()
    }

    fn finish(mut self: Box<Self>, active: &[usize], values: &[f64]) -> Answer {
        let caps = self.capacities();
        for (pos, j) in rank_desc(active, values).into_iter().enumerate() {
            self.clusters[Self::cluster_at(&caps, pos + 1)].push(active[j]);
        }
        for c in &mut self.clusters {
            c.sort_unstable();
        }
        Answer::Clusters(self.clusters)
    }
}

fn strategy_for(task: &Task) -> Box<dyn Strategy> {
    match task {
        Task::Median => Box::new(Median),
        Task::TopK { k } => Box::new(TopK {
            k: *k,
            accepted: Vec::new(),
        }),
        Task::CoarseRank { boundaries } => Box::new(CoarseRank::new(boundaries)),
    }
}

/// Generic adaptive loop over any approximate/exact depth pair.
///
/// Round `r` asks `approx` for accuracy `eps_r / 2` at failure
/// `delta / (2 n r^2)` per arm. If that costs more than
/// `switch_factor * exact_cost`, every surviving arm is evaluated exactly
/// and the task is resolved from exact values. With `epsilon > 0` the loop
/// also stops once `eps_r <= epsilon / 2` and resolves from estimates.
pub fn meta_run(
    points: &PointSet,
    cfg: &BanditConfig,
    approx: &mut dyn ApproxDepth,
    exact: &dyn ExactDepth,
) -> Result<RunReport> {
    let n = points.len();
    cfg.validate(n)?;
    let exact_cost = cfg.exact_cost.unwrap_or_else(|| exact.cost());

    let mut per_point: Vec<ArmSummary> = (0..n)
        .map(|index| ArmSummary {
            index,
            mu_hat: 0.0,
            pulls: 0,
            exact: false,
        })
        .collect();
    let mut retired_round = vec![None; n];
    let mut trace = Vec::new();
    let mut strategy = strategy_for(&cfg.task);
    let mut active: Vec<usize> = (0..n).collect();
    let mut values: Vec<f64> = vec![0.0; n];
    let mut round = 0u32;

    let answer = loop {
        if strategy.settled(&active) {
            break strategy.finish(&active, &values);
        }
        round += 1;
        let eps_r = 0.5f64.powi(round as i32);
        let failure = cfg.delta / (2.0 * n as f64 * (round as f64).powi(2));
        let target = approx.cost(eps_r / 2.0, failure);

        if target > cfg.switch_factor * exact_cost {
            let exact_vals = active
                .par_iter()
                .map(|&i| exact.depth(i).map(|e| e.mean))
                .collect::<Result<Vec<f64>>>()?;
            for (&i, &v) in active.iter().zip(&exact_vals) {
                per_point[i].mu_hat = v;
                per_point[i].exact = true;
            }
            if cfg.record_trace {
                trace.push(RoundTrace {
                    round,
                    epsilon: eps_r,
                    target,
                    exact: true,
                    active: active.clone(),
                    estimates: exact_vals.clone(),
                });
            }
            break strategy.finish(&active, &exact_vals);
        }

        let estimates = approx.refine(round, &active, eps_r / 2.0, failure);
        values = estimates.iter().map(|e| e.mean).collect();
        for e in &estimates {
            per_point[e.point_index].mu_hat = e.mean;
            per_point[e.point_index].pulls = e.samples;
        }
        if cfg.record_trace {
            trace.push(RoundTrace {
                round,
                epsilon: eps_r,
                target,
                exact: false,
                active: active.clone(),
                estimates: values.clone(),
            });
        }

        let retired = strategy.observe(eps_r, &active, &values);
        if !retired.is_empty() {
            let mut gone = vec![false; n];
            for &i in &retired {
                gone[i] = true;
                retired_round[i] = Some(round);
            }
            let (keep_a, keep_v): (Vec<usize>, Vec<f64>) = active
                .iter()
                .zip(&values)
                .filter(|(i, _)| !gone[**i])
                .map(|(&i, &v)| (i, v))
                .unzip();
            active = keep_a;
            values = keep_v;
        }

        if cfg.epsilon > 0.0 && eps_r <= cfg.epsilon / 2.0 && !strategy.settled(&active) {
            break strategy.finish(&active, &values);
        }
    };

    let exact_count = per_point.iter().filter(|a| a.exact).count() as f64;
    let pulled: u64 = per_point.iter().map(|a| a.pulls).sum();
    Ok(RunReport {
        answer,
        per_point,
        rounds: round,
        total_cost_units: pulled as f64 + exact_count * exact_cost,
        exact_cost,
        degenerate_samples: approx.degenerate_samples(),
        retired_round,
        trace,
    })
}
