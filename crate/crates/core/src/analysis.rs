//! Gap distributions, power-law fits, pull-count regressions and cost
//! scaling curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::{run, BanditConfig, RunReport};
use crate::depth::binomial;
use crate::error::{invalid, DepthError, Result};
use crate::geometry::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapSource {
    Exact,
    Approximate,
}

/// Gaps `max_j mu_j - mu_i`, sorted ascending, and the same gaps divided by
/// the largest one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub gaps: Vec<f64>,
    pub normalized_gaps: Vec<f64>,
    pub source: GapSource,
}

impl GapProfile {
    pub fn from_depths(depths: &[f64], source: GapSource) -> Result<Self> {
        if depths.len() < 2 {
            return Err(invalid("a gap profile needs at least 2 points"));
        }
        let best = depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut gaps: Vec<f64> = depths.iter().map(|d| best - d).collect();
        gaps.sort_by(f64::total_cmp);
        let max_gap = *gaps.last().unwrap();
        if max_gap <= 0.0 {
            return Err(DepthError::DegenerateProfile);
        }
        let normalized_gaps = gaps.iter().map(|g| g / max_gap).collect();
        Ok(Self {
            gaps,
            normalized_gaps,
            source,
        })
    }

    /// Profile of a run's final estimates. Exact only if every point was
    /// computed exactly.
    pub fn from_report(report: &RunReport) -> Result<Self> {
        let source = if report.per_point.iter().all(|a| a.exact) {
            GapSource::Exact
        } else {
            GapSource::Approximate
        };
        Self::from_depths(&report.estimates(), source)
    }

    /// Concatenates several per-instance profiles (each keeps its own
    /// normalization).
    pub fn pooled(profiles: &[GapProfile]) -> Result<Self> {
        if profiles.is_empty() {
            return Err(invalid("no profiles to pool"));
        }
        let mut pairs: Vec<(f64, f64)> = profiles
            .iter()
            .flat_map(|p| {
                p.gaps
                    .iter()
                    .copied()
                    .zip(p.normalized_gaps.iter().copied())
            })
            .collect();
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
        let source = if profiles.iter().all(|p| p.source == GapSource::Exact) {
            GapSource::Exact
        } else {
            GapSource::Approximate
        };
        Ok(Self {
            gaps: pairs.iter().map(|p| p.0).collect(),
            normalized_gaps: pairs.iter().map(|p| p.1).collect(),
            source,
        })
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }

    /// `(g, F(g))` at each distinct normalized gap, `F(g) = #{gaps <= g} / N`.
    pub fn empirical_cdf(&self) -> Vec<(f64, f64)> {
        let total = self.normalized_gaps.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (k, &g) in self.normalized_gaps.iter().enumerate() {
            let f = (k + 1) as f64 / total;
            match out.last_mut() {
                Some(last) if last.0 == g => last.1 = f,
                _ => out.push((g, f)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_used: usize,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<Regression> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("regression needs at least two paired observations"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(invalid("regressor has zero variance"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(Regression {
        slope,
        intercept: my - slope * mx,
        r_squared,
        n_used: x.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub r_squared: f64,
    pub n_points_used: usize,
}

/// Fits `F(g) = g^alpha` to the empirical CDF of the normalized gaps by
/// least squares on `ln F` against `ln g`, skipping zero gaps.
pub fn fit_power_law(profile: &GapProfile) -> Result<PowerLawFit> {
    let nonzero = profile.normalized_gaps.iter().filter(|&&g| g > 0.0).count();
    if nonzero < 10 {
        return Err(invalid(format!(
            "power-law fit needs at least 10 nonzero gaps, got {nonzero}"
        )));
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = profile
        .empirical_cdf()
        .into_iter()
        .filter(|&(g, _)| g > 0.0)
        .map(|(g, f)| (g.ln(), f.ln()))
        .unzip();
    let reg = linear_regression(&lx, &ly)?;
    if reg.slope <= 0.0 {
        return Err(invalid("fitted exponent is not positive"));
    }
    Ok(PowerLawFit {
        alpha: reg.slope,
        r_squared: reg.r_squared,
        n_points_used: reg.n_used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PullRegression {
    pub fit: Regression,
    /// Arms left out because they were computed exactly.
    pub n_excluded_exact: usize,
}

/// Regresses sampled pulls `T_i` on `exact_gaps_i^-2` over arms that were
/// never computed exactly and have a positive gap.
pub fn pulls_vs_gap(report: &RunReport, exact_gaps: &[f64]) -> Result<PullRegression> {
    pulls_vs_gap_averaged(std::slice::from_ref(report), exact_gaps)
}

/// As [`pulls_vs_gap`] with `T_i` averaged over several runs on the same
/// instance; an arm computed exactly in any run is excluded.
pub fn pulls_vs_gap_averaged(reports: &[RunReport], exact_gaps: &[f64]) -> Result<PullRegression> {
    let n = exact_gaps.len();
    if reports.is_empty() || reports.iter().any(|r| r.per_point.len() != n) {
        return Err(invalid("reports and gaps must cover the same points"));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut excluded = 0;
    for i in 0..n {
        if reports.iter().any(|r| r.per_point[i].exact) {
            excluded += 1;
            continue;
        }
        if exact_gaps[i] <= 0.0 {
            continue;
        }
        let mean = reports
            .iter()
            .map(|r| r.per_point[i].pulls as f64)
            .sum::<f64>()
            / reports.len() as f64;
        x.push(exact_gaps[i].powi(-2));
        y.push(mean);
    }
    if x.len() < 10 {
        return Err(invalid(format!(
            "pull regression needs at least 10 sampled arms, got {}",
            x.len()
        )));
    }
    Ok(PullRegression {
        fit: linear_regression(&x, &y)?,
        n_excluded_exact: excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub costs: Vec<f64>,
    pub mean_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub points: Vec<ScalingPoint>,
    pub fit: Regression,
}

/// Least-squares slope of `ln cost` against `ln n`.
pub fn log_log_fit(ns: &[usize], costs: &[f64]) -> Result<Regression> {
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = costs.iter().map(|c| c.ln()).collect();
    linear_regression(&x, &y)
}

/// Runs `cfg` on `trials` instances per `n` (instance `t` drawn with seed
/// `t`, run seed `cfg.seed + t`) and fits the log-log slope of the mean
/// total cost.
pub fn scaling_curve<G>(
    generator: G,
    n_list: &[usize],
    cfg: &BanditConfig,
    trials: usize,
) -> Result<ScalingCurve>
where
    G: Fn(usize, u64) -> Result<PointSet> + Sync,
{
    if n_list.len() < 3 {
        return Err(invalid("scaling curve needs at least 3 values of n"));
    }
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let costs = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let pts = generator(n, t)?;
                let mut c = cfg.clone();
                c.seed = cfg.seed.wrapping_add(t);
                run(&pts, &c).map(|r| r.total_cost_units)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean_cost = costs.iter().sum::<f64>() / costs.len() as f64;
        points.push(ScalingPoint {
            n,
            costs,
            mean_cost,
        });
    }
    let means: Vec<f64> = points.iter().map(|p| p.mean_cost).collect();
    let fit = log_log_fit(n_list, &means)?;
    Ok(ScalingCurve { points, fit })
}

/// Units spent computing every point exactly: `n * n ln n` with the planar
/// method, `n * C(n, d+1)` by enumeration.
pub fn exact_for_all_cost(n: usize, d: usize, planar: bool) -> f64 {
    if planar && d == 2 {
        let nf = n as f64;
        nf * nf * nf.ln()
    } else {
        n as f64 * binomial(n, d + 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{Answer, ArmSummary};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gap_profile_arithmetic() {
        let p = GapProfile::from_depths(&[1.0, 0.75, 0.75, 0.75], GapSource::Exact).unwrap();
        assert_eq!(p.gaps, vec![0.0, 0.25, 0.25, 0.25]);
        assert_eq!(p.normalized_gaps, vec![0.0, 1.0, 1.0, 1.0]);
        let p = GapProfile::from_depths(&[0.2, 0.4], GapSource::Exact).unwrap();
        assert_eq!(p.normalized_gaps, vec![0.0, 1.0]);
        assert_eq!(p.empirical_cdf(), vec![(0.0, 0.5), (1.0, 1.0)]);
    }

    #[test]
    fn gap_profile_errors() {
        assert_eq!(
            GapProfile::from_depths(&[0.3, 0.3, 0.3], GapSource::Exact),
            Err(DepthError::DegenerateProfile)
        );
        assert!(GapProfile::from_depths(&[0.3], GapSource::Exact).is_err());
    }

    // Inverse-CDF sampling: U^(1/alpha) has CDF g^alpha on [0, 1].
    fn power_law_depths(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut depths: Vec<f64> = (0..n)
            .map(|_| 1.0 - rng.random::<f64>().powf(1.0 / alpha))
            .collect();
        depths.push(1.0);
        depths
    }

    #[test]
    fn recovers_synthetic_exponent() {
        for (alpha, seed) in [(1.5, 1u64), (0.8, 2), (2.5, 3)] {
            let p =
                GapProfile::from_depths(&power_law_depths(alpha, 10_000, seed), GapSource::Exact)
                    .unwrap();
            let fit = fit_power_law(&p).unwrap();
            assert!(
                (fit.alpha - alpha).abs() <= 0.05 * alpha,
                "alpha {alpha}: fitted {}",
                fit.alpha
            );
            assert!(fit.r_squared > 0.99);
        }
    }

    #[test]
    fn power_law_needs_ten_gaps() {
        let p = GapProfile::from_depths(&[1.0, 0.9, 0.8, 0.7], GapSource::Exact).unwrap();
        assert!(fit_power_law(&p).is_err());
    }

    #[test]
    fn regression_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let r = linear_regression(&x, &[3.0, 5.0, 7.0, 9.0]).unwrap();
        assert_abs_diff_eq!(r.slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.intercept, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.r_squared, 1.0, epsilon = 1e-12);
        assert!(linear_regression(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    fn fake_report(pulls: &[u64], exact: &[bool]) -> RunReport {
        RunReport {
            answer: Answer::Index(0),
            per_point: pulls
                .iter()
                .zip(exact)
                .enumerate()
                .map(|(index, (&p, &e))| ArmSummary {
                    index,
                    mu_hat: 0.0,
                    pulls: p,
                    exact: e,
                })
                .collect(),
            rounds: 1,
            total_cost_units: 0.0,
            exact_cost: 100.0,
            degenerate_samples: 0,
            retired_round: vec![None; pulls.len()],
            trace: Vec::new(),
        }
    }

    #[test]
    fn pull_regression_excludes_exact_arms() {
        let gaps: Vec<f64> = (0..15).map(|i| 0.02 * i as f64).collect();
        let pulls: Vec<u64> = gaps
            .iter()
            .map(|g| if *g > 0.0 { (3.0 / (g * g)) as u64 } else { 90 })
            .collect();
        let mut exact = vec![false; 15];
        exact[0] = true;
        exact[1] = true;
        let r = pulls_vs_gap(&fake_report(&pulls, &exact), &gaps).unwrap();
        assert_eq!(r.n_excluded_exact, 2);
        assert_eq!(r.fit.n_used, 13);
        assert!(r.fit.r_squared > 0.999);
        assert_eq!(r.n_excluded_exact, exact.iter().filter(|&&e| e).count());
    }

    #[test]
    fn pull_regression_rejects_constant_gaps() {
        let gaps = vec![0.1; 12];
        let r = fake_report(&[5; 12], &[false; 12]);
        assert!(pulls_vs_gap(&r, &gaps).is_err());
        let r = fake_report(&[5; 12], &[true; 12]);
        assert!(pulls_vs_gap(&r, &(0..12).map(|i| i as f64).collect::<Vec<_>>()).is_err());
    }

    #[test]
    fn exact_cost_baselines() {
        let ns = [100usize, 150, 200];
        let brute: Vec<f64> = ns
            .iter()
            .map(|&n| exact_for_all_cost(n, 2, false))
            .collect();
        let slope = log_log_fit(&ns, &brute).unwrap().slope;
        assert!((slope - 4.0).abs() < 0.1, "brute slope {slope}");
        let ns = [500usize, 1000, 2000, 4000];
        let planar: Vec<f64> = ns.iter().map(|&n| exact_for_all_cost(n, 2, true)).collect();
        let slope = log_log_fit(&ns, &planar).unwrap().slope;
        assert!((1.9..=2.2).contains(&slope), "planar slope {slope}");
    }

    #[test]
    fn scaling_curve_is_monotone_on_small_sizes() {
        let cfg = BanditConfig::median(0.05, 0);
        let curve = scaling_curve(
            |n, seed| crate::data::gaussian_points(n, 2, seed),
            &[50, 100, 200],
            &cfg,
            3,
        )
        .unwrap();
        assert!(curve
            .points
            .windows(2)
            .all(|w| w[1].mean_cost >= w[0].mean_cost));
        assert!(curve.fit.slope > 0.0);
        assert!(scaling_curve(
            |n, s| crate::data::gaussian_points(n, 2, s),
            &[50, 60],
            &cfg,
            1
        )
        .is_err());
    }
}
