//! Episode and fleet measurements.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exec::pairwise_sum;
use crate::pacing::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    /// Total value collected, `sum v x(b)`.
    pub reward: f64,
    pub spend: f64,
    /// `spend - reward`; negative means slack.
    pub ros_violation: f64,
    pub stopping_time: usize,
    pub endurance_gap: usize,
    /// `max(0, spend / reward - 1)`; `+inf` when reward is zero but spend is not.
    pub relative_ros_error: f64,
    pub benchmark_value: f64,
}

pub fn relative_ros_error(spend: f64, reward: f64) -> f64 {
    if reward > 0.0 {
        (spend / reward - 1.0).max(0.0)
    } else if spend > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// First round (1-based) with `sum_{s <= t} p_s + 1 >= budget`, or `T` if none.
pub fn stopping_time(payments: &[f64], budget: f64) -> usize {
    let mut spent = 0.0;
    for (i, p) in payments.iter().enumerate() {
        spent += p;
        if spent + 1.0 >= budget {
            return i + 1;
        }
    }
    payments.len()
}

pub fn summarize(traj: &Trajectory, benchmark_value: f64) -> EpisodeResult {
    let reward: f64 = traj.value_gained.iter().sum();
    let spend = traj.initial_budget - traj.final_remaining_budget();
    let tau = stopping_time(&traj.payment, traj.initial_budget);
    EpisodeResult {
        reward,
        spend,
        ros_violation: spend - reward,
        stopping_time: tau,
        endurance_gap: traj.horizon() - tau,
        relative_ros_error: relative_ros_error(spend, reward),
        benchmark_value,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretEstimate {
    pub mean_regret: f64,
    /// Normal-approximation 95% interval.
    pub ci: (f64, f64),
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean of `T * opt_per_round - reward` across episodes.
pub fn regret_estimate(
    results: &[EpisodeResult],
    opt_per_round: f64,
    horizon: usize,
) -> Result<RegretEstimate> {
    if results.is_empty() {
        return Err(domain("no episodes to estimate regret from"));
    }
    let target = opt_per_round * horizon as f64;
    let regrets: Vec<f64> = results.iter().map(|r| target - r.reward).collect();
    let (mean, se) = mean_and_se(&regrets);
    let half = if se.is_nan() { f64::INFINITY } else { 1.96 * se };
    Ok(RegretEstimate {
        mean_regret: mean,
        ci: (mean - half, mean + half),
    })
}

/// Relative-error thresholds `0, 0.05, ..., 0.50, inf`.
pub fn default_thresholds() -> Vec<f64> {
    let mut v: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
    v.push(f64::INFINITY);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub threshold: f64,
    /// Fraction of campaigns with relative ROS error at most `threshold`.
    pub fraction: f64,
    /// Their total reward divided by the total benchmark over all campaigns.
    pub cumulative_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub relative_ros_error: f64,
    pub reward: f64,
    pub benchmark: f64,
}

/// Cumulative table over relative-ROS-error buckets.
pub fn bucket_table(results: &[CampaignOutcome], thresholds: &[f64]) -> Vec<BucketRow> {
    let n = results.len();
    let total_benchmark = pairwise_sum(&results.iter().map(|r| r.benchmark).collect::<Vec<_>>());
    thresholds
        .iter()
        .map(|&z| {
            let inside: Vec<&CampaignOutcome> = results
                .iter()
                .filter(|r| r.relative_ros_error <= z)
                .collect();
            let value = pairwise_sum(&inside.iter().map(|r| r.reward).collect::<Vec<_>>());
            BucketRow {
                threshold: z,
                fraction: if n == 0 { 0.0 } else { inside.len() as f64 / n as f64 },
                cumulative_value: if total_benchmark > 0.0 {
                    value / total_benchmark
                } else {
                    0.0
                },
            }
        })
        .collect()
}
