//! Ex-post guarantees checked on every simulated episode.
//!
//! For all pacers: duals stay positive, the budget is never exceeded, and rounds
//! after a hard stop are empty. For the min pacer, additionally:
//!
//! * per round, whenever `p <= b x`: `v x - p >= -v x / lambda_t` and
//!   `rho - p >= rho - v x / mu_t`;
//! * with `alpha >= 1/sqrt(T)` and `lambda_1 <= T`: total ROS violation is at most
//!   `2 sqrt(T) ln(T / lambda_1)`;
//! * with `eta = 1/sqrt(T)` and `mu_1 in (0, 1/rho + 1]`: `mu_t <= 1/rho + 1` up to
//!   the stopping time, and `T - tau <= sqrt(T)/rho * ln(10 (1/rho + 1) / mu_1)`.

use crate::error::{Error, Result};
use crate::pacing::{PacerKind, Trajectory};

/// Which bounds were applicable to an episode, and their values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantReport {
    pub ros_violation: f64,
    pub ros_bound: Option<f64>,
    pub mu_cap: Option<f64>,
    pub max_mu_before_stop: f64,
    pub endurance_gap: usize,
    pub endurance_bound: Option<f64>,
    pub gradient_steps_checked: usize,
}

const SLACK: f64 = 1e-9;

pub fn ros_violation_bound(horizon: usize, lambda_init: f64) -> f64 {
    let t = horizon as f64;
    2.0 * t.sqrt() * (t / lambda_init).ln()
}

pub fn mu_cap(rho: f64) -> f64 {
    1.0 / rho + 1.0
}

pub fn endurance_bound(horizon: usize, rho: f64, mu_init: f64) -> f64 {
    let t = horizon as f64;
    t.sqrt() / rho * (10.0 * mu_cap(rho) / mu_init).ln()
}

fn violated(msg: String) -> Error {
    Error::Invariant(msg)
}

/// Check every applicable invariant, failing on the first violation.
pub fn check_trajectory(traj: &Trajectory) -> Result<InvariantReport> {
    let t = traj.horizon();
    let cfg = &traj.config;
    let sqrt_t = (t as f64).sqrt();
    let mut report = InvariantReport::default();

    if traj.lambda.iter().any(|&l| !(l > 0.0)) {
        return Err(violated("lambda left the positive half-line".into()));
    }
    if cfg.mu_init > 0.0 && traj.mu.iter().any(|&m| !(m > 0.0)) {
        return Err(violated("mu left the positive half-line".into()));
    }
    let spent = traj.initial_budget - traj.final_remaining_budget();
    if spent > traj.initial_budget || traj.remaining_budget.iter().any(|&b| b < 0.0) {
        return Err(violated(format!(
            "spend {spent} exceeds budget {}",
            traj.initial_budget
        )));
    }
    if traj.remaining_budget.windows(2).any(|w| w[1] > w[0]) {
        return Err(violated("remaining budget increased".into()));
    }
    if let Some(h) = traj.hard_stop {
        let after = h..t;
        if after.clone().any(|i| traj.payment[i] != 0.0 || traj.allocation[i] != 0.0) {
            return Err(violated("activity after hard stop".into()));
        }
    }

    let reward: f64 = traj.value_gained.iter().sum();
    report.ros_violation = spent - reward;
    report.endurance_gap = t - traj.stopping_time;

    if traj.kind != PacerKind::Min {
        return Ok(report);
    }

    for i in 0..t {
        let (b, x, p, vx) = (
            traj.bid[i],
            traj.allocation[i],
            traj.payment[i],
            traj.value_gained[i],
        );
        if b == 0.0 || p > b * x * (1.0 + SLACK) {
            continue;
        }
        report.gradient_steps_checked += 1;
        let ros_floor = -vx / traj.lambda[i];
        let ros_tol = SLACK * (1.0 + p.abs() + vx.abs());
        if vx - p < ros_floor - ros_tol {
            return Err(violated(format!(
                "round {}: ROS gradient {} below -v x / lambda = {ros_floor}",
                i + 1,
                vx - p
            )));
        }
        let budget_floor = cfg.rho - vx / traj.mu[i];
        if cfg.rho - p < budget_floor - ros_tol {
            return Err(violated(format!(
                "round {}: budget gradient {} below rho - v x / mu = {budget_floor}",
                i + 1,
                cfg.rho - p
            )));
        }
    }

    if cfg.alpha * sqrt_t >= 1.0 - 1e-12 && cfg.lambda_init <= t as f64 {
        let bound = ros_violation_bound(t, cfg.lambda_init);
        report.ros_bound = Some(bound);
        if report.ros_violation > bound {
            return Err(violated(format!(
                "ROS violation {} exceeds 2 sqrt(T) ln(T/lambda_1) = {bound}",
                report.ros_violation
            )));
        }
    }

    let cap = mu_cap(cfg.rho);
    if (cfg.eta * sqrt_t - 1.0).abs() < 1e-9 && cfg.mu_init > 0.0 && cfg.mu_init <= cap {
        report.mu_cap = Some(cap);
        let upto = traj.stopping_time.min(t);
        report.max_mu_before_stop = traj.mu[..upto].iter().copied().fold(0.0, f64::max);
        if report.max_mu_before_stop > cap {
            return Err(violated(format!(
                "mu reached {} above the cap 1/rho + 1 = {cap}",
                report.max_mu_before_stop
            )));
        }
        let bound = endurance_bound(t, cfg.rho, cfg.mu_init);
        report.endurance_bound = Some(bound);
        if report.endurance_gap as f64 > bound {
            return Err(violated(format!(
                "budget ran out {} rounds early, bound {bound}",
                report.endurance_gap
            )));
        }
    }
    Ok(report)
}
