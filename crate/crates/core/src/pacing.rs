//! The three pacing architectures as state machines.
//!
//! All three maintain a ROS dual `lambda` and a budget dual `mu` updated by
//! exponentiated-gradient steps from realized auction feedback. They differ only in
//! how the bid multiplier is formed:
//!
//! | kind          | multiplier                              |
//! |---------------|-----------------------------------------|
//! | dual-optimal  | `(1 + lambda) / (mu + lambda)`          |
//! | sequential    | `(1 + lambda) / lambda * 1 / mu`        |
//! | min           | `min((1 + lambda) / lambda, 1 / mu)`    |
//!
//! The submitted bid is `min(multiplier * v, remaining budget)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::auction::{AuctionSample, BidOutcome};
use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PacerKind {
    DualOptimal,
    Sequential,
    Min,
}

impl PacerKind {
    pub const ALL: [PacerKind; 3] = [PacerKind::DualOptimal, PacerKind::Sequential, PacerKind::Min];

    pub fn as_str(self) -> &'static str {
        match self {
            PacerKind::DualOptimal => "dual-optimal",
            PacerKind::Sequential => "sequential",
            PacerKind::Min => "min",
        }
    }
}

impl fmt::Display for PacerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PacerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dual-optimal" => Ok(PacerKind::DualOptimal),
            "sequential" => Ok(PacerKind::Sequential),
            "min" => Ok(PacerKind::Min),
            other => Err(domain(format!(
                "unknown pacer kind {other:?}; expected one of dual-optimal, sequential, min"
            ))),
        }
    }
}

/// Step sizes, initial duals and per-round budget for one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacerConfig {
    pub rho: f64,
    pub alpha: f64,
    pub eta: f64,
    pub lambda_init: f64,
    pub mu_init: f64,
}

impl PacerConfig {
    /// Defaults for horizon `T`: `alpha = eta = 1/sqrt(T)`, `lambda_1 = 1`, `mu_1 = rho`.
    pub fn auto(rho: f64, horizon: usize) -> Self {
        let step = 1.0 / (horizon as f64).sqrt();
        PacerConfig {
            rho,
            alpha: step,
            eta: step,
            lambda_init: 1.0,
            mu_init: rho,
        }
    }

    pub fn with_steps(mut self, alpha: f64, eta: f64) -> Self {
        self.alpha = alpha;
        self.eta = eta;
        self
    }

    pub fn with_init(mut self, lambda_init: f64, mu_init: f64) -> Self {
        self.lambda_init = lambda_init;
        self.mu_init = mu_init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("lambda_init", self.lambda_init),
            ("mu_init", self.mu_init),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(domain(format!("{name} must be positive, got {x}")));
            }
        }
        // Zero step sizes freeze a dual; used to probe failure modes.
        for (name, x) in [("alpha", self.alpha), ("eta", self.eta)] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(domain(format!("{name} must be nonnegative, got {x}")));
            }
        }
        Ok(())
    }
}

/// How a step size depends on the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// `1 / sqrt(T)`.
    #[default]
    Auto,
    /// `c / sqrt(T)`.
    Scaled(f64),
    /// A constant, independent of `T`.
    Fixed(f64),
}

impl StepRule {
    pub fn resolve(self, horizon: usize) -> f64 {
        let root = (horizon as f64).sqrt();
        match self {
            StepRule::Auto => 1.0 / root,
            StepRule::Scaled(c) => c / root,
            StepRule::Fixed(x) => x,
        }
    }
}

/// Live state of a pacer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualState {
    pub lambda: f64,
    pub mu: f64,
    pub remaining_budget: f64,
    /// Initial budget `B = rho * T`.
    pub budget: f64,
    pub rho: f64,
    pub alpha: f64,
    pub eta: f64,
    /// Rounds completed so far.
    pub round: usize,
    /// Running sum of payments.
    pub spent: f64,
    /// First round (1-based) at which `spent + 1 >= budget`.
    pub stopping_round: Option<usize>,
    /// Set once a round's cost exceeded the remaining budget; that round was
    /// zeroed and every later bid is zero.
    pub stopped: bool,
}

impl DualState {
    pub fn new(config: &PacerConfig, horizon: usize) -> Result<Self> {
        config.validate()?;
        if horizon == 0 {
            return Err(domain("horizon must be positive"));
        }
        let budget = config.rho * horizon as f64;
        Ok(DualState {
            lambda: config.lambda_init,
            mu: config.mu_init,
            remaining_budget: budget,
            budget,
            rho: config.rho,
            alpha: config.alpha,
            eta: config.eta,
            round: 0,
            spent: 0.0,
            stopping_round: None,
            stopped: false,
        })
    }

    /// Bid multiplier `k(lambda, mu)` for `kind`, before the budget cap.
    pub fn multiplier(&self, kind: PacerKind) -> Result<f64> {
        let (l, m) = (self.lambda, self.mu);
        match kind {
            PacerKind::DualOptimal => {
                if l < 0.0 || m < 0.0 {
                    return Err(Error::State(format!("negative dual: lambda={l}, mu={m}")));
                }
                if l + m <= 0.0 {
                    return Err(Error::UnboundedMultiplier);
                }
                Ok((1.0 + l) / (m + l))
            }
            PacerKind::Sequential | PacerKind::Min => {
                if !(l > 0.0) || !(m > 0.0) {
                    return Err(Error::State(format!(
                        "{kind} pacing divides by both duals: lambda={l}, mu={m}"
                    )));
                }
                let ros = 1.0 + 1.0 / l;
                let budget = 1.0 / m;
                Ok(if kind == PacerKind::Sequential {
                    ros * budget
                } else {
                    ros.min(budget)
                })
            }
        }
    }
}

/// Bid for a round with value `value`: the multiplier times the value, capped by the
/// remaining budget.
pub fn compute_bid(kind: PacerKind, state: &DualState, value: f64) -> Result<f64> {
    if !(value >= 0.0) {
        return Err(domain(format!("value must be nonnegative, got {value}")));
    }
    if state.stopped {
        return Err(Error::State("pacer has stopped".into()));
    }
    let k = state.multiplier(kind)?;
    let raw = if value == 0.0 { 0.0 } else { k * value };
    Ok(raw.min(state.remaining_budget).max(0.0))
}

/// One mirror-descent step on both duals from the realized outcome.
pub fn update_duals(state: &DualState, outcome: &BidOutcome) -> DualState {
    let ros_grad = outcome.value_gained - outcome.payment;
    let budget_grad = state.rho - outcome.payment;
    let mut next = *state;
    next.lambda = keep_positive(state.lambda, state.lambda * (-state.alpha * ros_grad).exp());
    next.mu = keep_positive(state.mu, state.mu * (-state.eta * budget_grad).exp());
    next.remaining_budget = (state.remaining_budget - outcome.payment).max(0.0);
    next.spent = state.spent + outcome.payment;
    next.round = state.round + 1;
    if next.stopping_round.is_none() && next.spent + 1.0 >= next.budget {
        next.stopping_round = Some(next.round);
    }
    next
}

// Multiplicative updates preserve sign; guard against underflow to exactly zero.
fn keep_positive(prev: f64, x: f64) -> f64 {
    if prev > 0.0 && x <= 0.0 {
        f64::MIN_POSITIVE
    } else {
        x
    }
}

/// Per-round record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: PacerKind,
    pub config: PacerConfig,
    pub initial_budget: f64,
    pub value: Vec<f64>,
    /// Multiplier `k_t` implied by the duals at round `t` (before the budget cap).
    pub multiplier: Vec<f64>,
    pub bid: Vec<f64>,
    pub allocation: Vec<f64>,
    pub payment: Vec<f64>,
    pub value_gained: Vec<f64>,
    /// Duals used to form round `t`'s bid.
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Budget left after round `t`.
    pub remaining_budget: Vec<f64>,
    /// Stopping time: first round with cumulative payment `+ 1 >= B`, or `T`.
    pub stopping_time: usize,
    /// Round (1-based) whose cost overran the remaining budget and was zeroed.
    pub hard_stop: Option<usize>,
}

impl Trajectory {
    fn with_capacity(kind: PacerKind, config: PacerConfig, budget: f64, n: usize) -> Self {
        Trajectory {
            kind,
            config,
            initial_budget: budget,
            value: Vec::with_capacity(n),
            multiplier: Vec::with_capacity(n),
            bid: Vec::with_capacity(n),
            allocation: Vec::with_capacity(n),
            payment: Vec::with_capacity(n),
            value_gained: Vec::with_capacity(n),
            lambda: Vec::with_capacity(n),
            mu: Vec::with_capacity(n),
            remaining_budget: Vec::with_capacity(n),
            stopping_time: n,
            hard_stop: None,
        }
    }

    pub fn horizon(&self) -> usize {
        self.bid.len()
    }

    pub fn final_remaining_budget(&self) -> f64 {
        self.remaining_budget
            .last()
            .copied()
            .unwrap_or(self.initial_budget)
    }
}

fn run_rounds(
    kind: PacerKind,
    config: &PacerConfig,
    horizon: usize,
    mut next_sample: impl FnMut() -> AuctionSample,
) -> Result<Trajectory> {
    let mut state = DualState::new(config, horizon)?;
    let mut traj = Trajectory::with_capacity(kind, *config, state.budget, horizon);
    for t in 0..horizon {
        let sample = next_sample();
        traj.value.push(sample.value);
        traj.lambda.push(state.lambda);
        traj.mu.push(state.mu);
        traj.multiplier.push(state.multiplier(kind)?);
        if state.stopped {
            traj.bid.push(0.0);
            traj.allocation.push(0.0);
            traj.payment.push(0.0);
            traj.value_gained.push(0.0);
            traj.remaining_budget.push(state.remaining_budget);
            continue;
        }
        let bid = compute_bid(kind, &state, sample.value)?;
        let mut outcome = sample.evaluate(bid)?;
        let overran = outcome.payment > state.remaining_budget;
        if overran {
            outcome = BidOutcome {
                bid,
                ..BidOutcome::default()
            };
        }
        state = update_duals(&state, &outcome);
        if overran {
            state.stopped = true;
            traj.hard_stop = Some(t + 1);
        }
        traj.bid.push(bid);
        traj.allocation.push(outcome.allocation);
        traj.payment.push(outcome.payment);
        traj.value_gained.push(outcome.value_gained);
        traj.remaining_budget.push(state.remaining_budget);
    }
    traj.stopping_time = state.stopping_round.unwrap_or(horizon);
    Ok(traj)
}

/// Run `kind` over an explicit stream of samples.
pub fn run_episode(
    kind: PacerKind,
    stream: &[AuctionSample],
    config: &PacerConfig,
) -> Result<Trajectory> {
    if stream.is_empty() {
        return Err(domain("stream is empty"));
    }
    let mut it = stream.iter();
    run_rounds(kind, config, stream.len(), || {
        it.next().expect("stream length checked").clone()
    })
}

/// Run `kind` for `horizon` rounds drawing samples from `env`.
pub fn simulate(
    kind: PacerKind,
    env: &dyn Environment,
    horizon: usize,
    config: &PacerConfig,
    rng: &mut SimRng,
) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(domain("horizon must be positive"));
    }
    run_rounds(kind, config, horizon, || env.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AdversarialInstance, ExponentialSecondPriceEnv};
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn state(lambda: f64, mu: f64, remaining: f64) -> DualState {
        let mut s = DualState::new(&PacerConfig::auto(1.0, 100), 100).unwrap();
        s.lambda = lambda;
        s.mu = mu;
        s.remaining_budget = remaining;
        s
    }

    #[test]
    fn bid_formulas() {
        assert_relative_eq!(compute_bid(PacerKind::DualOptimal, &state(1.0, 0.0, 10.0), 0.5).unwrap(), 1.0);
        assert_relative_eq!(compute_bid(PacerKind::Min, &state(1.0, 0.25, 10.0), 0.3).unwrap(), 0.6);
        assert_relative_eq!(compute_bid(PacerKind::Sequential, &state(1.0, 0.5, 10.0), 1.0).unwrap(), 4.0);
        assert_relative_eq!(compute_bid(PacerKind::Min, &state(1.0, 0.25, 0.1), 0.3).unwrap(), 0.1);
    }

    #[test]
    fn bid_errors_on_nonpositive_duals() {
        assert!(compute_bid(PacerKind::Min, &state(1.0, 0.0, 10.0), 0.3).is_err());
        assert!(compute_bid(PacerKind::Sequential, &state(0.0, 1.0, 10.0), 0.3).is_err());
        assert_eq!(
            compute_bid(PacerKind::DualOptimal, &state(0.0, 0.0, 10.0), 0.3),
            Err(Error::UnboundedMultiplier)
        );
    }

    #[test]
    fn dual_updates() {
        let mut s = state(1.0, 0.5, 10.0);
        s.alpha = 0.5;
        s.eta = 0.1;
        s.rho = 0.5;
        let out = BidOutcome {
            bid: 1.0,
            allocation: 1.0,
            payment: 0.7,
            value_gained: 0.9,
        };
        let n = update_duals(&s, &out);
        assert_relative_eq!(n.lambda, (-0.1f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(n.lambda, 0.904837, epsilon = 1e-6);
        assert_relative_eq!(n.mu, 0.510101, epsilon = 1e-6);
        assert_relative_eq!(n.remaining_budget, 9.3, epsilon = 1e-12);
        assert_eq!(n.round, 1);
    }

    #[test]
    fn dual_fixed_point() {
        let mut s = state(0.7, 0.3, 10.0);
        s.rho = 0.4;
        let out = BidOutcome {
            bid: 1.0,
            allocation: 1.0,
            payment: 0.4,
            value_gained: 0.4,
        };
        let n = update_duals(&s, &out);
        assert_eq!((n.lambda, n.mu), (0.7, 0.3));
    }

    #[test]
    fn min_pacer_constant_second_price_stream() {
        let stream = vec![AuctionSample::second_price(0.5, 0.1); 100];
        let cfg = PacerConfig::auto(1.0, 100).with_init(1.0, 0.1);
        let traj = run_episode(PacerKind::Min, &stream, &cfg).unwrap();
        assert!(traj.allocation.iter().all(|&x| x == 1.0));
        let total: f64 = traj.value_gained.iter().sum();
        assert_relative_eq!(total, 50.0, epsilon = 1e-9);
        let spend: f64 = traj.payment.iter().sum();
        assert!(spend < total);
    }

    #[test]
    fn single_round_cap() {
        let stream = vec![AuctionSample::second_price(1.0, 0.5)];
        for kind in PacerKind::ALL {
            let cfg = PacerConfig::auto(0.3, 1);
            let traj = run_episode(kind, &stream, &cfg).unwrap();
            assert!(traj.payment[0] <= 0.3);
        }
    }

    #[test]
    fn empty_stream_rejected() {
        assert!(run_episode(PacerKind::Min, &[], &PacerConfig::auto(1.0, 1)).is_err());
    }

    #[test]
    fn pacer_kind_parse() {
        assert_eq!("min".parse::<PacerKind>().unwrap(), PacerKind::Min);
        let err = "joint".parse::<PacerKind>().unwrap_err().to_string();
        assert!(err.contains("unknown pacer kind") && err.contains("dual-optimal"));
    }

    #[test]
    fn deterministic_replay() {
        let env = ExponentialSecondPriceEnv::default();
        let cfg = PacerConfig::auto(env.rho, 2000);
        for kind in PacerKind::ALL {
            let a = simulate(kind, &env, 2000, &cfg, &mut stream(5, &[1])).unwrap();
            let b = simulate(kind, &env, 2000, &cfg, &mut stream(5, &[1])).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sequential_on_ros_instance_overspends() {
        let env = AdversarialInstance::ros_binding();
        let t = 10_000;
        let cfg = PacerConfig::auto(env.rho(), t).with_init(1.0, 1.0);
        let traj = simulate(PacerKind::Sequential, &env, t, &cfg, &mut stream(0, &[])).unwrap();
        let spend: f64 = traj.payment.iter().sum();
        let value: f64 = traj.value_gained.iter().sum();
        assert!(spend - value > 0.5 * t as f64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn budget_never_exceeded_and_duals_positive(
            seed in 0u64..1000,
            kind_idx in 0usize..3,
            rho in 0.01f64..1.0,
            alpha in 0.0f64..1.0,
            eta in 0.0f64..1.0,
        ) {
            let kind = PacerKind::ALL[kind_idx];
            let env = ExponentialSecondPriceEnv::new(0.5, 1.0, rho).unwrap();
            let t = 300;
            let cfg = PacerConfig::auto(rho, t).with_steps(alpha, eta);
            let traj = simulate(kind, &env, t, &cfg, &mut stream(seed, &[])).unwrap();
            let spent = traj.initial_budget - traj.final_remaining_budget();
            prop_assert!(spent <= rho * t as f64);
            prop_assert!(traj.remaining_budget.iter().all(|&b| b >= 0.0));
            prop_assert!(traj.lambda.iter().all(|&l| l > 0.0));
            prop_assert!(traj.mu.iter().all(|&m| m > 0.0));
            prop_assert!(traj.remaining_budget.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
