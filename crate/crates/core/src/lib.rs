//! Dual-multiplier pacing for value-maximizing bidders under a budget and a
//! return-on-spend (ROS) constraint.
//!
//! The core loop lives in [`pacing`]: each round the bidder scales its value by a
//! multiplier derived from two dual variables, observes the auction outcome and
//! takes a multiplicative step on each dual. [`env`] supplies auction streams,
//! [`oracle`] computes the ground-truth benchmarks, [`metrics`] and
//! [`experiments`] turn trajectories into the reported statistics.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auction;
pub mod env;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod invariants;
pub mod metrics;
pub mod oracle;
pub mod pacing;
pub mod rng;

pub use auction::{AuctionSample, BidOutcome, Curve, Mechanism};
pub use env::{
    AdversarialInstance, CampaignLandscape, EmpiricalEnv, Environment, ExponentialSecondPriceEnv,
    SemiSyntheticEnv,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use pacing::{compute_bid, run_episode, simulate, update_duals, DualState, PacerConfig, PacerKind, StepRule, Trajectory};
