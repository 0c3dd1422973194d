//! Per-round auction abstraction: a value, an allocation function and a payment
//! function, plus a numerical truthfulness check.

use std::sync::Arc;

use crate::env::CampaignLandscape;
use crate::error::{domain, Result};
use crate::rng::poisson_quantile;

/// A nonnegative scalar function of the bid.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    /// `min(slope * b, cap)`
    Linear { slope: f64, cap: f64 },
    /// `min(coef * b^2, cap)`
    Quadratic { coef: f64, cap: f64 },
    /// Linear interpolation through `(b, y)` knots sorted by `b`; flat outside them.
    Piecewise(Arc<[(f64, f64)]>),
}

impl Curve {
    pub fn eval(&self, b: f64) -> f64 {
        match self {
            Curve::Linear { slope, cap } => (slope * b).min(*cap),
            Curve::Quadratic { coef, cap } => (coef * b * b).min(*cap),
            Curve::Piecewise(knots) => interpolate(knots, b),
        }
    }
}

pub(crate) fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let Some(first) = knots.first() else {
        return 0.0;
    };
    if x <= first.0 {
        return first.1;
    }
    let i = knots.partition_point(|&(k, _)| k <= x);
    if i >= knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// One semi-synthetic round with its randomness drawn up front, so that clicks and
/// cost are deterministic, monotone functions of the submitted bid.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeQuote {
    pub campaign: Arc<CampaignLandscape>,
    /// Uniform driving the Poisson click count through its inverse CDF.
    pub click_uniform: f64,
    /// Multiplicative cost noise for this round.
    pub cost_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    /// Single-slot second-price auction against the highest competing bid `d`.
    SecondPrice { competing_bid: f64 },
    /// Explicit allocation and payment curves.
    Parametric { allocation: Curve, payment: Curve },
    /// A realized semi-synthetic outcome: what happened at the bid that was placed.
    LandscapeDraw { clicks: u64, cost_per_click: f64 },
    /// A semi-synthetic round that can be evaluated at any bid.
    Landscape(LandscapeQuote),
}

/// The draw `(v_t, x_t, p_t)` for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionSample {
    pub value: f64,
    pub mechanism: Mechanism,
    /// When set, value, allocation and payment are expected to lie in `[0, 1]`.
    pub normalized: bool,
}

/// The realized outcome of one bid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BidOutcome {
    pub bid: f64,
    pub allocation: f64,
    pub payment: f64,
    pub value_gained: f64,
}

impl BidOutcome {
    /// ROS gradient `v * x(b) - p(b)` for this round.
    pub fn ros_gradient(&self) -> f64 {
        self.value_gained - self.payment
    }
}

impl AuctionSample {
    pub fn second_price(value: f64, competing_bid: f64) -> Self {
        AuctionSample {
            value,
            mechanism: Mechanism::SecondPrice { competing_bid },
            normalized: true,
        }
    }

    pub fn parametric(value: f64, allocation: Curve, payment: Curve, normalized: bool) -> Self {
        AuctionSample {
            value,
            mechanism: Mechanism::Parametric { allocation, payment },
            normalized,
        }
    }

    /// Allocation at bid `b` (no validation).
    pub fn allocation_at(&self, b: f64) -> f64 {
        match &self.mechanism {
            Mechanism::SecondPrice { competing_bid } => {
                if b >= *competing_bid {
                    1.0
                } else {
                    0.0
                }
            }
            Mechanism::Parametric { allocation, .. } => allocation.eval(b),
            Mechanism::LandscapeDraw { clicks, .. } => {
                if b > 0.0 {
                    *clicks as f64
                } else {
                    0.0
                }
            }
            Mechanism::Landscape(q) => landscape_clicks(q, self.value, b) as f64,
        }
    }

    /// Payment at bid `b` (no validation).
    pub fn payment_at(&self, b: f64) -> f64 {
        match &self.mechanism {
            Mechanism::SecondPrice { competing_bid } => {
                if b >= *competing_bid {
                    *competing_bid
                } else {
                    0.0
                }
            }
            Mechanism::Parametric { payment, .. } => payment.eval(b),
            Mechanism::LandscapeDraw {
                clicks,
                cost_per_click,
            } => {
                if b > 0.0 {
                    *clicks as f64 * cost_per_click
                } else {
                    0.0
                }
            }
            Mechanism::Landscape(q) => {
                let clicks = landscape_clicks(q, self.value, b);
                if clicks == 0 {
                    return 0.0;
                }
                let k = b / self.value;
                clicks as f64 * q.campaign.cost_per_click(k) * q.cost_noise
            }
        }
    }

    /// Evaluate the round at `bid`.
    pub fn evaluate(&self, bid: f64) -> Result<BidOutcome> {
        if !(bid >= 0.0) {
            return Err(domain(format!("bid must be nonnegative, got {bid}")));
        }
        let allocation = self.allocation_at(bid);
        let payment = self.payment_at(bid);
        Ok(BidOutcome {
            bid,
            allocation,
            payment,
            value_gained: self.value * allocation,
        })
    }

    /// Numerical truthfulness check on a sorted bid grid: allocation must be
    /// nondecreasing and the payment must match
    /// `p(0) + b x(b) - integral_0^b x(z) dz` (trapezoid rule on the grid) within
    /// `tolerance` at every grid point.
    pub fn check_truthfulness(&self, bid_grid: &[f64], tolerance: f64) -> Result<bool> {
        if bid_grid.is_empty() {
            return Err(domain("bid grid is empty"));
        }
        if !(tolerance > 0.0) {
            return Err(domain("tolerance must be positive"));
        }
        if bid_grid.windows(2).any(|w| w[1] < w[0]) || bid_grid[0] < 0.0 {
            return Err(domain("bid grid must be sorted ascending and nonnegative"));
        }
        let p0 = self.payment_at(0.0);
        let mut prev_b = 0.0;
        let mut prev_x = self.allocation_at(0.0);
        let mut integral = 0.0;
        for &b in bid_grid {
            let x = self.allocation_at(b);
            if x < prev_x - 1e-12 {
                return Ok(false);
            }
            integral += 0.5 * (x + prev_x) * (b - prev_b);
            let myerson = p0 + b * x - integral;
            if (self.payment_at(b) - myerson).abs() > tolerance {
                return Ok(false);
            }
            prev_b = b;
            prev_x = x;
        }
        Ok(true)
    }
}

fn landscape_clicks(q: &LandscapeQuote, value: f64, bid: f64) -> u64 {
    if !(bid > 0.0) || !(value > 0.0) {
        return 0;
    }
    let k = bid / value;
    let rate = q.campaign.clicks_per_day(k) / q.campaign.horizon as f64;
    poisson_quantile(rate, q.click_uniform)
}

/// Evenly spaced grid `0, step, 2 step, ..., hi`.
pub fn bid_grid(hi: f64, step: f64) -> Vec<f64> {
    let n = (hi / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_sided_sample() -> AuctionSample {
        AuctionSample::parametric(
            1.0,
            Curve::Linear { slope: 0.25, cap: 1.0 },
            Curve::Quadratic { coef: 0.125, cap: 2.0 },
            false,
        )
    }

    #[test]
    fn second_price_win_and_loss() {
        let s = AuctionSample::second_price(0.5, 0.4);
        let win = s.evaluate(0.6).unwrap();
        assert_eq!(win.allocation, 1.0);
        assert_eq!(win.payment, 0.4);
        assert_eq!(win.value_gained, 0.5);
        let lose = s.evaluate(0.3).unwrap();
        assert_eq!((lose.allocation, lose.payment, lose.value_gained), (0.0, 0.0, 0.0));
    }

    #[test]
    fn second_price_tie_wins() {
        let s = AuctionSample::second_price(0.5, 0.4);
        let tie = s.evaluate(0.4).unwrap();
        assert_eq!(tie.allocation, 1.0);
        assert_eq!(tie.payment, 0.4);
    }

    #[test]
    fn parametric_two_sided_curves() {
        let out = two_sided_sample().evaluate(2.0).unwrap();
        assert_relative_eq!(out.allocation, 0.5);
        assert_relative_eq!(out.payment, 0.5);
        assert_relative_eq!(out.value_gained, 0.5);
    }

    #[test]
    fn negative_bid_rejected() {
        let s = AuctionSample::second_price(0.5, 0.4);
        assert!(s.evaluate(-0.1).is_err());
        assert!(s.evaluate(f64::NAN).is_err());
    }

    #[test]
    fn truthfulness_checks() {
        let sp = AuctionSample::second_price(0.5, 0.4);
        assert!(sp.check_truthfulness(&bid_grid(1.0, 0.01), 0.02).unwrap());
        let grid = bid_grid(4.0, 0.01);
        assert!(two_sided_sample().check_truthfulness(&grid, 0.02).unwrap());
        let overpriced = AuctionSample::parametric(
            1.0,
            Curve::Linear { slope: 0.25, cap: 1.0 },
            Curve::Linear { slope: 1.0, cap: f64::INFINITY },
            false,
        );
        assert!(!overpriced.check_truthfulness(&grid, 0.02).unwrap());
        assert!(sp.check_truthfulness(&[], 0.02).is_err());
    }

    #[test]
    fn decreasing_allocation_is_not_truthful() {
        let s = AuctionSample::parametric(
            1.0,
            Curve::Piecewise(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)].into()),
            Curve::Linear { slope: 0.0, cap: 0.0 },
            true,
        );
        assert!(!s.check_truthfulness(&bid_grid(2.0, 0.1), 0.02).unwrap());
    }

    #[test]
    fn piecewise_interpolation() {
        let c = Curve::Piecewise(vec![(0.0, 0.0), (2.0, 4.0), (4.0, 5.0)].into());
        assert_eq!(c.eval(1.0), 2.0);
        assert_eq!(c.eval(3.0), 4.5);
        assert_eq!(c.eval(10.0), 5.0);
    }

    proptest! {
        #[test]
        fn second_price_pays_at_most_bid(v in 0.0f64..1.0, d in 0.0f64..1.0, b in 0.0f64..2.0) {
            let s = AuctionSample::second_price(v, d);
            let out = s.evaluate(b).unwrap();
            prop_assert!(out.payment <= out.bid * out.allocation);
            prop_assert!(out.allocation >= 0.0 && out.allocation <= 1.0);
            prop_assert_eq!(out, s.evaluate(b).unwrap());
        }

        #[test]
        fn two_sided_curves_monotone_and_bounded(b0 in 0.0f64..6.0, db in 0.0f64..2.0) {
            let s = two_sided_sample();
            let lo = s.evaluate(b0).unwrap();
            let hi = s.evaluate(b0 + db).unwrap();
            prop_assert!(hi.allocation >= lo.allocation);
            prop_assert!(lo.payment <= lo.bid * lo.allocation + 1e-12);
        }
    }
}
