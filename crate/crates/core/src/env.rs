//! Generators of auction streams.
//!
//! * [`ExponentialSecondPriceEnv`]: second-price auction with exponential values and
//!   competing bids.
//! * [`AdversarialInstance`]: the deterministic point-mass instance with
//!   `v = 1`, `x(b) = min(b/4, 1)`, `p(b) = min(b^2/8, 2)`, in a ROS-binding and a
//!   budget-binding variant.
//! * [`SemiSyntheticEnv`]: Poisson clicks and noisy cost on a [`CampaignLandscape`].
//! * [`EmpiricalEnv`]: uniform over an explicit list of samples.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::auction::{interpolate, AuctionSample, BidOutcome, Curve, LandscapeQuote, Mechanism};
use crate::error::{domain, Result};
use crate::rng::{exponential, open_unit, poisson_quantile, truncated_normal, SimRng};

/// A distribution over [`AuctionSample`]s with a per-round budget.
pub trait Environment: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Per-round budget `rho = B / T`.
    fn rho(&self) -> f64;

    fn sample(&self, rng: &mut SimRng) -> AuctionSample;

    /// Finite weighted support, when the distribution has one. Expectations over
    /// such environments are computed exactly.
    fn support(&self) -> Option<Vec<(f64, AuctionSample)>> {
        None
    }

    /// Exact `(E[v x(k v)], E[p(k v)])` when known in closed form.
    fn expected_outcome(&self, _k: f64) -> Option<(f64, f64)> {
        None
    }

    /// Draw a stream of `horizon` samples.
    fn stream(&self, horizon: usize, rng: &mut SimRng) -> Vec<AuctionSample> {
        (0..horizon).map(|_| self.sample(rng)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialSecondPriceEnv {
    pub value_mean: f64,
    pub competing_bid_mean: f64,
    pub rho: f64,
}

impl Default for ExponentialSecondPriceEnv {
    fn default() -> Self {
        ExponentialSecondPriceEnv {
            value_mean: 0.5,
            competing_bid_mean: 1.0,
            rho: 9.0 / 16.0,
        }
    }
}

impl ExponentialSecondPriceEnv {
    pub fn new(value_mean: f64, competing_bid_mean: f64, rho: f64) -> Result<Self> {
        if !(value_mean > 0.0 && competing_bid_mean > 0.0 && rho > 0.0) {
            return Err(domain("exponential env needs positive means and rho"));
        }
        Ok(ExponentialSecondPriceEnv {
            value_mean,
            competing_bid_mean,
            rho,
        })
    }
}

impl Environment for ExponentialSecondPriceEnv {
    fn name(&self) -> String {
        "exponential".into()
    }

    fn rho(&self) -> f64 {
        self.rho
    }

    fn sample(&self, rng: &mut SimRng) -> AuctionSample {
        let v = exponential(rng, self.value_mean);
        let d = exponential(rng, self.competing_bid_mean);
        AuctionSample {
            value: v,
            mechanism: Mechanism::SecondPrice { competing_bid: d },
            normalized: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdversarialVariant {
    /// `rho_hat = 1.9`: the ROS constraint binds at `k = 2`.
    RosBinding,
    /// `rho_tilde = 1 / (200 mu0^4)`: the budget binds at `k = 1 / (5 mu0^2)`.
    BudgetBinding { mu0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversarialInstance {
    pub variant: AdversarialVariant,
}

impl AdversarialInstance {
    pub const ROS_BINDING_RHO: f64 = 1.9;

    pub fn ros_binding() -> Self {
        AdversarialInstance {
            variant: AdversarialVariant::RosBinding,
        }
    }

    pub fn budget_binding(mu0: f64) -> Result<Self> {
        if !(mu0 > 0.0) {
            return Err(domain("mu0 must be positive"));
        }
        Ok(AdversarialInstance {
            variant: AdversarialVariant::BudgetBinding { mu0 },
        })
    }

    /// The fixed round: `v = 1`, `x(b) = min(b/4, 1)`, `p(b) = min(b^2/8, 2)`.
    pub fn point_sample() -> AuctionSample {
        AuctionSample::parametric(
            1.0,
            Curve::Linear {
                slope: 0.25,
                cap: 1.0,
            },
            Curve::Quadratic {
                coef: 0.125,
                cap: 2.0,
            },
            false,
        )
    }

    /// Best achievable per-round value under the instance's binding constraint.
    pub fn optimal_value_per_round(&self) -> f64 {
        match self.variant {
            AdversarialVariant::RosBinding => 0.5,
            AdversarialVariant::BudgetBinding { mu0 } => 1.0 / (20.0 * mu0 * mu0),
        }
    }
}

impl Environment for AdversarialInstance {
    fn name(&self) -> String {
        match self.variant {
            AdversarialVariant::RosBinding => "adversarial-ros".into(),
            AdversarialVariant::BudgetBinding { mu0 } => format!("adversarial-budget:{mu0}"),
        }
    }

    fn rho(&self) -> f64 {
        match self.variant {
            AdversarialVariant::RosBinding => Self::ROS_BINDING_RHO,
            AdversarialVariant::BudgetBinding { mu0 } => 1.0 / (200.0 * mu0.powi(4)),
        }
    }

    fn sample(&self, _rng: &mut SimRng) -> AuctionSample {
        Self::point_sample()
    }

    fn support(&self) -> Option<Vec<(f64, AuctionSample)>> {
        Some(vec![(1.0, Self::point_sample())])
    }
}

/// Uniform distribution over an explicit list of samples.
#[derive(Debug, Clone)]
pub struct EmpiricalEnv {
    pub samples: Vec<AuctionSample>,
    pub rho: f64,
}

impl Environment for EmpiricalEnv {
    fn name(&self) -> String {
        format!("empirical[{}]", self.samples.len())
    }

    fn rho(&self) -> f64 {
        self.rho
    }

    fn sample(&self, rng: &mut SimRng) -> AuctionSample {
        let i = rng.random_range(0..self.samples.len());
        self.samples[i].clone()
    }

    fn support(&self) -> Option<Vec<(f64, AuctionSample)>> {
        let w = 1.0 / self.samples.len() as f64;
        Some(self.samples.iter().map(|s| (w, s.clone())).collect())
    }
}

/// Aggregated daily bidding landscape of one campaign.
///
/// JSON shape: `{"tcpa", "pconv_mean", "T", "budget", "knots": [[k, clicks, cost], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "LandscapeJson", into = "LandscapeJson")]
pub struct CampaignLandscape {
    pub tcpa: f64,
    pub pconv_mean: f64,
    pub horizon: usize,
    pub budget: f64,
    clicks: Vec<(f64, f64)>,
    cost: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LandscapeJson {
    tcpa: f64,
    pconv_mean: f64,
    #[serde(rename = "T")]
    horizon: usize,
    budget: f64,
    knots: Vec<[f64; 3]>,
}

impl TryFrom<LandscapeJson> for CampaignLandscape {
    type Error = crate::Error;

    fn try_from(j: LandscapeJson) -> Result<Self> {
        CampaignLandscape::new(j.tcpa, j.pconv_mean, j.horizon, j.budget, &j.knots)
    }
}

impl From<CampaignLandscape> for LandscapeJson {
    fn from(c: CampaignLandscape) -> Self {
        let knots = c
            .clicks
            .iter()
            .zip(&c.cost)
            .map(|(&(k, cl), &(_, co))| [k, cl, co])
            .collect();
        LandscapeJson {
            tcpa: c.tcpa,
            pconv_mean: c.pconv_mean,
            horizon: c.horizon,
            budget: c.budget,
            knots,
        }
    }
}

impl CampaignLandscape {
    /// Build from `[k, clicks_per_day, cost_per_day]` knots. An origin knot is added
    /// if the first knot is not at `k = 0`.
    pub fn new(
        tcpa: f64,
        pconv_mean: f64,
        horizon: usize,
        budget: f64,
        knots: &[[f64; 3]],
    ) -> Result<Self> {
        if !(tcpa > 0.0) {
            return Err(domain("tcpa must be positive"));
        }
        if !(0.0..=1.0).contains(&pconv_mean) {
            return Err(domain("pconv_mean must lie in [0, 1]"));
        }
        if horizon == 0 {
            return Err(domain("T must be positive"));
        }
        if !(budget > 0.0) {
            return Err(domain("budget must be positive"));
        }
        if knots.is_empty() {
            return Err(domain("landscape needs at least one knot"));
        }
        let mut pts: Vec<[f64; 3]> = knots.to_vec();
        if pts[0][0] > 0.0 {
            pts.insert(0, [0.0, 0.0, 0.0]);
        }
        if pts[0] != [0.0, 0.0, 0.0] {
            return Err(domain("landscape must start at clicks(0) = cost(0) = 0"));
        }
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b[0] > a[0]) {
                return Err(domain("knot multipliers must be strictly increasing"));
            }
            if b[1] < a[1] || b[2] < a[2] {
                return Err(domain("clicks and cost must be nondecreasing in k"));
            }
        }
        if pts.iter().any(|p| p.iter().any(|x| !x.is_finite() || *x < 0.0)) {
            return Err(domain("knots must be finite and nonnegative"));
        }
        Ok(CampaignLandscape {
            tcpa,
            pconv_mean,
            horizon,
            budget,
            clicks: pts.iter().map(|p| (p[0], p[1])).collect(),
            cost: pts.iter().map(|p| (p[0], p[2])).collect(),
        })
    }

    pub fn knots(&self) -> Vec<[f64; 3]> {
        self.clicks
            .iter()
            .zip(&self.cost)
            .map(|(&(k, cl), &(_, co))| [k, cl, co])
            .collect()
    }

    pub fn clicks_per_day(&self, k: f64) -> f64 {
        interpolate(&self.clicks, k)
    }

    pub fn cost_per_day(&self, k: f64) -> f64 {
        interpolate(&self.cost, k)
    }

    pub fn cost_per_click(&self, k: f64) -> f64 {
        let c = self.clicks_per_day(k);
        if c > 0.0 {
            self.cost_per_day(k) / c
        } else {
            0.0
        }
    }

    /// Mean value of one click, `tcpa * pconv_mean`.
    pub fn value_per_click(&self) -> f64 {
        self.tcpa * self.pconv_mean
    }

    pub fn rho(&self) -> f64 {
        self.budget / self.horizon as f64
    }

    /// Expected per-round conversion value at multiplier `k`.
    pub fn conv_per_round(&self, k: f64) -> f64 {
        self.value_per_click() * self.clicks_per_day(k) / self.horizon as f64
    }

    /// Expected per-round spend at multiplier `k`.
    pub fn spend_per_round(&self, k: f64) -> f64 {
        self.cost_per_day(k) / self.horizon as f64
    }

    /// Largest knot multiplier; the landscape is flat beyond it.
    pub fn k_max(&self) -> f64 {
        self.clicks.last().map(|p| p.0).unwrap_or(0.0)
    }

    /// Same landscape over a different number of rounds per day.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(domain("T must be positive"));
        }
        let mut c = self.clone();
        c.horizon = horizon;
        Ok(c)
    }
}

/// Truncated Gaussian multiplicative noise with mean one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub sd: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            sd: 0.1,
            lo: 0.0,
            hi: 2.0,
        }
    }
}

impl NoiseParams {
    pub fn draw(&self, rng: &mut SimRng) -> f64 {
        truncated_normal(rng, 1.0, self.sd, self.lo, self.hi)
    }
}

/// One realized semi-synthetic round.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiSyntheticDraw {
    pub value: f64,
    pub clicks: u64,
    pub cost_per_click: f64,
    pub cost_noise: f64,
    pub outcome: BidOutcome,
}

impl SemiSyntheticDraw {
    pub fn as_sample(&self) -> AuctionSample {
        AuctionSample {
            value: self.value,
            mechanism: Mechanism::LandscapeDraw {
                clicks: self.clicks,
                cost_per_click: self.cost_per_click * self.cost_noise,
            },
            normalized: false,
        }
    }
}

/// Draw one round of the campaign's generative model at multiplier `k`.
pub fn sample_semi_synthetic(
    campaign: &CampaignLandscape,
    k: f64,
    rng: &mut SimRng,
    noise: &NoiseParams,
) -> Result<SemiSyntheticDraw> {
    if !(k >= 0.0) {
        return Err(domain("multiplier must be nonnegative"));
    }
    let value = campaign.tcpa * campaign.pconv_mean * noise.draw(rng);
    let u = open_unit(rng);
    let cost_noise = noise.draw(rng);
    let rate = campaign.clicks_per_day(k) / campaign.horizon as f64;
    let clicks = poisson_quantile(rate, u);
    let cpc = campaign.cost_per_click(k);
    let payment = clicks as f64 * cpc * cost_noise;
    Ok(SemiSyntheticDraw {
        value,
        clicks,
        cost_per_click: cpc,
        cost_noise,
        outcome: BidOutcome {
            bid: k * value,
            allocation: clicks as f64,
            payment,
            value_gained: value * clicks as f64,
        },
    })
}

/// Semi-synthetic environment on a campaign landscape. Each sample carries its own
/// pre-drawn randomness and is evaluated at whatever bid the pacer submits.
#[derive(Debug, Clone)]
pub struct SemiSyntheticEnv {
    pub campaign: Arc<CampaignLandscape>,
    pub noise: NoiseParams,
    pub label: String,
}

impl SemiSyntheticEnv {
    pub fn new(campaign: CampaignLandscape, label: impl Into<String>) -> Self {
        SemiSyntheticEnv {
            campaign: Arc::new(campaign),
            noise: NoiseParams::default(),
            label: label.into(),
        }
    }
}

impl Environment for SemiSyntheticEnv {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn rho(&self) -> f64 {
        self.campaign.rho()
    }

    fn sample(&self, rng: &mut SimRng) -> AuctionSample {
        // Same draw order as `sample_semi_synthetic`.
        let value = self.campaign.value_per_click() * self.noise.draw(rng);
        let click_uniform = open_unit(rng);
        let cost_noise = self.noise.draw(rng);
        AuctionSample {
            value,
            mechanism: Mechanism::Landscape(LandscapeQuote {
                campaign: Arc::clone(&self.campaign),
                click_uniform,
                cost_noise,
            }),
            normalized: false,
        }
    }

    fn expected_outcome(&self, k: f64) -> Option<(f64, f64)> {
        Some((self.campaign.conv_per_round(k), self.campaign.spend_per_round(k)))
    }
}

/// Shape of generated campaigns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCampaignParams {
    /// Number of knots including the origin.
    pub knots: usize,
    /// Rounds per day.
    pub horizon: usize,
    /// Largest knot multiplier.
    pub k_max: f64,
    /// Range of the click-curve exponent `a` in `clicks(k) ~ k^a`. Values in `(0, 1]`
    /// give a concave spend-to-conversion frontier and a ROS crossing at `1 + 1/a`.
    pub exponent: (f64, f64),
    /// Range of expected clicks per round at `k = 1`.
    pub clicks_per_round: (f64, f64),
    pub tcpa: (f64, f64),
    pub pconv_mean: (f64, f64),
    /// Log-uniform range of the budget relative to the spend at the ROS crossing.
    /// A range straddling 1 splits campaigns between budget- and ROS-binding.
    pub budget_ratio: (f64, f64),
}

impl Default for SyntheticCampaignParams {
    fn default() -> Self {
        SyntheticCampaignParams {
            knots: 12,
            horizon: 144,
            k_max: 8.0,
            exponent: (0.35, 1.0),
            clicks_per_round: (0.3, 1.5),
            tcpa: (1.0, 2.0),
            pconv_mean: (0.1, 0.5),
            budget_ratio: (0.4, 2.5),
        }
    }
}

fn uniform_in(rng: &mut SimRng, (lo, hi): (f64, f64)) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Generate a campaign whose cost curve is the truthful price of its click curve
/// for a bidder with value `tcpa * pconv_mean` per click.
pub fn generate_synthetic_campaign(
    rng: &mut SimRng,
    params: &SyntheticCampaignParams,
) -> Result<CampaignLandscape> {
    if params.knots < 2 {
        return Err(domain(format!(
            "knot count must be at least 2, got {}",
            params.knots
        )));
    }
    if params.horizon == 0 || !(params.k_max > 0.0) {
        return Err(domain("horizon and k_max must be positive"));
    }
    let a = uniform_in(rng, params.exponent);
    if !(a > 0.0) {
        return Err(domain("click exponent must be positive"));
    }
    let r1 = uniform_in(rng, params.clicks_per_round);
    let tcpa = uniform_in(rng, params.tcpa);
    let pconv = uniform_in(rng, params.pconv_mean);
    let ratio = {
        let (lo, hi) = params.budget_ratio;
        uniform_in(rng, (lo.ln(), hi.ln())).exp()
    };
    let t = params.horizon as f64;
    let vbar = tcpa * pconv;
    let clicks = |k: f64| r1 * t * k.powf(a);
    // Truthful price of a power-law click curve: v (k c(k) - int_0^k c).
    let cost = |k: f64| vbar * r1 * t * k.powf(a + 1.0) * a / (a + 1.0);
    let n = params.knots;
    let knots: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let k = params.k_max * i as f64 / (n - 1) as f64;
            [k, clicks(k), cost(k)]
        })
        .collect();
    let k_ros = (1.0 + 1.0 / a).min(params.k_max);
    let budget = ratio * cost(k_ros);
    CampaignLandscape::new(tcpa, pconv, params.horizon, budget, &knots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::bid_grid;
    use crate::rng::stream;

    #[test]
    fn adversarial_point_sample() {
        let env = AdversarialInstance::ros_binding();
        let mut rng = stream(0, &[0]);
        let s = env.sample(&mut rng);
        assert_eq!(s.value, 1.0);
        let o = s.evaluate(2.0).unwrap();
        assert_eq!((o.allocation, o.payment), (0.5, 0.5));
    }

    #[test]
    fn adversarial_max_slack_is_one_eighth_at_one() {
        let s = AdversarialInstance::point_sample();
        let (best_b, best) = bid_grid(6.0, 1e-3)
            .into_iter()
            .map(|b| (b, s.evaluate(b).unwrap().ros_gradient()))
            .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert!((best - 0.125).abs() < 1e-9);
        assert!((best_b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn adversarial_ros_binding_points() {
        let s = AdversarialInstance::point_sample();
        assert!(s.evaluate(2.0).unwrap().ros_gradient().abs() < 1e-15);
        let kb = (8.0f64 * 1.9).sqrt();
        assert!((1.9 - s.payment_at(kb)).abs() < 1e-12);
    }

    #[test]
    fn exponential_same_seed_same_sample() {
        let env = ExponentialSecondPriceEnv::default();
        let a = env.sample(&mut stream(42, &[]));
        let b = env.sample(&mut stream(42, &[]));
        assert_eq!(a, b);
    }

    #[test]
    fn exponential_value_mean() {
        let env = ExponentialSecondPriceEnv::default();
        let mut rng = stream(42, &[1]);
        let n = 1_000_000;
        let mean = (0..n).map(|_| env.sample(&mut rng).value).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "{mean}");
    }

    #[test]
    fn envs_pass_truthfulness() {
        let grid = bid_grid(8.0, 0.01);
        let mut rng = stream(9, &[]);
        let exp = ExponentialSecondPriceEnv::default();
        for _ in 0..50 {
            assert!(exp.sample(&mut rng).check_truthfulness(&grid, 0.02).unwrap());
        }
        let adv = AdversarialInstance::budget_binding(1.0).unwrap();
        assert!(adv.sample(&mut rng).check_truthfulness(&grid, 0.02).unwrap());
    }

    fn toy_campaign(horizon: usize) -> CampaignLandscape {
        CampaignLandscape::new(
            2.0,
            0.25,
            horizon,
            100.0,
            &[[0.0, 0.0, 0.0], [1.0, 144.0, 50.0], [2.0, 200.0, 120.0]],
        )
        .unwrap()
    }

    #[test]
    fn poisson_rate_from_landscape() {
        let c = toy_campaign(144);
        assert_eq!(c.clicks_per_day(1.0) / c.horizon as f64, 1.0);
    }

    #[test]
    fn zero_multiplier_draws_nothing() {
        let c = toy_campaign(144);
        let mut rng = stream(1, &[]);
        for _ in 0..1000 {
            let d = sample_semi_synthetic(&c, 0.0, &mut rng, &NoiseParams::default()).unwrap();
            assert_eq!(d.clicks, 0);
            assert_eq!(d.outcome.payment, 0.0);
            assert_eq!(d.outcome.value_gained, 0.0);
        }
    }

    #[test]
    fn cost_noise_moments() {
        let mut rng = stream(2, &[]);
        let noise = NoiseParams::default();
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let z = noise.draw(&mut rng);
            assert!((0.0..=2.0).contains(&z));
            sum += z;
        }
        assert!((sum / n as f64 - 1.0).abs() < 0.005);
    }

    #[test]
    fn expected_spend_matches_landscape() {
        let c = toy_campaign(144);
        let mut rng = stream(3, &[]);
        let k = 1.5;
        let n = 400_000;
        let mut pays = Vec::with_capacity(n);
        for _ in 0..n {
            pays.push(sample_semi_synthetic(&c, k, &mut rng, &NoiseParams::default()).unwrap().outcome.payment);
        }
        let mean = pays.iter().sum::<f64>() / n as f64;
        let var = pays.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let expected = c.spend_per_round(k);
        assert!((mean - expected).abs() < 4.0 * se, "{mean} vs {expected} (se {se})");
    }

    #[test]
    fn landscape_json_roundtrip_and_validation() {
        let c = toy_campaign(144);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"T\":144"));
        let back: CampaignLandscape = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"tcpa":1,"pconv_mean":0.1,"T":10,"budget":1,"knots":[[0,0,0],[1,5,2],[2,4,3]]}"#;
        assert!(serde_json::from_str::<CampaignLandscape>(bad).is_err());
        let extra = r#"{"tcpa":1,"pconv_mean":0.1,"T":10,"budget":1,"knots":[[1,5,2]],"x":1}"#;
        assert!(serde_json::from_str::<CampaignLandscape>(extra).is_err());
    }

    #[test]
    fn generated_campaign_monotone_and_concave() {
        let params = SyntheticCampaignParams {
            knots: 10,
            ..Default::default()
        };
        for seed in 0..50 {
            let c = generate_synthetic_campaign(&mut stream(seed, &[]), &params).unwrap();
            let knots = c.knots();
            assert_eq!(knots.len(), 10);
            for w in knots.windows(2) {
                assert!(w[1][1] >= w[0][1] && w[1][2] >= w[0][2]);
            }
            // Conversion vs spend slopes are nonincreasing along the knots.
            let slopes: Vec<f64> = knots
                .windows(2)
                .map(|w| (w[1][1] - w[0][1]) * c.value_per_click() / (w[1][2] - w[0][2]))
                .collect();
            for s in slopes.windows(2) {
                assert!(s[1] <= s[0] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn generator_deterministic_and_validated() {
        let p = SyntheticCampaignParams::default();
        let a = generate_synthetic_campaign(&mut stream(11, &[]), &p).unwrap();
        let b = generate_synthetic_campaign(&mut stream(11, &[]), &p).unwrap();
        assert_eq!(a, b);
        let bad = SyntheticCampaignParams { knots: 0, ..p };
        assert!(generate_synthetic_campaign(&mut stream(11, &[]), &bad).is_err());
    }

    #[test]
    fn landscape_quote_matches_semi_synthetic_draw() {
        let env = SemiSyntheticEnv::new(toy_campaign(144), "toy");
        let k = 1.3;
        for seed in 0..200 {
            let s = env.sample(&mut stream(seed, &[]));
            let d = sample_semi_synthetic(&env.campaign, k, &mut stream(seed, &[]), &env.noise).unwrap();
            let o = s.evaluate(k * s.value).unwrap();
            assert_eq!(o.allocation, d.outcome.allocation);
            assert!((o.payment - d.outcome.payment).abs() <= 1e-12 * (1.0 + d.outcome.payment));
        }
    }
}
