//! Ground-truth quantities for an environment: expected constraint gradients,
//! their crossing points, the Lagrangian dual function, the fluid benchmark on a
//! landscape, and an exact offline optimum for very short streams.

use serde::{Deserialize, Serialize};

use crate::auction::{AuctionSample, Curve, Mechanism};
use crate::env::{CampaignLandscape, Environment};
use crate::error::{domain, Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::rng::stream;

/// Monte Carlo settings. Samples are drawn in fixed-size chunks, each from its own
/// seeded stream, so estimates do not depend on the executor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub n_samples: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo {
            n_samples: 1_000_000,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl MonteCarlo {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        MonteCarlo {
            n_samples,
            seed,
            ..Default::default()
        }
    }
}

const CHUNK: usize = 8192;

/// First and second moments of `(v x(k v), p(k v))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutcomeMoments {
    pub n: usize,
    pub mean_value: f64,
    pub mean_payment: f64,
    pub var_value: f64,
    pub var_payment: f64,
    pub cov: f64,
    /// True when the moments were computed without sampling.
    pub exact: bool,
}

impl OutcomeMoments {
    /// Standard error of the mean of `a * v x + b * p`.
    pub fn se_of(&self, a: f64, b: f64) -> f64 {
        if self.exact || self.n < 2 {
            return 0.0;
        }
        let var = a * a * self.var_value + b * b * self.var_payment + 2.0 * a * b * self.cov;
        (var.max(0.0) / self.n as f64).sqrt()
    }
}

#[derive(Clone, Copy, Default)]
struct ChunkSums {
    v: f64,
    p: f64,
    vv: f64,
    pp: f64,
    vp: f64,
}

/// Moments of the outcome at multiplier `k` (bid `k v`).
pub fn outcome_moments(env: &dyn Environment, k: f64, mc: &MonteCarlo) -> Result<OutcomeMoments> {
    if !(k >= 0.0) {
        return Err(domain("multiplier must be nonnegative"));
    }
    if let Some(support) = env.support() {
        let mut m = OutcomeMoments {
            n: support.len(),
            exact: true,
            ..Default::default()
        };
        for (w, s) in &support {
            let o = s.evaluate(k * s.value)?;
            m.mean_value += w * o.value_gained;
            m.mean_payment += w * o.payment;
        }
        return Ok(m);
    }
    if let Some((v, p)) = env.expected_outcome(k) {
        return Ok(OutcomeMoments {
            n: 0,
            mean_value: v,
            mean_payment: p,
            exact: true,
            ..Default::default()
        });
    }
    if mc.n_samples == 0 {
        return Err(domain("n_samples must be positive"));
    }
    let chunks = mc.n_samples.div_ceil(CHUNK);
    let sums: Vec<ChunkSums> = mc.exec.map_range(chunks, |c| {
        let mut rng = stream(mc.seed, &[c as u64, 0x6d63]);
        let len = CHUNK.min(mc.n_samples - c * CHUNK);
        let mut s = ChunkSums::default();
        for _ in 0..len {
            let sample = env.sample(&mut rng);
            let b = k * sample.value;
            let v = sample.value * sample.allocation_at(b);
            let p = sample.payment_at(b);
            s.v += v;
            s.p += p;
            s.vv += v * v;
            s.pp += p * p;
            s.vp += v * p;
        }
        s
    });
    let n = mc.n_samples as f64;
    let total = |f: fn(&ChunkSums) -> f64| pairwise_sum(&sums.iter().map(f).collect::<Vec<_>>());
    let (sv, sp) = (total(|s| s.v), total(|s| s.p));
    let (svv, spp, svp) = (total(|s| s.vv), total(|s| s.pp), total(|s| s.vp));
    let mean_value = sv / n;
    let mean_payment = sp / n;
    let denom = (n - 1.0).max(1.0);
    Ok(OutcomeMoments {
        n: mc.n_samples,
        mean_value,
        mean_payment,
        var_value: (svv - n * mean_value * mean_value) / denom,
        var_payment: (spp - n * mean_payment * mean_payment) / denom,
        cov: (svp - n * mean_value * mean_payment) / denom,
        exact: false,
    })
}

/// Expected budget and ROS gradients at multiplier `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub k: f64,
    /// `rho - E[p(k v)]`
    pub budget: f64,
    /// `E[v x(k v) - p(k v)]`
    pub ros: f64,
    pub se_budget: f64,
    pub se_ros: f64,
}

pub fn expected_gradients(
    env: &dyn Environment,
    rho: f64,
    k: f64,
    mc: &MonteCarlo,
) -> Result<GradientEstimate> {
    let m = outcome_moments(env, k, mc)?;
    Ok(GradientEstimate {
        k,
        budget: rho - m.mean_payment,
        ros: m.mean_value - m.mean_payment,
        se_budget: m.se_of(0.0, 1.0),
        se_ros: m.se_of(1.0, -1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    Budget,
    Ros,
}

impl CurveKind {
    fn name(self) -> &'static str {
        match self {
            CurveKind::Budget => "budget",
            CurveKind::Ros => "ROS",
        }
    }

    fn pick(self, g: &GradientEstimate) -> (f64, f64) {
        match self {
            CurveKind::Budget => (g.budget, g.se_budget),
            CurveKind::Ros => (g.ros, g.se_ros),
        }
    }
}

/// A located zero of one gradient curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub k: f64,
    /// Delta-method standard error of `k` from the Monte Carlo noise in the curve.
    pub se: f64,
    /// Finite-difference slope of the curve at `k`.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossings {
    pub budget: Crossing,
    pub ros: Crossing,
    pub k_max: f64,
}

impl Crossings {
    /// `min(k_B, k_R)`.
    pub fn k_star(&self) -> f64 {
        self.budget.k.min(self.ros.k)
    }

    pub fn binding(&self) -> Binding {
        if self.budget.k <= self.ros.k {
            Binding::Budget
        } else {
            Binding::Ros
        }
    }

    /// Optimal duals `(lambda*, mu*)`: `(0, 1/k_B)` when the budget binds, else
    /// `(1/(k_R - 1), 0)`.
    pub fn optimal_duals(&self) -> (f64, f64) {
        match self.binding() {
            Binding::Budget => (0.0, 1.0 / self.budget.k),
            _ => (1.0 / (self.ros.k - 1.0), 0.0),
        }
    }
}

/// Scan range `[0, 4 max(1, 1/rho)]` used for crossing searches.
pub fn default_k_max(rho: f64) -> f64 {
    4.0 * (1.0f64).max(1.0 / rho)
}

fn scan_grid(k_max: f64) -> Vec<f64> {
    let mut ks: Vec<f64> = (1..=100).map(|i| k_max * i as f64 / 100.0).collect();
    ks.extend((0..100).map(|i| k_max * 10f64.powf(-4.0 + 4.0 * i as f64 / 100.0)));
    ks.push(0.0);
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    ks
}

fn locate(
    curve: CurveKind,
    env: &dyn Environment,
    rho: f64,
    k_max: f64,
    tolerance: f64,
    mc: &MonteCarlo,
) -> Result<Crossing> {
    let eval = |k: f64| -> Result<(f64, f64)> { Ok(curve.pick(&expected_gradients(env, rho, k, mc)?)) };
    let grid = scan_grid(k_max);
    // Confident signs only: |g| within three standard errors counts as zero.
    let mut signed: Vec<(f64, i8)> = Vec::with_capacity(grid.len());
    for &k in &grid {
        let (g, se) = eval(k)?;
        let band = 3.0 * se;
        let s = if g > band {
            1
        } else if g < -band {
            -1
        } else {
            0
        };
        if s != 0 {
            signed.push((k, s));
        }
    }
    let changes = signed.windows(2).filter(|w| w[0].1 != w[1].1).count();
    let first_pos = signed.iter().position(|&(_, s)| s > 0);
    let first_neg_after = first_pos.and_then(|i| signed[i..].iter().position(|&(_, s)| s < 0).map(|j| i + j));
    let (Some(ip), Some(ineg)) = (first_pos, first_neg_after) else {
        return Err(Error::NoCrossing {
            curve: curve.name(),
            k_max,
        });
    };
    if changes > 1 || signed[0].1 < 0 {
        return Err(Error::AssumptionViolated(format!(
            "{} gradient changes sign {changes} times on [0, {k_max}]",
            curve.name()
        )));
    }
    let mut lo = signed[ineg - 1].0;
    let mut hi = signed[ineg].0;
    debug_assert!(ineg > ip);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if eval(mid)?.0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    let h = (k_max / 200.0).min(0.5 * k).max(tolerance);
    let slope = (eval(k + h)?.0 - eval((k - h).max(0.0))?.0) / (k + h - (k - h).max(0.0));
    let (_, se_g) = eval(k)?;
    let se = if slope != 0.0 { se_g / slope.abs() } else { f64::INFINITY };
    Ok(Crossing { k, se, slope })
}

/// Zeros `k_B` of `rho - E[p(k v)]` and `k_R` of `E[v x(k v) - p(k v)]`.
///
/// Each curve is scanned for its sign pattern first. No sign change is a
/// [`Error::NoCrossing`]; more than one is [`Error::AssumptionViolated`].
pub fn crossing_points(
    env: &dyn Environment,
    rho: f64,
    tolerance: f64,
    mc: &MonteCarlo,
) -> Result<Crossings> {
    if !(tolerance > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    if !(rho > 0.0) {
        return Err(domain("rho must be positive"));
    }
    let k_max = default_k_max(rho);
    Ok(Crossings {
        budget: locate(CurveKind::Budget, env, rho, k_max, tolerance, mc)?,
        ros: locate(CurveKind::Ros, env, rho, k_max, tolerance, mc)?,
        k_max,
    })
}

/// Zero of a single curve, or `None` when it never turns negative on the scan
/// range (that constraint never binds).
pub fn crossing_of(
    curve: CurveKind,
    env: &dyn Environment,
    rho: f64,
    tolerance: f64,
    mc: &MonteCarlo,
) -> Result<Option<Crossing>> {
    match locate(curve, env, rho, default_k_max(rho), tolerance, mc) {
        Ok(c) => Ok(Some(c)),
        Err(Error::NoCrossing { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Per-round value of the uniform-multiplier benchmark `E[v x(k* v)]` with `k* = min(k_B, k_R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformBenchmark {
    pub k_star: f64,
    pub binding: Binding,
    pub value_per_round: f64,
    pub se: f64,
}

pub fn uniform_benchmark(
    env: &dyn Environment,
    rho: f64,
    tolerance: f64,
    mc: &MonteCarlo,
) -> Result<UniformBenchmark> {
    let kb = crossing_of(CurveKind::Budget, env, rho, tolerance, mc)?;
    let kr = crossing_of(CurveKind::Ros, env, rho, tolerance, mc)?;
    let (k_star, binding) = match (kb, kr) {
        (Some(b), Some(r)) if b.k <= r.k => (b.k, Binding::Budget),
        (Some(_), Some(r)) => (r.k, Binding::Ros),
        (Some(b), None) => (b.k, Binding::Budget),
        (None, Some(r)) => (r.k, Binding::Ros),
        (None, None) => (default_k_max(rho), Binding::None),
    };
    let m = outcome_moments(env, k_star, mc)?;
    Ok(UniformBenchmark {
        k_star,
        binding,
        value_per_round: m.mean_value,
        se: m.se_of(1.0, 0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualValue {
    pub value: f64,
    pub se: f64,
    /// Inner maximizer `(1 + lambda) / (lambda + mu)`.
    pub k: f64,
}

/// Per-round dual function
/// `D(mu, lambda) = max_k (1 + lambda) E[v x(k v)] + rho mu - (lambda + mu) E[p(k v)]`,
/// evaluated at the truthful-auction maximizer `k = (1 + lambda) / (lambda + mu)`.
pub fn dual_function(
    env: &dyn Environment,
    rho: f64,
    lambda: f64,
    mu: f64,
    mc: &MonteCarlo,
) -> Result<DualValue> {
    if lambda < 0.0 || mu < 0.0 {
        return Err(domain("duals must be nonnegative"));
    }
    if lambda + mu <= 0.0 {
        return Err(Error::UnboundedMultiplier);
    }
    let k = (1.0 + lambda) / (lambda + mu);
    let m = outcome_moments(env, k, mc)?;
    let a = 1.0 + lambda;
    let b = -(lambda + mu);
    Ok(DualValue {
        value: a * m.mean_value + rho * mu + b * m.mean_payment,
        se: m.se_of(a, b),
        k,
    })
}

/// Finite-sample diagnostics for the bounded-second-moment and local strong
/// monotonicity assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionDiagnostics {
    pub second_moment_ros: f64,
    pub second_moment_budget: f64,
    /// Slope of the binding gradient at `k*`; negative means strongly monotone.
    pub binding_slope: f64,
}

pub fn assumption_diagnostics(
    env: &dyn Environment,
    rho: f64,
    crossings: &Crossings,
    mc: &MonteCarlo,
) -> Result<AssumptionDiagnostics> {
    let k = crossings.k_star();
    let m = outcome_moments(env, k, mc)?;
    let ros_mean = m.mean_value - m.mean_payment;
    let ros_var = if m.exact { 0.0 } else { m.var_value + m.var_payment - 2.0 * m.cov };
    let budget_mean = rho - m.mean_payment;
    let budget_var = if m.exact { 0.0 } else { m.var_payment };
    let binding_slope = match crossings.binding() {
        Binding::Budget => crossings.budget.slope,
        _ => crossings.ros.slope,
    };
    Ok(AssumptionDiagnostics {
        second_moment_ros: ros_var + ros_mean * ros_mean,
        second_moment_budget: budget_var + budget_mean * budget_mean,
        binding_slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binding {
    Ros,
    Budget,
    None,
}

impl Binding {
    pub fn as_str(self) -> &'static str {
        match self {
            Binding::Ros => "ros",
            Binding::Budget => "budget",
            Binding::None => "none",
        }
    }
}

/// Expected per-round conversion value and spend as functions of the multiplier.
pub trait FluidLandscape {
    fn conv(&self, k: f64) -> f64;
    fn spend(&self, k: f64) -> f64;
    fn rho(&self) -> f64;
    fn k_max(&self) -> f64;
}

impl FluidLandscape for CampaignLandscape {
    fn conv(&self, k: f64) -> f64 {
        self.conv_per_round(k)
    }

    fn spend(&self, k: f64) -> f64 {
        self.spend_per_round(k)
    }

    fn rho(&self) -> f64 {
        CampaignLandscape::rho(self)
    }

    fn k_max(&self) -> f64 {
        CampaignLandscape::k_max(self)
    }
}

/// A landscape given by closures; handy for analytic examples.
pub struct FnLandscape<C, S> {
    pub conv: C,
    pub spend: S,
    pub rho: f64,
    pub k_max: f64,
}

impl<C: Fn(f64) -> f64, S: Fn(f64) -> f64> FluidLandscape for FnLandscape<C, S> {
    fn conv(&self, k: f64) -> f64 {
        (self.conv)(k)
    }

    fn spend(&self, k: f64) -> f64 {
        (self.spend)(k)
    }

    fn rho(&self) -> f64 {
        self.rho
    }

    fn k_max(&self) -> f64 {
        self.k_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidBenchmark {
    pub k_star: f64,
    /// Per-round conversion value at `k_star`.
    pub conv_star: f64,
    /// Per-round spend at `k_star`.
    pub spend_star: f64,
    pub binding: Binding,
    /// Bisection width; `k_star + tolerance` is infeasible unless `binding` is none.
    pub tolerance: f64,
}

const FEAS_EPS: f64 = 1e-12;

fn fluid_feasible(l: &dyn FluidLandscape, k: f64) -> (bool, bool) {
    let s = l.spend(k);
    let scale = 1.0 + s.abs();
    (s <= l.rho() + FEAS_EPS * scale, l.conv(k) >= s - FEAS_EPS * scale)
}

/// Largest multiplier satisfying both the budget and the ROS constraint in
/// expectation, found by bisection. Requires the feasible set to be an interval
/// containing zero (monotone curves with a concave value-vs-spend frontier).
pub fn fluid_benchmark(landscape: &dyn FluidLandscape, tolerance: f64) -> Result<FluidBenchmark> {
    if !(tolerance > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let k_max = landscape.k_max();
    let done = |k: f64, binding| FluidBenchmark {
        k_star: k,
        conv_star: landscape.conv(k),
        spend_star: landscape.spend(k),
        binding,
        tolerance,
    };
    let (b, r) = fluid_feasible(landscape, k_max);
    if b && r {
        return Ok(done(k_max, Binding::None));
    }
    let (mut lo, mut hi) = (0.0, k_max);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let (b, r) = fluid_feasible(landscape, mid);
        if b && r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (budget_ok, _) = fluid_feasible(landscape, hi);
    Ok(done(lo, if budget_ok { Binding::Ros } else { Binding::Budget }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineOptimum {
    pub value: f64,
    pub spend: f64,
    pub bids: Vec<f64>,
    pub warning: Option<String>,
}

pub const MAX_OFFLINE_ROUNDS: usize = 20;

fn curve_saturation(c: &Curve) -> Option<f64> {
    match c {
        Curve::Linear { slope, cap } if *slope > 0.0 && cap.is_finite() => Some(cap / slope),
        Curve::Quadratic { coef, cap } if *coef > 0.0 && cap.is_finite() => Some((cap / coef).sqrt()),
        Curve::Piecewise(k) => k.last().map(|p| p.0),
        _ => None,
    }
}

fn candidate_bids(s: &AuctionSample, resolution: f64) -> Vec<f64> {
    match &s.mechanism {
        Mechanism::SecondPrice { competing_bid } => vec![0.0, *competing_bid],
        Mechanism::LandscapeDraw { .. } => vec![0.0, 1.0],
        Mechanism::Parametric { allocation, payment } => {
            let top = [curve_saturation(allocation), curve_saturation(payment)]
                .into_iter()
                .flatten()
                .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))
                .unwrap_or(4.0 * s.value.max(1.0));
            let n = (top / resolution).ceil() as usize;
            (0..=n).map(|i| (i as f64 * resolution).min(top)).collect()
        }
        Mechanism::Landscape(q) => {
            let top = q.campaign.k_max() * s.value;
            let n = (top / resolution).ceil().max(1.0) as usize;
            (0..=n).map(|i| (i as f64 * resolution).min(top)).collect()
        }
    }
}

/// Exact (up to the bid grid) offline optimum of
/// `max sum v x(b_t)` s.t. `sum p(b_t) <= rho T` and `sum p(b_t) <= sum v x(b_t)`,
/// by dynamic programming over the Pareto frontier of (spend, value).
pub fn offline_opt_small(
    stream: &[AuctionSample],
    rho: f64,
    resolution: f64,
) -> Result<OfflineOptimum> {
    offline_opt_relaxed(stream, rho, resolution, 0.0)
}

/// Offline optimum with the ROS constraint loosened to
/// `sum p(b_t) <= sum v x(b_t) + ros_slack`.
pub fn offline_opt_relaxed(
    stream: &[AuctionSample],
    rho: f64,
    resolution: f64,
    ros_slack: f64,
) -> Result<OfflineOptimum> {
    if !(ros_slack >= 0.0) {
        return Err(domain("ros_slack must be nonnegative"));
    }
    if stream.is_empty() || stream.len() > MAX_OFFLINE_ROUNDS {
        return Err(domain(format!(
            "offline optimum needs 1..={MAX_OFFLINE_ROUNDS} rounds, got {}",
            stream.len()
        )));
    }
    if !(resolution > 0.0) || !(rho > 0.0) {
        return Err(domain("resolution and rho must be positive"));
    }
    let budget = rho * stream.len() as f64;
    let eps = 1e-12 * (1.0 + budget);

    #[derive(Clone)]
    struct State {
        spend: f64,
        value: f64,
        bids: Vec<f64>,
    }
    let mut frontier = vec![State {
        spend: 0.0,
        value: 0.0,
        bids: Vec::new(),
    }];
    for s in stream {
        let mut options: Vec<(f64, f64, f64)> = candidate_bids(s, resolution)
            .into_iter()
            .map(|b| {
                let o = s.evaluate(b).expect("nonnegative grid");
                (o.payment, o.value_gained, b)
            })
            .collect();
        options.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        options.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        let mut next: Vec<State> = Vec::with_capacity(frontier.len() * options.len());
        for st in &frontier {
            for &(p, v, b) in &options {
                let spend = st.spend + p;
                if spend > budget + eps {
                    continue;
                }
                let mut bids = st.bids.clone();
                bids.push(b);
                next.push(State {
                    spend,
                    value: st.value + v,
                    bids,
                });
            }
        }
        next.sort_by(|a, b| a.spend.total_cmp(&b.spend).then(b.value.total_cmp(&a.value)));
        let mut best = f64::NEG_INFINITY;
        next.retain(|st| {
            if st.value > best {
                best = st.value;
                true
            } else {
                false
            }
        });
        frontier = next;
    }
    let best = frontier
        .into_iter()
        .filter(|st| st.spend <= st.value + ros_slack + eps)
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .expect("the all-zero bid vector is always feasible");
    let warning = (best.value == 0.0).then(|| "no feasible bid vector beyond all-zero on this grid".to_string());
    Ok(OfflineOptimum {
        value: best.value,
        spend: best.spend,
        bids: best.bids,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AdversarialInstance, EmpiricalEnv, ExponentialSecondPriceEnv};
    use approx::assert_relative_eq;

    #[test]
    fn zero_multiplier_gradients() {
        let env = ExponentialSecondPriceEnv::default();
        let g = expected_gradients(&env, env.rho, 0.0, &MonteCarlo::new(10_000, 1)).unwrap();
        assert_eq!(g.budget, env.rho);
        assert_eq!(g.ros, 0.0);
    }

    #[test]
    fn adversarial_gradients_at_two() {
        let env = AdversarialInstance::ros_binding();
        let g = expected_gradients(&env, env.rho(), 2.0, &MonteCarlo::default()).unwrap();
        assert_eq!(g.ros, 0.0);
        assert_relative_eq!(g.budget, 1.4, epsilon = 1e-12);
    }

    #[test]
    fn adversarial_crossings() {
        let env = AdversarialInstance::ros_binding();
        let c = crossing_points(&env, env.rho(), 1e-6, &MonteCarlo::default()).unwrap();
        assert!((c.ros.k - 2.0).abs() < 1e-5);
        assert!((c.budget.k - 15.2f64.sqrt()).abs() < 1e-5);
        assert_eq!(c.binding(), Binding::Ros);
        for mu0 in [0.5, 1.0, 2.0] {
            let env = AdversarialInstance::budget_binding(mu0).unwrap();
            let c = crossing_points(&env, env.rho(), 1e-7, &MonteCarlo::default()).unwrap();
            assert!((c.budget.k - 1.0 / (5.0 * mu0 * mu0)).abs() < 1e-6, "{mu0}: {:?}", c.budget);
            assert!((c.ros.k - 2.0).abs() < 1e-6);
            assert_eq!(c.binding(), Binding::Budget);
        }
    }

    #[test]
    fn no_crossing_names_curve() {
        // Competing bids far above any value: nothing is ever won.
        let env = EmpiricalEnv {
            samples: vec![AuctionSample::second_price(0.1, 1e9)],
            rho: 0.5,
        };
        match crossing_points(&env, 0.5, 1e-4, &MonteCarlo::default()) {
            Err(Error::NoCrossing { curve, .. }) => assert_eq!(curve, "budget"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multiple_crossings_flagged() {
        // Budget gradient: positive, negative, then positive again is impossible for a
        // monotone payment, so build a non-monotone payment curve.
        let s = AuctionSample::parametric(
            1.0,
            Curve::Linear { slope: 1.0, cap: 1.0 },
            Curve::Piecewise(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (3.0, 1.0)].into()),
            false,
        );
        let env = EmpiricalEnv {
            samples: vec![s],
            rho: 0.5,
        };
        assert!(matches!(
            crossing_points(&env, 0.5, 1e-4, &MonteCarlo::default()),
            Err(Error::AssumptionViolated(_))
        ));
    }

    #[test]
    fn dual_function_cases() {
        let env = AdversarialInstance::ros_binding();
        let mc = MonteCarlo::default();
        let d = dual_function(&env, env.rho(), 1.0, 0.0, &mc).unwrap();
        assert_relative_eq!(d.value, 0.5, epsilon = 1e-12);
        assert_eq!(dual_function(&env, 1.9, 0.0, 0.0, &mc), Err(Error::UnboundedMultiplier));
        let up = dual_function(&env, env.rho(), 1.1, 0.0, &mc).unwrap();
        assert!(up.value >= d.value - 3.0 * d.se);

        let bb = AdversarialInstance::budget_binding(1.0).unwrap();
        let kb = 0.2;
        let d = dual_function(&bb, bb.rho(), 0.0, 1.0 / kb, &mc).unwrap();
        let vx = bb.sample(&mut crate::rng::stream(0, &[])).evaluate(kb).unwrap().value_gained;
        assert_relative_eq!(d.value, vx, epsilon = 1e-12);
    }

    #[test]
    fn fluid_toy_landscapes() {
        let toy = |rho| FnLandscape {
            conv: |k: f64| 0.5 * k.min(1.0),
            spend: |k: f64| 0.4 * k * k,
            rho,
            k_max: 10.0,
        };
        let b = fluid_benchmark(&toy(0.4), 1e-9).unwrap();
        assert!((b.k_star - 1.0).abs() < 1e-8);
        assert_eq!(b.binding, Binding::Budget);
        assert_relative_eq!(b.conv_star, 0.5, epsilon = 1e-8);
        let b = fluid_benchmark(&toy(10.0), 1e-9).unwrap();
        assert!((b.k_star - 1.25f64.sqrt()).abs() < 1e-8);
        assert!((b.k_star - 1.118).abs() < 1e-3);
        assert_eq!(b.binding, Binding::Ros);
        assert_relative_eq!(b.conv_star, 0.5, epsilon = 1e-8);
        assert_relative_eq!(b.spend_star, 0.5, epsilon = 1e-8);
        let t = toy(0.4);
        assert_eq!((t.conv(0.0), t.spend(0.0)), (0.0, 0.0));
    }

    #[test]
    fn fluid_flat_landscape() {
        let flat = FnLandscape {
            conv: |_k: f64| 0.0,
            spend: |_k: f64| 0.0,
            rho: 1.0,
            k_max: 5.0,
        };
        let b = fluid_benchmark(&flat, 1e-9).unwrap();
        assert_eq!(b.k_star, 5.0);
        assert_eq!(b.binding, Binding::None);
    }

    #[test]
    fn offline_single_rounds() {
        let win = offline_opt_small(&[AuctionSample::second_price(0.5, 0.4)], 1.0, 0.01).unwrap();
        assert_eq!(win.value, 0.5);
        let lose = offline_opt_small(&[AuctionSample::second_price(0.5, 0.6)], 1.0, 0.01).unwrap();
        assert_eq!(lose.value, 0.0);
        assert!(lose.warning.is_some());
    }

    #[test]
    fn offline_two_round_example() {
        let s = AdversarialInstance::point_sample();
        let opt = offline_opt_small(&[s.clone(), s], 1.9, 0.01).unwrap();
        assert!((opt.value - 1.0).abs() < 1e-9, "{opt:?}");
    }

    #[test]
    fn offline_rejects_long_streams() {
        let s = AuctionSample::second_price(0.5, 0.4);
        assert!(offline_opt_small(&vec![s; 21], 1.0, 0.1).is_err());
    }

    #[test]
    fn slack_admits_overpaying_rounds() {
        let s = [AuctionSample::second_price(0.5, 0.6)];
        assert_eq!(offline_opt_relaxed(&s, 1.0, 0.01, 0.1).unwrap().value, 0.5);
        assert_eq!(offline_opt_relaxed(&s, 1.0, 0.01, 0.09).unwrap().value, 0.0);
    }

    #[test]
    fn mc_estimates_reproducible_across_executors() {
        let env = ExponentialSecondPriceEnv::default();
        let a = MonteCarlo { exec: Exec::Sequential, ..MonteCarlo::new(50_000, 3) };
        let b = MonteCarlo { exec: Exec::Parallel, ..a };
        let ga = expected_gradients(&env, env.rho, 2.5, &a).unwrap();
        let gb = expected_gradients(&env, env.rho, 2.5, &b).unwrap();
        assert_eq!(ga, gb);
    }
}
