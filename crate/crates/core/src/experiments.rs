//! Packaged studies: horizon scaling, the sequential-pacing failure harness,
//! multiplier convergence and the campaign fleet tables.
//!
//! Every episode draws from `rng::stream(master_seed, [T, seed])`, so results depend
//! only on the configuration and never on the executor.

use serde::{Deserialize, Serialize};

use crate::env::{AdversarialInstance, CampaignLandscape, Environment, SemiSyntheticEnv};
use crate::error::{domain, Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::invariants::check_trajectory;
use crate::metrics::{bucket_table, default_thresholds, relative_ros_error, summarize, BucketRow, CampaignOutcome, EpisodeResult};
use crate::oracle::{fluid_benchmark, FluidLandscape};
use crate::pacing::{simulate, PacerConfig, PacerKind, StepRule, Trajectory};
use crate::rng::stream;

/// One simulated episode, keyed by horizon and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub kind: PacerKind,
    pub horizon: usize,
    pub seed: u64,
    pub result: EpisodeResult,
}

fn episode_rng(master_seed: u64, horizon: usize, seed: u64) -> crate::rng::SimRng {
    stream(master_seed, &[horizon as u64, seed])
}

fn run_one(
    kind: PacerKind,
    env: &dyn Environment,
    horizon: usize,
    seed: u64,
    config: &PacerConfig,
    master_seed: u64,
) -> Result<Trajectory> {
    let mut rng = episode_rng(master_seed, horizon, seed);
    simulate(kind, env, horizon, config, &mut rng)
}

/// Settings shared by a batch of episodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSpec {
    pub kind: PacerKind,
    pub horizon: usize,
    pub seeds: u64,
    pub config: PacerConfig,
    pub master_seed: u64,
    /// Per-round benchmark value written next to each episode.
    pub benchmark_per_round: f64,
    /// Fail on the first trajectory that breaks a theoretical bound.
    pub check_invariants: bool,
}

/// Episodes for seeds `0..seeds`, in seed order.
pub fn run_batch(env: &dyn Environment, spec: &BatchSpec, exec: Exec) -> Result<Vec<EpisodeRecord>> {
    spec.config.validate()?;
    let out: Vec<Result<EpisodeRecord>> = exec.map_range(spec.seeds as usize, |s| {
        let seed = s as u64;
        let traj = run_one(spec.kind, env, spec.horizon, seed, &spec.config, spec.master_seed)?;
        if spec.check_invariants {
            check_trajectory(&traj)?;
        }
        Ok(EpisodeRecord {
            kind: spec.kind,
            horizon: spec.horizon,
            seed,
            result: summarize(&traj, spec.benchmark_per_round * spec.horizon as f64),
        })
    });
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Regret,
    RosViolation,
    Endurance,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Regret => "regret",
            Metric::RosViolation => "ros-violation",
            Metric::Endurance => "endurance",
        }
    }

    fn of(self, r: &EpisodeResult) -> f64 {
        match self {
            Metric::Regret => r.benchmark_value - r.reward,
            Metric::RosViolation => r.ros_violation,
            Metric::Endurance => r.endurance_gap as f64,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regret" => Ok(Metric::Regret),
            "ros-violation" | "ros_violation" => Ok(Metric::RosViolation),
            "endurance" => Ok(Metric::Endurance),
            other => Err(domain(format!(
                "unknown metric {other:?}; expected regret, ros-violation or endurance"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub kind: PacerKind,
    pub horizons: Vec<usize>,
    pub seeds: u64,
    pub metric: Metric,
    pub master_seed: u64,
    pub alpha: StepRule,
    pub eta: StepRule,
    pub lambda_init: f64,
    /// `None` means `mu_1 = rho`.
    pub mu_init: Option<f64>,
    /// Per-round benchmark for regret.
    pub benchmark_per_round: f64,
    pub bootstrap: usize,
}

impl ScalingSpec {
    pub fn new(kind: PacerKind, horizons: Vec<usize>, metric: Metric, benchmark_per_round: f64) -> Self {
        ScalingSpec {
            kind,
            horizons,
            seeds: 30,
            metric,
            master_seed: 0,
            alpha: StepRule::Auto,
            eta: StepRule::Auto,
            lambda_init: 1.0,
            mu_init: None,
            benchmark_per_round,
            bootstrap: 1000,
        }
    }

    fn config(&self, rho: f64, horizon: usize) -> PacerConfig {
        PacerConfig::auto(rho, horizon)
            .with_steps(self.alpha.resolve(horizon), self.eta.resolve(horizon))
            .with_init(self.lambda_init, self.mu_init.unwrap_or(rho))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub metric: Metric,
    pub horizons: Vec<usize>,
    pub means: Vec<f64>,
    /// `None` when every mean is nonpositive (the constraint has slack).
    pub slope: Option<f64>,
    pub slope_ci: Option<(f64, f64)>,
    pub episodes: Vec<EpisodeRecord>,
}

impl ScalingResult {
    pub fn metric_nonpositive(&self) -> bool {
        self.slope.is_none()
    }
}

/// Ordinary least squares slope of `ln max(y, 1)` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(1.0).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

fn check_horizons(horizons: &[usize]) -> Result<()> {
    if horizons.len() < 3 {
        return Err(domain("need >= 3 horizons"));
    }
    if horizons.contains(&0) {
        return Err(domain("horizons must be positive"));
    }
    let lo = *horizons.iter().min().expect("nonempty") as f64;
    let hi = *horizons.iter().max().expect("nonempty") as f64;
    if hi / lo < 100.0 {
        return Err(domain("horizons must span at least two decades"));
    }
    Ok(())
}

/// Mean of `metric` at each horizon and the log-log growth rate, with a
/// seed-bootstrap confidence interval.
pub fn scaling_study(env: &dyn Environment, spec: &ScalingSpec, exec: Exec) -> Result<ScalingResult> {
    check_horizons(&spec.horizons)?;
    if spec.seeds == 0 {
        return Err(domain("seeds must be positive"));
    }
    let mut episodes = Vec::with_capacity(spec.horizons.len() * spec.seeds as usize);
    for &t in &spec.horizons {
        let batch = BatchSpec {
            kind: spec.kind,
            horizon: t,
            seeds: spec.seeds,
            config: spec.config(env.rho(), t),
            master_seed: spec.master_seed,
            benchmark_per_round: spec.benchmark_per_round,
            check_invariants: false,
        };
        episodes.extend(run_batch(env, &batch, exec)?);
    }
    let per_t: Vec<Vec<f64>> = spec
        .horizons
        .iter()
        .map(|&t| {
            episodes
                .iter()
                .filter(|e| e.horizon == t)
                .map(|e| spec.metric.of(&e.result))
                .collect()
        })
        .collect();
    let means: Vec<f64> = per_t.iter().map(|v| pairwise_sum(v) / v.len() as f64).collect();
    let xs: Vec<f64> = spec.horizons.iter().map(|&t| t as f64).collect();
    if means.iter().all(|&m| m <= 0.0) {
        return Ok(ScalingResult {
            metric: spec.metric,
            horizons: spec.horizons.clone(),
            means,
            slope: None,
            slope_ci: None,
            episodes,
        });
    }
    let slope = loglog_slope(&xs, &means);
    let mut boot: Vec<f64> = exec.map_range(spec.bootstrap, |b| {
        use rand::Rng;
        let mut rng = stream(spec.master_seed, &[u64::MAX, b as u64]);
        let m: Vec<f64> = per_t
            .iter()
            .map(|v| {
                let s: f64 = (0..v.len()).map(|_| v[rng.random_range(0..v.len())]).sum();
                s / v.len() as f64
            })
            .collect();
        loglog_slope(&xs, &m)
    });
    boot.sort_by(f64::total_cmp);
    let slope_ci = (!boot.is_empty()).then(|| (percentile(&boot, 0.025), percentile(&boot, 0.975)));
    Ok(ScalingResult {
        metric: spec.metric,
        horizons: spec.horizons.clone(),
        means,
        slope: Some(slope),
        slope_ci,
        episodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureMode {
    /// On the ROS-binding instance: spend at least `0.6 T` or violation at least `c T`.
    RosViolation,
    /// On the budget-binding instance: regret at least `c T`.
    Regret,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureVerdict {
    pub horizon: usize,
    pub spend_ros: f64,
    pub violation_ros: f64,
    /// Regret on the budget-binding instance; `None` when that instance was not run.
    pub regret_budget: Option<f64>,
    pub failure: Option<FailureMode>,
    /// Failing metric divided by `T` (violation or regret; zero when nothing failed).
    pub per_round: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialFailureSpec {
    pub kind: PacerKind,
    pub mu0: f64,
    pub lambda0: f64,
    /// `StepRule::Fixed(0.0)` freezes a dual.
    pub alpha: StepRule,
    pub eta: StepRule,
    pub horizons: Vec<usize>,
    pub threshold: f64,
}

impl SequentialFailureSpec {
    pub fn new(mu0: f64, lambda0: f64, horizons: Vec<usize>) -> Self {
        SequentialFailureSpec {
            kind: PacerKind::Sequential,
            mu0,
            lambda0,
            alpha: StepRule::Auto,
            eta: StepRule::Auto,
            horizons,
            threshold: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialFailureReport {
    pub kind: PacerKind,
    pub mu0: f64,
    pub lambda0: f64,
    pub verdicts: Vec<FailureVerdict>,
    /// Log-log slope of the failing metric when the same failure occurs at every `T`.
    pub slope: Option<f64>,
}

impl SequentialFailureReport {
    /// Some failure at every horizon.
    pub fn fails_everywhere(&self) -> bool {
        self.verdicts.iter().all(|v| v.failure.is_some())
    }

    pub fn fails_nowhere(&self) -> bool {
        self.verdicts.iter().all(|v| v.failure.is_none())
    }

    /// The per-round magnitude stays above the threshold at every horizon.
    pub fn magnitude_persists(&self, threshold: f64) -> bool {
        self.verdicts.iter().all(|v| v.per_round >= threshold)
    }
}

/// Runs the pacer on the two point-mass instances and reports which of the two
/// linear failures (ROS violation on the ROS-binding instance, regret on the
/// budget-binding one) occurs at each horizon.
pub fn sequential_failure_demo(spec: &SequentialFailureSpec) -> Result<SequentialFailureReport> {
    if !(spec.mu0 > 0.0 && spec.lambda0 > 0.0 && spec.threshold > 0.0) {
        return Err(domain("mu0, lambda0 and the threshold must be positive"));
    }
    if spec.horizons.is_empty() || spec.horizons.contains(&0) {
        return Err(domain("need positive horizons"));
    }
    let ros_env = AdversarialInstance::ros_binding();
    let budget_env = AdversarialInstance::budget_binding(spec.mu0)?;
    let mut verdicts = Vec::with_capacity(spec.horizons.len());
    for &t in &spec.horizons {
        let config = |rho: f64| PacerConfig {
            rho,
            alpha: spec.alpha.resolve(t),
            eta: spec.eta.resolve(t),
            lambda_init: spec.lambda0,
            mu_init: spec.mu0,
        };
        let tf = t as f64;
        let ros = summarize(&run_one(spec.kind, &ros_env, t, 0, &config(ros_env.rho()), 0)?, 0.0);
        let mut v = FailureVerdict {
            horizon: t,
            spend_ros: ros.spend,
            violation_ros: ros.ros_violation,
            regret_budget: None,
            failure: None,
            per_round: 0.0,
        };
        if ros.spend >= 0.6 * tf || ros.ros_violation >= spec.threshold * tf {
            v.failure = Some(FailureMode::RosViolation);
            v.per_round = ros.ros_violation / tf;
        } else {
            let traj = run_one(spec.kind, &budget_env, t, 0, &config(budget_env.rho()), 0)?;
            let opt = budget_env.optimal_value_per_round() * tf;
            let regret = opt - summarize(&traj, opt).reward;
            v.regret_budget = Some(regret);
            if regret >= spec.threshold * tf {
                v.failure = Some(FailureMode::Regret);
                v.per_round = regret / tf;
            }
        }
        verdicts.push(v);
    }
    let first = verdicts[0].failure;
    let slope = match first {
        Some(mode) if verdicts.iter().all(|v| v.failure == Some(mode)) && verdicts.len() >= 2 => {
            let xs: Vec<f64> = verdicts.iter().map(|v| v.horizon as f64).collect();
            let ys: Vec<f64> = verdicts.iter().map(|v| v.per_round * v.horizon as f64).collect();
            Some(loglog_slope(&xs, &ys))
        }
        _ => None,
    };
    Ok(SequentialFailureReport {
        kind: spec.kind,
        mu0: spec.mu0,
        lambda0: spec.lambda0,
        verdicts,
        slope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceResult {
    pub k_star: f64,
    /// Median of `|k_t - k*|` over the last quarter, one per seed.
    pub per_seed: Vec<f64>,
    /// Median over the pooled last-quarter deviations of all seeds.
    pub pooled_median: f64,
}

impl ConvergenceResult {
    pub fn worst_seed(&self) -> f64 {
        self.per_seed.iter().copied().fold(0.0, f64::max)
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// How far the bid multiplier stays from `k_star` over the final quarter of the
/// horizon, with default step sizes and initial duals.
pub fn convergence_probe(
    kind: PacerKind,
    env: &dyn Environment,
    horizon: usize,
    seeds: u64,
    k_star: f64,
    master_seed: u64,
    exec: Exec,
) -> Result<ConvergenceResult> {
    if horizon < 4 || seeds == 0 {
        return Err(domain("need at least 4 rounds and one seed"));
    }
    let config = PacerConfig::auto(env.rho(), horizon);
    let tails: Vec<Result<Vec<f64>>> = exec.map_range(seeds as usize, |s| {
        let traj = run_one(kind, env, horizon, s as u64, &config, master_seed)?;
        let start = horizon - horizon / 4;
        Ok(traj.multiplier[start..].iter().map(|k| (k - k_star).abs()).collect())
    });
    let tails: Vec<Vec<f64>> = tails.into_iter().collect::<Result<_>>()?;
    let per_seed = tails.iter().map(|t| median(&mut t.clone())).collect();
    let mut pooled: Vec<f64> = tails.concat();
    Ok(ConvergenceResult {
        k_star,
        per_seed,
        pooled_median: median(&mut pooled),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetSpec {
    pub kinds: Vec<PacerKind>,
    pub seeds_per_campaign: u64,
    /// Candidate step scales; the searched pairs are `(a / sqrt(T), e / sqrt(T))`.
    pub step_grid: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub master_seed: u64,
}

impl Default for FleetSpec {
    fn default() -> Self {
        FleetSpec {
            kinds: PacerKind::ALL.to_vec(),
            seeds_per_campaign: 10,
            step_grid: vec![0.3, 1.0, 3.0],
            thresholds: default_thresholds(),
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepScore {
    pub alpha_scale: f64,
    pub eta_scale: f64,
    /// Total normalized value of the campaigns with zero relative ROS error.
    pub zero_error_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetKindResult {
    pub kind: PacerKind,
    pub best: StepScore,
    pub grid: Vec<StepScore>,
    pub table: Vec<BucketRow>,
    /// Seed-averaged outcomes per campaign at the best step sizes.
    pub campaigns: Vec<CampaignOutcome>,
}

/// Seed-averaged outcome of one campaign; relative error uses the averaged spend
/// and reward.
fn campaign_outcome(
    kind: PacerKind,
    campaign: &CampaignLandscape,
    index: usize,
    scales: (f64, f64),
    spec: &FleetSpec,
) -> Result<CampaignOutcome> {
    let t = campaign.horizon;
    let env = SemiSyntheticEnv::new(campaign.clone(), format!("campaign-{index}"));
    let root = (t as f64).sqrt();
    let config = PacerConfig::auto(campaign.rho(), t).with_steps(scales.0 / root, scales.1 / root);
    let benchmark = fluid_benchmark(campaign as &dyn FluidLandscape, 1e-9)?.conv_star * t as f64;
    let mut reward = 0.0;
    let mut spend = 0.0;
    for seed in 0..spec.seeds_per_campaign {
        let mut rng = stream(spec.master_seed, &[index as u64, seed]);
        let r = summarize(&simulate(kind, &env, t, &config, &mut rng)?, benchmark);
        reward += r.reward;
        spend += r.spend;
    }
    let n = spec.seeds_per_campaign as f64;
    Ok(CampaignOutcome {
        relative_ros_error: relative_ros_error(spend / n, reward / n),
        reward: reward / n,
        benchmark,
    })
}

/// Grid search over step sizes per pacer, scored by value in the zero-error
/// bucket, followed by the cumulative bucket table at the winning pair.
pub fn fleet_study(campaigns: &[CampaignLandscape], spec: &FleetSpec, exec: Exec) -> Result<Vec<FleetKindResult>> {
    if campaigns.is_empty() || spec.step_grid.is_empty() || spec.seeds_per_campaign == 0 {
        return Err(domain("fleet study needs campaigns, seeds and a nonempty step grid"));
    }
    let pairs: Vec<(f64, f64)> = spec
        .step_grid
        .iter()
        .flat_map(|&a| spec.step_grid.iter().map(move |&e| (a, e)))
        .collect();
    let indexed: Vec<(usize, &CampaignLandscape)> = campaigns.iter().enumerate().collect();
    let mut out = Vec::with_capacity(spec.kinds.len());
    for &kind in &spec.kinds {
        let mut grid = Vec::with_capacity(pairs.len());
        let mut best: Option<(usize, Vec<CampaignOutcome>)> = None;
        for (pi, &scales) in pairs.iter().enumerate() {
            let outcomes: Vec<CampaignOutcome> = exec
                .map(&indexed, |&(i, c)| campaign_outcome(kind, c, i, scales, spec))
                .into_iter()
                .collect::<Result<_>>()?;
            let zero = bucket_table(&outcomes, &[0.0])[0].cumulative_value;
            grid.push(StepScore {
                alpha_scale: scales.0,
                eta_scale: scales.1,
                zero_error_value: zero,
            });
            // Ties keep the earlier pair.
            if best.as_ref().is_none_or(|(b, _)| zero > grid[*b].zero_error_value) {
                best = Some((pi, outcomes));
            }
        }
        let (bi, campaigns) = best.expect("grid is nonempty");
        out.push(FleetKindResult {
            kind,
            best: grid[bi].clone(),
            table: bucket_table(&campaigns, &spec.thresholds),
            grid,
            campaigns,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_synthetic_campaign, ExponentialSecondPriceEnv, SyntheticCampaignParams};
    use approx::assert_relative_eq;

    #[test]
    fn slope_of_power_law() {
        let xs = [1e3, 1e4, 1e5];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.sqrt()).collect();
        assert_relative_eq!(loglog_slope(&xs, &ys), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn flat_metric_reports_nonpositive() {
        // Competing bid far above any bid: nothing is ever won or paid.
        let env = crate::env::EmpiricalEnv {
            samples: vec![crate::AuctionSample::second_price(1.0, 10.0)],
            rho: 1.0,
        };
        let spec = ScalingSpec {
            seeds: 2,
            bootstrap: 10,
            ..ScalingSpec::new(PacerKind::Min, vec![10, 100, 1000], Metric::RosViolation, 0.0)
        };
        let r = scaling_study(&env, &spec, Exec::Sequential).unwrap();
        assert!(r.metric_nonpositive());
        assert!(r.means.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn scaling_needs_three_horizons() {
        let env = ExponentialSecondPriceEnv::default();
        let spec = ScalingSpec::new(PacerKind::Min, vec![1000], Metric::Regret, 0.4);
        let err = scaling_study(&env, &spec, Exec::Sequential).unwrap_err();
        assert!(err.to_string().contains("need >= 3 horizons"));
    }

    #[test]
    fn batch_is_executor_independent() {
        let env = ExponentialSecondPriceEnv::default();
        let spec = BatchSpec {
            kind: PacerKind::DualOptimal,
            horizon: 500,
            seeds: 4,
            config: PacerConfig::auto(env.rho, 500),
            master_seed: 9,
            benchmark_per_round: 0.4,
            check_invariants: true,
        };
        let a = run_batch(&env, &spec, Exec::Sequential).unwrap();
        let b = run_batch(&env, &spec, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|e| e.seed).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn frozen_budget_dual_loses_value() {
        let mut spec = SequentialFailureSpec::new(1.0, 1.0, vec![1000, 10_000]);
        spec.eta = StepRule::Fixed(0.0);
        let budget_env = AdversarialInstance::budget_binding(1.0).unwrap();
        for &t in &spec.horizons {
            let config = PacerConfig {
                rho: budget_env.rho(),
                alpha: 1.0 / (t as f64).sqrt(),
                eta: 0.0,
                lambda_init: 1.0,
                mu_init: 1.0,
            };
            let traj = run_one(PacerKind::Sequential, &budget_env, t, 0, &config, 0).unwrap();
            let value: f64 = traj.value_gained.iter().sum();
            assert!(value / t as f64 <= 3.0 / 100.0 + 1e-12);
        }
        let report = sequential_failure_demo(&spec).unwrap();
        assert!(report.fails_everywhere());
    }

    #[test]
    fn single_pair_grid_matches_bucket_table() {
        let mut rng = stream(4, &[]);
        let campaign = generate_synthetic_campaign(&mut rng, &SyntheticCampaignParams::default()).unwrap();
        let spec = FleetSpec {
            kinds: vec![PacerKind::Min],
            seeds_per_campaign: 2,
            step_grid: vec![1.0],
            ..FleetSpec::default()
        };
        let res = fleet_study(std::slice::from_ref(&campaign), &spec, Exec::Sequential).unwrap();
        let direct = campaign_outcome(PacerKind::Min, &campaign, 0, (1.0, 1.0), &spec).unwrap();
        assert_eq!(res[0].table, bucket_table(&[direct], &spec.thresholds));
    }

    #[test]
    fn convergence_on_point_mass() {
        let env = AdversarialInstance::ros_binding();
        let r = convergence_probe(PacerKind::DualOptimal, &env, 20_000, 2, 2.0, 0, Exec::Sequential).unwrap();
        assert!(r.worst_seed() < 0.2, "{r:?}");
    }
}
