//! The five subcommands. Each returns the tables it produced plus a few lines of
//! human-readable summary; writing happens in one place afterwards.

use dualpace::env::{generate_synthetic_campaign, SyntheticCampaignParams};
use dualpace::experiments::{
    fleet_study, run_batch, scaling_study, sequential_failure_demo, BatchSpec, FailureMode, FleetSpec,
    ScalingSpec, SequentialFailureSpec,
};
use dualpace::oracle::{
    crossing_of, dual_function, fluid_benchmark, uniform_benchmark, CurveKind, FluidLandscape, MonteCarlo,
};
use dualpace::rng::stream;
use dualpace::{
    AdversarialInstance, CampaignLandscape, Environment, Exec, ExponentialSecondPriceEnv, PacerConfig,
    SemiSyntheticEnv,
};

use crate::config::{Command, ConfigError, EnvSpec, RunConfig};
use crate::output::{num, Table, EPISODE_HEADER};
use crate::CliError;

const SYNTHETIC_KEY: u64 = 0x5359_4e54;

/// Synthetic campaign `index` drawn from the master seed.
pub fn synthetic_campaign(master_seed: u64, index: u64, horizon: usize) -> dualpace::Result<CampaignLandscape> {
    let params = SyntheticCampaignParams {
        horizon,
        ..Default::default()
    };
    generate_synthetic_campaign(&mut stream(master_seed, &[SYNTHETIC_KEY, index]), &params)
}

/// An instantiated environment and, for campaigns, its landscape.
pub struct BuiltEnv {
    pub env: Box<dyn Environment>,
    pub landscape: Option<CampaignLandscape>,
}

pub fn build_env(spec: &EnvSpec, horizon: usize, rho: Option<f64>, master_seed: u64) -> Result<BuiltEnv, CliError> {
    let fixed_rho = |name: &str| -> Result<(), CliError> {
        match rho {
            Some(_) => Err(ConfigError::Invalid {
                field: "rho",
                msg: format!("the per-round budget is part of the {name} instance and cannot be overridden"),
            }
            .into()),
            None => Ok(()),
        }
    };
    let campaign = |c: CampaignLandscape| -> Result<BuiltEnv, CliError> {
        let mut c = c.with_horizon(horizon)?;
        if let Some(r) = rho {
            c.budget = r * horizon as f64;
        }
        Ok(BuiltEnv {
            env: Box::new(SemiSyntheticEnv::new(c.clone(), spec.to_string())),
            landscape: Some(c),
        })
    };
    Ok(match spec {
        EnvSpec::Exponential => {
            let d = ExponentialSecondPriceEnv::default();
            let env = ExponentialSecondPriceEnv::new(d.value_mean, d.competing_bid_mean, rho.unwrap_or(d.rho))?;
            BuiltEnv {
                env: Box::new(env),
                landscape: None,
            }
        }
        EnvSpec::AdversarialRos => {
            fixed_rho("adversarial")?;
            BuiltEnv {
                env: Box::new(AdversarialInstance::ros_binding()),
                landscape: None,
            }
        }
        EnvSpec::AdversarialBudget(mu0) => {
            fixed_rho("adversarial")?;
            BuiltEnv {
                env: Box::new(AdversarialInstance::budget_binding(*mu0)?),
                landscape: None,
            }
        }
        EnvSpec::Campaign(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                path: path.clone(),
                source,
            })?;
            let c: CampaignLandscape = serde_json::from_str(&text).map_err(|e| ConfigError::Invalid {
                field: "env",
                msg: format!("{}: {e}", path.display()),
            })?;
            campaign(c)?
        }
        EnvSpec::Synthetic(i) => campaign(synthetic_campaign(master_seed, *i, horizon)?)?,
    })
}

/// Per-round benchmark: the fluid optimum for campaigns, otherwise the value at
/// the smaller crossing point.
pub fn benchmark_per_round(built: &BuiltEnv, mc: &MonteCarlo) -> Result<f64, CliError> {
    Ok(match &built.landscape {
        Some(l) => fluid_benchmark(l as &dyn FluidLandscape, 1e-9)?.conv_star,
        None => uniform_benchmark(built.env.as_ref(), built.env.rho(), crossing_tolerance(built.env.as_ref()), mc)?.value_per_round,
    })
}

/// Bisection width: tight when expectations are exact, otherwise well below the
/// Monte Carlo error.
pub fn crossing_tolerance(env: &dyn Environment) -> f64 {
    if env.support().is_some() || env.expected_outcome(1.0).is_some() {
        1e-10
    } else {
        1e-5
    }
}

pub struct Outcome {
    pub tables: Vec<Table>,
    pub lines: Vec<String>,
}

pub fn execute(cfg: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Run => run(cfg, exec),
        Command::Scale => scale(cfg, exec),
        Command::DemoSeq => demo_seq(cfg),
        Command::Fleet => fleet(cfg, exec),
        Command::Oracle => oracle(cfg, exec),
    }
}

fn mc(cfg: &RunConfig, exec: Exec) -> MonteCarlo {
    MonteCarlo {
        n_samples: cfg.mc_samples,
        seed: cfg.master_seed,
        exec,
    }
}

fn env_spec(cfg: &RunConfig) -> Result<&EnvSpec, CliError> {
    cfg.env.as_ref().ok_or(CliError::Config(ConfigError::Missing("env")))
}

fn run(cfg: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    let spec = env_spec(cfg)?;
    let t = cfg.horizons[0];
    let built = build_env(spec, t, cfg.rho, cfg.master_seed)?;
    let env = built.env.as_ref();
    let bench = benchmark_per_round(&built, &mc(cfg, exec))?;
    let mut episodes = Table::new("episodes", &EPISODE_HEADER);
    let mut summary = Table::new(
        "summary",
        &[
            "pacer",
            "env",
            "T",
            "episodes",
            "mean_reward",
            "mean_spend",
            "mean_ros_violation",
            "mean_tau",
            "mean_relative_ros_error",
            "benchmark",
        ],
    );
    let mut lines = Vec::new();
    for &kind in &cfg.pacers {
        let rho = env.rho();
        let config = PacerConfig::auto(rho, t)
            .with_steps(cfg.alpha.resolve(t), cfg.eta.resolve(t))
            .with_init(cfg.lambda_init, cfg.mu_init.unwrap_or(rho));
        let batch = BatchSpec {
            kind,
            horizon: t,
            seeds: cfg.seeds,
            config,
            master_seed: cfg.master_seed,
            benchmark_per_round: bench,
            check_invariants: cfg.assert_invariants,
        };
        let records = run_batch(env, &batch, exec)?;
        for r in &records {
            let e = &r.result;
            episodes.push(vec![
                kind.to_string(),
                spec.to_string(),
                t.to_string(),
                r.seed.to_string(),
                num(e.reward),
                num(e.spend),
                num(e.ros_violation),
                e.stopping_time.to_string(),
                e.endurance_gap.to_string(),
                num(e.relative_ros_error),
                num(e.benchmark_value),
            ]);
        }
        let n = records.len() as f64;
        let mean = |f: fn(&dualpace::metrics::EpisodeResult) -> f64| records.iter().map(|r| f(&r.result)).sum::<f64>() / n;
        let row = vec![
            kind.to_string(),
            spec.to_string(),
            t.to_string(),
            records.len().to_string(),
            num(mean(|e| e.reward)),
            num(mean(|e| e.spend)),
            num(mean(|e| e.ros_violation)),
            num(mean(|e| e.stopping_time as f64)),
            num(mean(|e| e.relative_ros_error)),
            num(bench * t as f64),
        ];
        lines.push(format!(
            "{kind} on {spec}, T={t}: {} episodes, mean reward {} (benchmark {}), mean ROS violation {}",
            records.len(),
            row[4],
            row[9],
            row[6]
        ));
        summary.push(row);
    }
    Ok(Outcome {
        tables: vec![episodes, summary],
        lines,
    })
}

fn scale(cfg: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    let spec = env_spec(cfg)?;
    let mut episodes = Table::new("scaling_episodes", &EPISODE_HEADER);
    let mut means = Table::new("scaling_means", &["pacer", "env", "metric", "T", "mean"]);
    let mut fit = Table::new("scaling_fit", &["pacer", "env", "metric", "status", "slope", "ci_low", "ci_high"]);
    let mut lines = Vec::new();
    // The environment does not depend on T except for campaigns, whose per-day
    // landscape is fixed; build it once at the largest horizon.
    let t_max = *cfg.horizons.iter().max().expect("validated nonempty");
    let built = build_env(spec, t_max, cfg.rho, cfg.master_seed)?;
    let bench = benchmark_per_round(&built, &mc(cfg, exec))?;
    for &kind in &cfg.pacers {
        let s = ScalingSpec {
            seeds: cfg.seeds,
            master_seed: cfg.master_seed,
            alpha: cfg.alpha,
            eta: cfg.eta,
            lambda_init: cfg.lambda_init,
            mu_init: cfg.mu_init,
            ..ScalingSpec::new(kind, cfg.horizons.clone(), cfg.metric, bench)
        };
        let r = scaling_study(built.env.as_ref(), &s, exec)?;
        for rec in &r.episodes {
            let e = &rec.result;
            episodes.push(vec![
                kind.to_string(),
                spec.to_string(),
                rec.horizon.to_string(),
                rec.seed.to_string(),
                num(e.reward),
                num(e.spend),
                num(e.ros_violation),
                e.stopping_time.to_string(),
                e.endurance_gap.to_string(),
                num(e.relative_ros_error),
                num(e.benchmark_value),
            ]);
        }
        for (t, m) in r.horizons.iter().zip(&r.means) {
            means.push(vec![kind.to_string(), spec.to_string(), cfg.metric.as_str().into(), t.to_string(), num(*m)]);
        }
        let (status, slope, lo, hi) = match (r.slope, r.slope_ci) {
            (Some(s), Some((lo, hi))) => ("ok", num(s), num(lo), num(hi)),
            (Some(s), None) => ("ok", num(s), String::new(), String::new()),
            _ => ("metric nonpositive", String::new(), String::new(), String::new()),
        };
        lines.push(match r.slope {
            Some(_) => format!("{kind} on {spec}, {}: log-log slope {slope} (95% CI {lo}..{hi})", cfg.metric.as_str()),
            None => format!("{kind} on {spec}, {}: metric nonpositive at every T", cfg.metric.as_str()),
        });
        fit.push(vec![kind.to_string(), spec.to_string(), cfg.metric.as_str().into(), status.into(), slope, lo, hi]);
    }
    Ok(Outcome {
        tables: vec![episodes, means, fit],
        lines,
    })
}

fn failure_name(f: Option<FailureMode>) -> &'static str {
    match f {
        Some(FailureMode::RosViolation) => "ros-violation",
        Some(FailureMode::Regret) => "regret",
        None => "none",
    }
}

fn demo_seq(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut detail = Table::new(
        "demo_seq",
        &[
            "pacer",
            "mu0",
            "lambda0",
            "T",
            "spend_ros",
            "violation_ros",
            "regret_budget",
            "failure",
            "per_round",
        ],
    );
    let mut summary = Table::new("demo_seq_summary", &["pacer", "mu0", "lambda0", "fails_everywhere", "fails_nowhere", "slope"]);
    let mut lines = Vec::new();
    for &kind in &cfg.pacers {
        for &mu0 in &cfg.mu0 {
            for &lambda0 in &cfg.lambda0 {
                let spec = SequentialFailureSpec {
                    kind,
                    alpha: cfg.alpha,
                    eta: cfg.eta,
                    threshold: cfg.threshold,
                    ..SequentialFailureSpec::new(mu0, lambda0, cfg.horizons.clone())
                };
                let r = sequential_failure_demo(&spec)?;
                for v in &r.verdicts {
                    detail.push(vec![
                        kind.to_string(),
                        num(mu0),
                        num(lambda0),
                        v.horizon.to_string(),
                        num(v.spend_ros),
                        num(v.violation_ros),
                        v.regret_budget.map(num).unwrap_or_default(),
                        failure_name(v.failure).into(),
                        num(v.per_round),
                    ]);
                }
                let slope = r.slope.map(num).unwrap_or_default();
                lines.push(format!(
                    "{kind} mu0={mu0} lambda0={lambda0}: {} (slope {})",
                    r.verdicts
                        .iter()
                        .map(|v| format!("T={} {} {:.4}/round", v.horizon, failure_name(v.failure), v.per_round))
                        .collect::<Vec<_>>()
                        .join(", "),
                    if slope.is_empty() { "n/a" } else { &slope }
                ));
                summary.push(vec![
                    kind.to_string(),
                    num(mu0),
                    num(lambda0),
                    r.fails_everywhere().to_string(),
                    r.fails_nowhere().to_string(),
                    slope,
                ]);
            }
        }
    }
    Ok(Outcome {
        tables: vec![detail, summary],
        lines,
    })
}

fn fleet(cfg: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    let t = cfg.horizons[0];
    let campaigns = (0..cfg.campaigns as u64)
        .map(|i| synthetic_campaign(cfg.master_seed, i, t))
        .collect::<dualpace::Result<Vec<_>>>()?;
    let spec = FleetSpec {
        kinds: cfg.pacers.clone(),
        seeds_per_campaign: cfg.seeds,
        step_grid: cfg.step_grid.clone(),
        master_seed: cfg.master_seed,
        ..FleetSpec::default()
    };
    let results = fleet_study(&campaigns, &spec, exec)?;
    let mut table = Table::new("fleet_table", &["pacer", "threshold", "fraction", "cumulative_value"]);
    let mut grid = Table::new("fleet_grid", &["pacer", "alpha_scale", "eta_scale", "zero_error_value", "best"]);
    let mut per = Table::new("fleet_campaigns", &["pacer", "campaign", "reward", "benchmark", "relative_ros_error"]);
    let mut lines = Vec::new();
    for r in &results {
        for row in &r.table {
            table.push(vec![r.kind.to_string(), num(row.threshold), num(row.fraction), num(row.cumulative_value)]);
        }
        for g in &r.grid {
            grid.push(vec![
                r.kind.to_string(),
                num(g.alpha_scale),
                num(g.eta_scale),
                num(g.zero_error_value),
                (g == &r.best).to_string(),
            ]);
        }
        for (i, c) in r.campaigns.iter().enumerate() {
            per.push(vec![r.kind.to_string(), i.to_string(), num(c.reward), num(c.benchmark), num(c.relative_ros_error)]);
        }
        lines.push(format!(
            "{}: best steps ({}, {})/sqrt(T); zero-error fraction {:.3}, value {:.3}",
            r.kind, r.best.alpha_scale, r.best.eta_scale, r.table[0].fraction, r.table[0].cumulative_value
        ));
    }
    Ok(Outcome {
        tables: vec![table, grid, per],
        lines,
    })
}

fn oracle(cfg: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    let spec = env_spec(cfg)?;
    let t = cfg.horizons[0];
    let built = build_env(spec, t, cfg.rho, cfg.master_seed)?;
    let env = built.env.as_ref();
    let rho = env.rho();
    let mc = mc(cfg, exec);
    let tol = crossing_tolerance(env);
    let kb = crossing_of(CurveKind::Budget, env, rho, tol, &mc)?;
    let kr = crossing_of(CurveKind::Ros, env, rho, tol, &mc)?;
    let bench = uniform_benchmark(env, rho, tol, &mc)?;
    let (lambda_star, mu_star) = match bench.binding {
        dualpace::oracle::Binding::Budget => (0.0, 1.0 / bench.k_star),
        _ => (1.0 / (bench.k_star - 1.0).max(f64::MIN_POSITIVE), 0.0),
    };
    let dual = dual_function(env, rho, lambda_star, mu_star, &mc)?;
    let mut table = Table::new("oracle", &["quantity", "value", "se"]);
    let opt = |c: Option<dualpace::oracle::Crossing>| c.map_or((String::new(), String::new()), |c| (num(c.k), num(c.se)));
    let (kb_s, kb_se) = opt(kb);
    let (kr_s, kr_se) = opt(kr);
    table.push(vec!["rho".into(), num(rho), "0".into()]);
    table.push(vec!["k_B".into(), kb_s.clone(), kb_se]);
    table.push(vec!["k_R".into(), kr_s.clone(), kr_se]);
    table.push(vec!["k_star".into(), num(bench.k_star), String::new()]);
    table.push(vec!["binding".into(), bench.binding.as_str().into(), String::new()]);
    table.push(vec!["lambda_star".into(), num(lambda_star), String::new()]);
    table.push(vec!["mu_star".into(), num(mu_star), String::new()]);
    table.push(vec!["dual_value".into(), num(dual.value), num(dual.se)]);
    table.push(vec!["benchmark_per_round".into(), num(bench.value_per_round), num(bench.se)]);
    let mut lines = vec![
        format!("env {spec}: rho = {rho}"),
        format!("k_B = {}", if kb_s.is_empty() { "none (budget never binds)" } else { &kb_s }),
        format!("k_R = {}", if kr_s.is_empty() { "none (ROS never binds)" } else { &kr_s }),
        format!("k* = {} ({} binding)", bench.k_star, bench.binding.as_str()),
        format!("D(lambda*, mu*) = {} at lambda* = {lambda_star}, mu* = {mu_star}", dual.value),
        format!("benchmark per round = {}", bench.value_per_round),
    ];
    if let Some(l) = &built.landscape {
        let f = fluid_benchmark(l as &dyn FluidLandscape, 1e-9)?;
        table.push(vec!["fluid_k_star".into(), num(f.k_star), String::new()]);
        table.push(vec!["fluid_conv_per_round".into(), num(f.conv_star), String::new()]);
        table.push(vec!["fluid_spend_per_round".into(), num(f.spend_star), String::new()]);
        lines.push(format!(
            "fluid benchmark: k* = {}, conversions/round = {}, spend/round = {} ({} binding)",
            f.k_star,
            f.conv_star,
            f.spend_star,
            f.binding.as_str()
        ));
    }
    Ok(Outcome {
        tables: vec![table],
        lines,
    })
}
