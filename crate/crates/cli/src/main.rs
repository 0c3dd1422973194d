use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use dualpace::exec::with_jobs;
use dualpace::Exec;
use dualpace_cli::commands::execute;
use dualpace_cli::config::{OneOrMany, StepValue};
use dualpace_cli::output::write_outputs;
use dualpace_cli::{resolve, CliError, Command, RawConfig, EXIT_IO};

const OUT_ENV: &str = "DUALPACE_OUT";

/// Budget and ROS pacing simulator.
///
/// Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 oracle assumption
/// violated, 4 invariant violated.
#[derive(Parser, Debug)]
#[command(name = "dualpace", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Simulate episodes and write one CSV row per episode plus a summary.
    Run(Flags),
    /// Growth of regret, ROS violation or endurance gap across horizons.
    Scale(Flags),
    /// Sequential-pacing failure harness on the two point-mass instances.
    DemoSeq(Flags),
    /// Step-size grid search and bucket tables over synthetic campaigns.
    Fleet(Flags),
    /// Crossing points, optimal duals, dual value and benchmark for one environment.
    Oracle(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pacer kind(s): dual-optimal, sequential, min. Comma separated.
    #[arg(long, value_delimiter = ',')]
    pacer: Vec<String>,
    /// exponential | adversarial-ros | adversarial-budget:<mu0> | campaign:<file.json> | synthetic:<index>
    #[arg(long)]
    env: Option<String>,
    /// Horizon (run, oracle; fleet default 144).
    #[arg(long = "T")]
    horizon: Option<i64>,
    /// Horizons, comma separated (scale; demo-seq default 1000,10000,100000).
    #[arg(long = "T-list", value_delimiter = ',')]
    horizons: Vec<i64>,
    /// Per-round budget; defaults to the environment's own.
    #[arg(long)]
    rho: Option<f64>,
    /// ROS dual step: "auto" (1/sqrt(T), default) or a number.
    #[arg(long)]
    alpha: Option<String>,
    /// Budget dual step: "auto" (1/sqrt(T), default) or a number.
    #[arg(long)]
    eta: Option<String>,
    /// Initial ROS dual (default 1).
    #[arg(long)]
    lambda_init: Option<f64>,
    /// Initial budget dual (default rho).
    #[arg(long)]
    mu_init: Option<f64>,
    /// Episodes per configuration (run 1, scale 30, fleet 10 per campaign).
    #[arg(long)]
    seeds: Option<u64>,
    /// Master seed (default 0).
    #[arg(long)]
    master_seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Force single-threaded execution.
    #[arg(long)]
    sequential: bool,
    /// Output directory [env: DUALPACE_OUT] (default ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the invariant assertions in `run`.
    #[arg(long)]
    no_assert: bool,
    /// scale: regret | ros-violation | endurance (default regret).
    #[arg(long)]
    metric: Option<String>,
    /// demo-seq: initial budget duals (default 0.5,1,2).
    #[arg(long, value_delimiter = ',')]
    mu0: Vec<f64>,
    /// demo-seq: initial ROS duals (default 0.5,1,2).
    #[arg(long, value_delimiter = ',')]
    lambda0: Vec<f64>,
    /// demo-seq: failure threshold as a fraction of T (default 0.01).
    #[arg(long)]
    threshold: Option<f64>,
    /// fleet: number of synthetic campaigns (default 200).
    #[arg(long)]
    campaigns: Option<usize>,
    /// fleet: step scales c in c/sqrt(T), comma separated (default 0.3,1,3).
    #[arg(long, value_delimiter = ',')]
    step_grid: Vec<f64>,
    /// Monte Carlo samples for oracle estimates (default 1000000).
    #[arg(long)]
    mc_samples: Option<usize>,
}

fn nonempty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

impl Flags {
    fn to_raw(&self) -> Result<RawConfig, CliError> {
        let step = |s: &Option<String>| s.as_deref().map(str::parse::<StepValue>).transpose();
        Ok(RawConfig {
            pacer: nonempty(self.pacer.clone()).map(OneOrMany::Many),
            env: self.env.clone(),
            horizon: self.horizon,
            horizons: nonempty(self.horizons.clone()),
            rho: self.rho,
            alpha: step(&self.alpha)?,
            eta: step(&self.eta)?,
            lambda_init: self.lambda_init,
            mu_init: self.mu_init,
            seeds: self.seeds,
            master_seed: self.master_seed,
            out: self.out.clone(),
            metric: self.metric.clone(),
            mu0: nonempty(self.mu0.clone()).map(OneOrMany::Many),
            lambda0: nonempty(self.lambda0.clone()).map(OneOrMany::Many),
            threshold: self.threshold,
            campaigns: self.campaigns,
            step_grid: nonempty(self.step_grid.clone()),
            mc_samples: self.mc_samples,
            assert: self.no_assert.then_some(false),
        })
    }
}

fn run(command: Command, name: &str, flags: &Flags) -> anyhow::Result<()> {
    let file = match &flags.config {
        Some(p) => RawConfig::from_file(p)?,
        None => RawConfig::default(),
    };
    let mut raw = file.merged(flags.to_raw()?);
    if raw.out.is_none() {
        raw.out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    }
    let cfg = resolve(command, &raw)?;
    let exec = if flags.sequential { Exec::Sequential } else { Exec::Parallel };
    let outcome = with_jobs(flags.jobs, || execute(&cfg, exec))?;
    for line in &outcome.lines {
        println!("{line}");
    }
    let written = write_outputs(&cfg.out, name, &cfg, &outcome.tables)
        .with_context(|| format!("writing results to {}", cfg.out.display()))?;
    eprintln!("wrote {} files to {}", written.len(), cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, name, flags) = match &cli.command {
        Sub::Run(f) => (Command::Run, "run", f),
        Sub::Scale(f) => (Command::Scale, "scale", f),
        Sub::DemoSeq(f) => (Command::DemoSeq, "demo-seq", f),
        Sub::Fleet(f) => (Command::Fleet, "fleet", f),
        Sub::Oracle(f) => (Command::Oracle, "oracle", f),
    };
    match run(command, name, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .chain()
                .find_map(|c| c.downcast_ref::<CliError>().map(CliError::exit_code))
                .or_else(|| {
                    e.chain()
                        .find_map(|c| c.downcast_ref::<dualpace_cli::ConfigError>())
                        .map(|_| dualpace_cli::EXIT_CONFIG)
                })
                .unwrap_or(EXIT_IO);
            ExitCode::from(code as u8)
        }
    }
}
