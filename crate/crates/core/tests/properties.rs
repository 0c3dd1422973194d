use dualpace::env::EmpiricalEnv;
use dualpace::experiments::{run_batch, BatchSpec};
use dualpace::invariants::{check_trajectory, ros_violation_bound};
use dualpace::oracle::{dual_function, offline_opt_relaxed, offline_opt_small, outcome_moments, MonteCarlo};
use dualpace::rng::stream;
use dualpace::{
    compute_bid, simulate, update_duals, AuctionSample, BidOutcome, DualState, Exec,
    ExponentialSecondPriceEnv, PacerConfig, PacerKind,
};
use proptest::prelude::*;

fn second_price_stream() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01f64..2.0, 0.01f64..2.0), 1..8)
}

fn samples(pairs: &[(f64, f64)]) -> Vec<AuctionSample> {
    pairs.iter().map(|&(v, d)| AuctionSample::second_price(v, d)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn min_pacer_meets_its_bounds(seed in 0u64..10_000, rho in 0.05f64..2.0, t in 50usize..3000, scale in 1.0f64..4.0) {
        let env = ExponentialSecondPriceEnv::new(0.5, 1.0, rho).unwrap();
        let root = (t as f64).sqrt();
        let cfg = PacerConfig::auto(rho, t).with_steps(scale / root, 1.0 / root);
        let traj = simulate(PacerKind::Min, &env, t, &cfg, &mut stream(seed, &[t as u64])).unwrap();
        let report = check_trajectory(&traj).unwrap();
        prop_assert_eq!(report.ros_bound, Some(ros_violation_bound(t, 1.0)));
        prop_assert_eq!(report.mu_cap.is_some(), rho <= 1.0 / rho + 1.0);
        let spend: f64 = traj.payment.iter().sum();
        prop_assert!(spend <= rho * t as f64 + 1e-9);
    }

    #[test]
    fn bids_follow_the_multiplier_formulas(
        lambda in 0.01f64..10.0,
        mu in 0.01f64..10.0,
        v in 0.0f64..3.0,
        remaining in 0.0f64..5.0,
    ) {
        let mut s = DualState::new(&PacerConfig::auto(1.0, 100), 100).unwrap();
        s.lambda = lambda;
        s.mu = mu;
        s.remaining_budget = remaining;
        let k_dual = (1.0 + lambda) / (mu + lambda);
        let k_seq = (1.0 + 1.0 / lambda) / mu;
        let k_min = (1.0 + 1.0 / lambda).min(1.0 / mu);
        for (kind, k) in [(PacerKind::DualOptimal, k_dual), (PacerKind::Sequential, k_seq), (PacerKind::Min, k_min)] {
            let b = compute_bid(kind, &s, v).unwrap();
            prop_assert!((b - (k * v).min(remaining)).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn dual_steps_are_multiplicative(
        lambda in 0.01f64..10.0,
        mu in 0.01f64..10.0,
        vx in 0.0f64..2.0,
        p in 0.0f64..2.0,
        alpha in 0.0f64..0.5,
        eta in 0.0f64..0.5,
    ) {
        let cfg = PacerConfig::auto(0.5, 100).with_steps(alpha, eta);
        let mut s = DualState::new(&cfg, 100).unwrap();
        s.lambda = lambda;
        s.mu = mu;
        let out = BidOutcome { bid: 1.0, allocation: 1.0, payment: p, value_gained: vx };
        let next = update_duals(&s, &out);
        prop_assert!((next.lambda - lambda * (-alpha * (vx - p)).exp()).abs() <= 1e-12 * next.lambda);
        prop_assert!((next.mu - mu * (-eta * (0.5 - p)).exp()).abs() <= 1e-12 * next.mu);
        prop_assert!((next.remaining_budget - (s.remaining_budget - p)).abs() <= 1e-9);
    }

    #[test]
    fn batches_do_not_depend_on_the_executor(master in 0u64..1000, kind_idx in 0usize..3, rho in 0.1f64..1.5) {
        let env = ExponentialSecondPriceEnv::new(0.5, 1.0, rho).unwrap();
        let spec = BatchSpec {
            kind: PacerKind::ALL[kind_idx],
            horizon: 200,
            seeds: 6,
            config: PacerConfig::auto(rho, 200),
            master_seed: master,
            benchmark_per_round: 0.3,
            check_invariants: false,
        };
        let a = run_batch(&env, &spec, Exec::Parallel).unwrap();
        let b = run_batch(&env, &spec, Exec::Sequential).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn empirical_moments_are_plain_averages(pairs in second_price_stream(), k in 0.0f64..4.0) {
        let env = EmpiricalEnv { samples: samples(&pairs), rho: 0.5 };
        let m = outcome_moments(&env, k, &MonteCarlo::new(10, 0)).unwrap();
        let n = pairs.len() as f64;
        let value: f64 = pairs.iter().map(|&(v, d)| if d < k * v { v } else { 0.0 }).sum::<f64>() / n;
        let pay: f64 = pairs.iter().map(|&(v, d)| if d < k * v { d } else { 0.0 }).sum::<f64>() / n;
        prop_assert!((m.mean_value - value).abs() < 1e-12);
        prop_assert!((m.mean_payment - pay).abs() < 1e-12);
    }

    #[test]
    fn offline_optimum_below_every_dual_value(
        pairs in second_price_stream(),
        rho in 0.05f64..1.5,
        lambda in 0.0f64..5.0,
        mu in 0.01f64..5.0,
    ) {
        let stream = samples(&pairs);
        let t = stream.len() as f64;
        let opt = offline_opt_small(&stream, rho, 0.1).unwrap();
        let env = EmpiricalEnv { samples: stream.clone(), rho };
        let d = dual_function(&env, rho, lambda, mu, &MonteCarlo::new(10, 0)).unwrap();
        prop_assert!(opt.value <= t * d.value + 1e-9);
        prop_assert!(opt.spend <= rho * t + 1e-9);
    }

    #[test]
    fn offline_optimum_monotone_in_budget_and_slack(pairs in second_price_stream(), rho in 0.05f64..1.0, slack in 0.0f64..1.0) {
        let stream = samples(&pairs);
        let base = offline_opt_small(&stream, rho, 0.1).unwrap().value;
        let richer = offline_opt_small(&stream, 2.0 * rho, 0.1).unwrap().value;
        let relaxed = offline_opt_relaxed(&stream, rho, 0.1, slack).unwrap().value;
        prop_assert!(richer >= base - 1e-12);
        prop_assert!(relaxed >= base - 1e-12);
    }
}

