use satsec::chanmodel::{draw_channel_set, stream_rng, ChannelConfig, ChannelSet};
use satsec::config::{ExperimentSpec, SweepVar};
use satsec::harness::{evaluate, realization_channels};
use satsec::ratemodel::PowerBudget;
use satsec::sca::{sca_solve, sca_solve_from, solve_power_min, BeamformingSolution, Method, ScaConfig};
use satsec::{benchmarks, Error};

fn instance(seed: u64) -> ChannelSet {
    draw_channel_set(&mut stream_rng(seed, 0), &mut stream_rng(seed, 1), &ChannelConfig::default_for(3), 4).unwrap()
}

#[test]
fn infinite_epsilon_stops_after_one_solve() {
    let mut cfg = ScaConfig::new(3, 0.5);
    cfg.epsilon = f64::INFINITY;
    let sol = sca_solve(&instance(1), &PowerBudget::from_db(20.0, 30.0), &cfg).unwrap();
    assert_eq!(sol.trace.iterations(), 1);
    assert!(sol.trace.converged);
}

#[test]
fn unattainable_threshold_is_reported() {
    let err = sca_solve(&instance(2), &PowerBudget::from_db(20.0, 30.0), &ScaConfig::new(3, 60.0)).unwrap_err();
    assert!(matches!(err, Error::InfeasibleQ(_)), "{err}");
}

#[test]
fn zero_threshold_is_always_feasible() {
    let budget = PowerBudget::from_db(20.0, 30.0);
    let cfg = ScaConfig::new(3, 0.0);
    for seed in 0..20 {
        match sca_solve(&instance(seed), &budget, &cfg) {
            Err(Error::InfeasibleQ(s)) => panic!("seed {seed}: {s:?}"),
            _ => {}
        }
    }
}

#[test]
fn low_bs_power_instance_needs_a_backed_off_start() {
    // infeasible first subproblem from the uniform start at P_B = 20 dB
    let spec = ExperimentSpec::default();
    let ch = realization_channels(&spec, 0, 4, 0.0).unwrap();
    let budget = PowerBudget::from_db(20.0, 20.0);
    let sol = sca_solve(&ch, &budget, &ScaConfig::new(3, 0.5)).unwrap();
    assert!(sol.satellite_power() <= budget.p_s * (1.0 + 1e-6));
    assert!(sol.objective > 0.0);
}

#[test]
fn solution_json_round_trip() {
    let budget = PowerBudget::from_db(20.0, 30.0);
    let sol = sca_solve(&instance(4), &budget, &ScaConfig::new(3, 0.5)).unwrap();
    let back = BeamformingSolution::from_json(&sol.to_json().unwrap()).unwrap();
    assert_eq!(back.method, Method::Proposed);
    assert!((back.objective - sol.objective).abs() < 1e-12);
    assert_eq!(back.w_vecs, sol.w_vecs);
}

#[test]
fn power_min_rejects_benchmarks_and_bad_targets() {
    let ch = instance(5);
    let budget = PowerBudget::from_db(20.0, 30.0);
    let cfg = ScaConfig::new(3, 0.5);
    let zf = benchmarks::zf_baseline(&ch, &budget, &cfg).unwrap();
    assert!(solve_power_min(&ch, &budget, &cfg, &zf, 1.0).is_err());
    let sol = sca_solve(&ch, &budget, &cfg).unwrap();
    assert!(solve_power_min(&ch, &budget, &cfg, &sol, f64::NAN).is_err());
    // far above the subproblem maximum
    assert!(solve_power_min(&ch, &budget, &cfg, &sol, sol.objective + 5.0).is_err());
}

#[test]
fn lower_target_needs_less_power() {
    let ch = instance(6);
    let budget = PowerBudget::from_db(20.0, 30.0);
    let cfg = ScaConfig::new(3, 0.5);
    let sol = sca_solve(&ch, &budget, &cfg).unwrap();
    let phi = sol.objective * std::f64::consts::LN_2;
    let near = solve_power_min(&ch, &budget, &cfg, &sol, phi - 1e-3).unwrap();
    let far = solve_power_min(&ch, &budget, &cfg, &sol, phi - 1.0).unwrap();
    assert!(far.total_power(&budget) < near.total_power(&budget));
    assert!(near.total_power(&budget) <= sol.total_power(&budget) + 1e-6);
    assert!(far.objective >= (phi - 1.0) / std::f64::consts::LN_2 - 1e-6);
}

#[test]
fn warm_start_from_fewer_antennas_does_not_lose_secrecy() {
    // a fresh start at M = 5 lands in a poor local optimum on this realization
    let spec = ExperimentSpec::preset(SweepVar::M);
    let budget = PowerBudget::from_db(20.0, 30.0);
    let cfg = ScaConfig::new(3, 0.5);
    let small = realization_channels(&spec, 16, 4, 0.0).unwrap();
    let large = realization_channels(&spec, 16, 5, 0.0).unwrap();
    let base = sca_solve(&small, &budget, &cfg).unwrap();
    let warm = sca_solve_from(&large, &budget, &cfg, &base).unwrap();
    assert_eq!(warm.f_mats[0].nrows(), 5);
    let before = evaluate(&base, &small, &budget, &cfg).unwrap().sum_r_su;
    let after = evaluate(&warm, &large, &budget, &cfg).unwrap().sum_r_su;
    assert!(after >= before - 1e-3, "{after} < {before}");
}
