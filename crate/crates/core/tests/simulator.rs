use storage_equilibria::centralized::rollout;
use storage_equilibria::equilibrium::{
    heterogeneous_two_period, multi_period_relaxed, payoff_private, strategy_payoffs,
    targeted_release, two_period_private, two_period_public, uniform_costs, Coefficients,
};
use storage_equilibria::market::{sample_replication, InfoStructure, MarketParams, Rho};
use storage_equilibria::simulator::{
    best_response_audit, conservation_audit, estimate_payoff, GridSpec, SimConfig, Variant,
};
use storage_equilibria::LinearStrategy;

fn baseline() -> MarketParams {
    MarketParams::two_period(2.0, 1.0, 1.0, 1.0)
}

fn private_info() -> InfoStructure {
    InfoStructure::new(1.0, 0.0, 1.0, 1.0, 0.0)
}

#[test]
fn private_n1_matches_hand_value() {
    let s = two_period_private(&baseline(), &private_info(), 1).unwrap();
    let r = estimate_payoff(
        &baseline(),
        &private_info(),
        1,
        &s,
        &SimConfig::new(Variant::Private, 1_000_000, 11),
    )
    .unwrap();
    assert!(
        (r.mean_payoff[0] - 0.09375).abs() < 3.0 * r.std_error[0],
        "{} ± {}",
        r.mean_payoff[0],
        r.std_error[0]
    );
    assert_eq!(r.conservation_residual, 0.0);
}

#[test]
fn zero_information_leaves_base_term() {
    let info = InfoStructure::new(1.0, 0.0, 1.0, 0.0, 0.0);
    let p = baseline();
    let s = two_period_private(&p, &info, 3).unwrap();
    let a = s.rule(0, 0).a;
    let r = estimate_payoff(&p, &info, 3, &s, &SimConfig::new(Variant::Private, 20_000, 5)).unwrap();
    let expected = 4.0 * a * a;
    for i in 0..3 {
        assert!((r.mean_payoff[i] - expected).abs() <= 3.0 * r.std_error[i] + 1e-12);
    }
}

#[test]
fn std_error_scales_with_root_replications() {
    let p = baseline();
    let s = two_period_private(&p, &private_info(), 2).unwrap();
    let small = estimate_payoff(&p, &private_info(), 2, &s, &SimConfig::new(Variant::Private, 50_000, 3)).unwrap();
    let large = estimate_payoff(&p, &private_info(), 2, &s, &SimConfig::new(Variant::Private, 100_000, 3)).unwrap();
    let ratio = small.std_error[0] / large.std_error[0];
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn identical_across_thread_counts() {
    let p = baseline();
    let info = InfoStructure::new(1.0, 0.3, 1.0, 2.0, 1.5);
    let s = two_period_public(&p, &info, 4).unwrap();
    let mut cfg = SimConfig::new(Variant::Public, 30_000, 99);
    cfg.audit = true;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_payoff(&p, &info, 4, &s, &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn every_two_period_variant_agrees_with_exact_moments() {
    let p = MarketParams::new(vec![1.5, 0.2], vec![0.8, 1.4], vec![0.6, 1.1]);
    let mut info = InfoStructure::new(1.3, 0.4, 0.7, 1.8, 2.2);
    let n = 4;
    let cases: Vec<(Variant, LinearStrategy, Option<Vec<Vec<f64>>>)> = vec![
        (Variant::Private, two_period_private(&p, &info.with_sigma(0.0), n).unwrap(), None),
        (Variant::Public, two_period_public(&p, &info, n).unwrap(), None),
        (Variant::Targeted, targeted_release(&p, &info, n, 2).unwrap(), None),
        {
            info.rho = Rho::PerStorage(vec![0.5, 1.0, 2.0, 4.0]);
            let costs = vec![vec![0.3, 0.4], vec![1.0, 1.0], vec![2.0, 0.5], vec![0.6, 1.1]];
            let s = heterogeneous_two_period(&p, &info, &costs).unwrap();
            (Variant::Heterogeneous, s, Some(costs))
        },
    ];
    for (k, (variant, s, costs)) in cases.into_iter().enumerate() {
        let run_info = if variant == Variant::Private { info.with_sigma(0.0) } else { info.clone() };
        let run_info = if variant == Variant::Heterogeneous {
            run_info
        } else {
            InfoStructure { rho: Rho::Common(1.8), ..run_info }
        };
        let exact = strategy_payoffs(&s, &p, &run_info, n, costs.as_deref()).unwrap();
        let mut cfg = SimConfig::new(variant, 100_000, 1000 + k as u64);
        cfg.costs = costs;
        let r = estimate_payoff(&p, &run_info, n, &s, &cfg).unwrap();
        for i in 0..n {
            assert!(
                (r.mean_payoff[i] - exact[i]).abs() < 3.0 * r.std_error[i],
                "{variant} storage {i}: {} vs {} ± {}",
                r.mean_payoff[i],
                exact[i],
                r.std_error[i]
            );
        }
    }
}

#[test]
fn sharing_matches_public_at_pooled_precision() {
    let p = baseline();
    let info = InfoStructure::new(1.0, 0.2, 1.0, 0.5, 0.0);
    let n = 5;
    let pooled = info.with_sigma(2.5);
    let s = two_period_public(&p, &pooled, n).unwrap();
    let exact = strategy_payoffs(&s, &p, &pooled, n, None).unwrap();
    let r = estimate_payoff(&p, &info, n, &s, &SimConfig::new(Variant::Sharing, 100_000, 8)).unwrap();
    assert!((r.mean_payoff[0] - exact[0]).abs() < 3.0 * r.std_error[0]);
}

#[test]
fn equilibrium_has_no_profitable_deviation_and_perturbation_does() {
    let p = baseline();
    let info = private_info();
    let s = two_period_private(&p, &info, 3).unwrap();
    let report = best_response_audit(&p, &info, 3, &s, Variant::Private, None, Some(GridSpec::default())).unwrap();
    assert!(report[0].certified);
    assert!(report[0].grid_gain.unwrap() <= 1e-12);

    let c = s.rule(0, 0);
    let perturbed = LinearStrategy::Symmetric(Coefficients::new(c.a + 0.01, c.b, c.c));
    let report = best_response_audit(&p, &info, 3, &perturbed, Variant::Private, None, Some(GridSpec::default())).unwrap();
    assert!(report[0].gain > 0.0);
    assert!(!report[0].certified);
    // the grid cannot beat the exact optimum
    assert!(report[0].grid_gain.unwrap() <= report[0].gain + 1e-15);
    assert!(report[0].grid_gain.unwrap() > 0.0);
}

#[test]
fn targeted_groups_both_certify() {
    let p = baseline();
    let info = InfoStructure::new(1.0, 0.3, 1.0, 1.0, 2.0);
    let s = targeted_release(&p, &info, 6, 3).unwrap();
    let report = best_response_audit(&p, &info, 6, &s, Variant::Targeted, None, None).unwrap();
    assert_eq!(report.len(), 2);
    assert!(report.iter().all(|r| r.certified), "{report:?}");
}

#[test]
fn monte_carlo_deviation_gain_is_consistent() {
    let p = baseline();
    let info = private_info();
    let c = two_period_private(&p, &info, 2).unwrap().rule(0, 0);
    let perturbed = LinearStrategy::Symmetric(Coefficients::new(c.a + 0.05, 0.0, c.c - 0.03));
    let audit = best_response_audit(&p, &info, 2, &perturbed, Variant::Private, None, None).unwrap();
    let mut cfg = SimConfig::new(Variant::Private, 100_000, 4);
    cfg.audit = true;
    let r = estimate_payoff(&p, &info, 2, &perturbed, &cfg).unwrap();
    let d = r.deviation.unwrap();
    assert!((d.gain - audit[0].gain).abs() < 3.0 * d.std_error, "{} vs {}", d.gain, audit[0].gain);
}

#[test]
fn centralized_rollout_conserves_energy() {
    let p = MarketParams::new(vec![3.0, 1.0, 2.0, 0.5], vec![1.0; 4], vec![0.5; 4]);
    let info = InfoStructure::new(1.0, 0.6, 2.0, 3.0, 0.0);
    for rep in 0..1000 {
        let path = sample_replication(4, &info, 1, 17, rep);
        let (filled, _) = rollout(&p, &info, &path).unwrap();
        assert!(conservation_audit(&filled)[0] < 1e-12);
    }
    let s = LinearStrategy::Symmetric(Coefficients::default());
    let r = estimate_payoff(&p, &info, 1, &s, &SimConfig::new(Variant::Centralized, 5_000, 1)).unwrap();
    assert!(r.conservation_residual < 1e-12);
}

#[test]
fn relaxed_rule_conserves_in_mean_and_closing_mode_exactly() {
    let p = MarketParams::new(vec![2.0, 1.0, 1.5], vec![1.0, 0.5, 2.0], vec![1.0, 2.0, 0.5]);
    let info = InfoStructure::new(1.0, 0.5, 1.0, 1.0, 1.0);
    let s = multi_period_relaxed(&p, &info, 3).unwrap();
    let r = estimate_payoff(&p, &info, 3, &s, &SimConfig::new(Variant::MultiPeriod, 100_000, 2)).unwrap();
    for i in 0..3 {
        assert!(r.path_sum_mean[i].abs() < 3.0 * r.path_sum_std_error[i]);
    }
    let mut cfg = SimConfig::new(Variant::MultiPeriod, 10_000, 2);
    cfg.close_final = true;
    let closed = estimate_payoff(&p, &info, 3, &s, &cfg).unwrap();
    assert!(closed.conservation_residual < 1e-12);
}

#[test]
fn no_single_replication_dominates() {
    let p = baseline();
    let s = two_period_private(&p, &private_info(), 1).unwrap();
    let r = estimate_payoff(&p, &private_info(), 1, &s, &SimConfig::new(Variant::Private, 100_000, 0)).unwrap();
    assert!(r.max_contribution < 0.01, "{}", r.max_contribution);
    let report = payoff_private(&s, &p, &private_info(), 1).unwrap();
    assert!((r.mean_payoff[0] - report.exact).abs() < 3.0 * r.std_error[0]);
}

#[test]
fn mismatched_shapes_are_rejected() {
    let p = baseline();
    let info = private_info();
    let s = two_period_private(&p, &info, 2).unwrap();
    assert!(estimate_payoff(&p, &info, 2, &s, &SimConfig::new(Variant::Targeted, 10, 0)).is_err());
    assert!(estimate_payoff(&p, &info, 2, &s, &SimConfig::new(Variant::Centralized, 10, 0)).is_err());
    assert!(estimate_payoff(&p, &info, 2, &s, &SimConfig::new(Variant::Private, 0, 0)).is_err());
    let h = heterogeneous_two_period(&p, &info, &uniform_costs(&p, 2)).unwrap();
    assert!(estimate_payoff(&p, &info, 3, &h, &SimConfig::new(Variant::Heterogeneous, 10, 0)).is_err());
}
