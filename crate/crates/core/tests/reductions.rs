//! Identities connecting the models to each other.

use storage_equilibria::bayes::posterior_t1_private;
use storage_equilibria::centralized::{foc_residuals, optimal_quantity, plan, rollout};
use storage_equilibria::equilibrium::{
    payoff_public, sharing_compare, strategy_payoffs, targeted_aggregate_payoff,
    targeted_release, two_period_private, two_period_public,
};
use storage_equilibria::market::{sample_replication, InfoStructure, MarketParams};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-10
}

#[test]
fn single_storage_matches_centralized_two_period_rule() {
    for &(b1, b2, g, e, delta, rho) in &[
        (2.0, 1.0, 1.0, 1.0, 0.0, 1.0),
        (0.5, 3.0, 0.7, 2.0, 0.6, 4.0),
        (1.0, -1.0, 3.0, 0.2, -0.5, 0.3),
    ] {
        let p = MarketParams::two_period(b1, b2, g, e);
        let info = InfoStructure::new(1.5, delta, 1.0, rho, 0.0);
        let c = two_period_private(&p, &info, 1).unwrap().rule(0, 0);
        for x in [-2.0, 0.0, 0.7] {
            let post = posterior_t1_private(x, &info);
            let d = optimal_quantity(1, &p, &info, &[], &post).unwrap();
            assert!(close(d, c.a + c.c * x), "{d} vs {}", c.a + c.c * x);
        }
    }
}

#[test]
fn rollout_first_period_equals_decentralized_rule() {
    let p = MarketParams::two_period(2.0, 1.0, 1.0, 1.0);
    let info = InfoStructure::new(1.0, 0.3, 1.0, 2.0, 0.0);
    let c = two_period_private(&p, &info, 1).unwrap().rule(0, 0);
    for rep in 0..50 {
        let path = sample_replication(2, &info, 1, 7, rep);
        let (filled, trace) = rollout(&p, &info, &path).unwrap();
        let x = path.private_forecasts[0][0];
        assert!(close(trace[0].quantity, c.a + c.c * x));
        assert_eq!(filled.quantities[0][1], -filled.quantities[0][0]);
    }
}

/// Brute-force the period-`t` subproblem: the plan's first-order conditions hold and no other
/// period-`t` quantity does better given the certainty-equivalent continuation.
#[test]
fn centralized_plan_solves_its_subproblem() {
    let p = MarketParams::new(vec![3.0, 1.0, 2.5, 0.5], vec![0.8; 4], vec![0.6; 4]);
    let info = InfoStructure::new(1.0, 0.7, 2.0, 3.0, 0.0);
    let history = [0.4];
    let post = storage_equilibria::bayes::posterior_ar1(0.9, 0.2, &info);
    let residuals = foc_residuals(2, &p, &info, &history, &post).unwrap();
    assert!(residuals.iter().all(|r| r.abs() < 1e-12), "{residuals:?}");

    let (gamma, eps) = (0.8, 0.6);
    // certainty-equivalent value of committing d now and splitting the rest optimally
    let value = |d: f64| {
        let remaining = 2.0;
        let future: Vec<f64> = (3..=4)
            .map(|tau| p.beta[tau - 1] + info.delta.powi(tau as i32 - 2) * post.value)
            .collect();
        let mean_future = future.iter().sum::<f64>() / remaining;
        let carried = history[0] + d;
        let rest: Vec<f64> = future
            .iter()
            .map(|f| (f - mean_future) / (2.0 * (eps + gamma)) - carried / remaining)
            .collect();
        let now = (p.beta[1] + post.value) * d - (gamma + eps) * d * d;
        now + future
            .iter()
            .zip(&rest)
            .map(|(f, q)| f * q - (gamma + eps) * q * q)
            .sum::<f64>()
    };
    let best = plan(2, &p, &info, &history, &post).unwrap().decision;
    let grid_best = (-4000..=4000)
        .map(|k| best + k as f64 * 1e-4)
        .max_by(|a, b| value(*a).total_cmp(&value(*b)))
        .unwrap();
    assert!((grid_best - best).abs() < 1e-4 + 1e-12);
}

#[test]
fn full_targeting_equals_public_forecast() {
    let p = MarketParams::new(vec![1.0, 0.3], vec![1.2, 0.4], vec![0.8, 0.9]);
    let info = InfoStructure::new(0.7, 0.2, 1.0, 1.0, 3.0);
    for n in [1, 4, 15] {
        let targeted = targeted_release(&p, &info, n, n).unwrap();
        let public = two_period_public(&p, &info, n).unwrap();
        let (t, q) = (targeted.rule(0, 0), public.rule(0, 0));
        assert!(close(t.a, q.a) && close(t.b, q.b));
        let report = targeted_aggregate_payoff(&p, &info, n, n).unwrap();
        let single = payoff_public(&public, &p, &info, n).unwrap();
        assert!(close(report.exact, single.aggregate));
        assert!(close(report.published.unwrap(), n as f64 * single.published.unwrap()));
    }
}

#[test]
fn pooled_precision_equals_sharing() {
    let p = MarketParams::two_period(2.0, 1.0, 1.0, 1.0);
    let info = InfoStructure::new(1.0, 0.4, 1.0, 0.6, 0.0);
    for n in [1, 3, 25] {
        let cmp = sharing_compare(&p, &info, n).unwrap();
        let public_info = info.with_sigma(n as f64 * 0.6);
        let public = payoff_public(&two_period_public(&p, &public_info, n).unwrap(), &p, &public_info, n).unwrap();
        assert!(close(cmp.shared.exact, public.exact));
        assert!(close(cmp.shared.published.unwrap(), public.published.unwrap()));
    }
}

#[test]
fn moment_payoffs_match_closed_forms() {
    let p = MarketParams::new(vec![1.0, 0.3], vec![1.2, 0.4], vec![0.8, 0.9]);
    let info = InfoStructure::new(0.7, 0.2, 1.0, 1.5, 3.0);
    let n = 6;
    let public = two_period_public(&p, &info, n).unwrap();
    let exact = strategy_payoffs(&public, &p, &info, n, None).unwrap();
    let closed = payoff_public(&public, &p, &info, n).unwrap();
    assert!(exact.iter().all(|v| close(*v, closed.exact)));

    let private_info = info.with_sigma(0.0);
    let private = two_period_private(&p, &private_info, n).unwrap();
    let exact = strategy_payoffs(&private, &p, &private_info, n, None).unwrap();
    let closed = storage_equilibria::equilibrium::payoff_private(&private, &p, &private_info, n).unwrap();
    assert!(exact.iter().all(|v| close(*v, closed.exact)));

    let report = targeted_aggregate_payoff(&p, &info, n, 2).unwrap();
    let targeted = targeted_release(&p, &info, n, 2).unwrap();
    let exact = strategy_payoffs(&targeted, &p, &info, n, None).unwrap();
    assert!(close(exact.iter().sum(), report.exact));
}
