//! Resolves a config and a variant into a concrete strategy plus its closed-form metrics.

use storage_equilibria::bayes::pooled_precision;
use storage_equilibria::centralized::{constant_costs, plan, response_factor};
use storage_equilibria::equilibrium::{
    heterogeneous_two_period, multi_period_payoff, multi_period_relaxed, optimal_recipients,
    payoff_private, payoff_public, sharing_compare, strategy_payoffs, targeted_aggregate_payoff,
    targeted_release, two_period_private, two_period_public, uniform_costs, Coefficients,
};
use storage_equilibria::bayes::posterior_t1_private;
use storage_equilibria::{Config, InfoStructure, LinearStrategy, Result, Variant};

/// A strategy ready to simulate, with the information structure its storages actually face.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub variant: Variant,
    pub strategy: LinearStrategy,
    /// Information used to sample markets.
    pub info: InfoStructure,
    /// Information the closed forms are evaluated at (pooled precision for sharing).
    pub model_info: InfoStructure,
    pub costs: Option<Vec<Vec<f64>>>,
    /// Named closed-form values in output order.
    pub metrics: Vec<(String, f64)>,
    /// Exact expected payoff per storage, when known in closed form.
    pub per_storage: Option<Vec<f64>>,
}

fn coefficient_rows(strategy: &LinearStrategy) -> Vec<(String, f64)> {
    let abc = |prefix: &str, c: &Coefficients| {
        vec![
            (format!("A{prefix}"), c.a),
            (format!("B{prefix}"), c.b),
            (format!("C{prefix}"), c.c),
        ]
    };
    match strategy {
        LinearStrategy::Symmetric(c) => abc("", c),
        LinearStrategy::Targeted {
            informed, uninformed, ..
        } => {
            let mut rows = abc("", informed);
            rows.push(("A_uninformed".into(), *uninformed));
            rows
        }
        LinearStrategy::MultiPeriod { lambda, periods } => {
            let mut rows = abc("", &periods[0]);
            for (t, c) in periods.iter().enumerate() {
                rows.extend(abc(&format!("_{}", t + 1), c));
            }
            rows.push(("lambda".into(), *lambda));
            rows
        }
        LinearStrategy::Heterogeneous { storages, sum_b } => {
            let mut rows = abc("", &storages[0]);
            for (i, c) in storages.iter().enumerate() {
                rows.extend(abc(&format!("_{i}"), c));
            }
            rows.push(("sum_B".into(), *sum_b));
            rows
        }
    }
}

fn push_opt(metrics: &mut Vec<(String, f64)>, name: &str, v: Option<f64>) {
    if let Some(v) = v {
        metrics.push((name.into(), v));
    }
}

pub fn resolve(cfg: &Config, variant: Variant) -> Result<Resolved> {
    let (params, n) = (&cfg.params, cfg.n);
    let mut metrics = Vec::new();
    let mut costs = None;
    let mut info = cfg.info.clone();
    let mut model_info = cfg.info.clone();
    let (strategy, per_storage) = match variant {
        Variant::Private => {
            info = cfg.info.with_sigma(0.0);
            model_info = info.clone();
            let s = two_period_private(params, &info, n)?;
            let r = payoff_private(&s, params, &info, n)?;
            metrics.push(("exact".into(), r.exact));
            push_opt(&mut metrics, "published", r.published);
            push_opt(&mut metrics, "asymptotic", r.asymptotic);
            metrics.push(("aggregate".into(), r.aggregate));
            (s, Some(vec![r.exact; n]))
        }
        Variant::Public => {
            let s = two_period_public(params, &info, n)?;
            let r = payoff_public(&s, params, &info, n)?;
            metrics.push(("exact".into(), r.exact));
            push_opt(&mut metrics, "published", r.published);
            push_opt(&mut metrics, "asymptotic", r.asymptotic);
            metrics.push(("aggregate".into(), r.aggregate));
            (s, Some(vec![r.exact; n]))
        }
        Variant::Sharing => {
            info = cfg.info.with_sigma(0.0);
            let rho = info.rho.of(0);
            model_info = info.with_sigma(pooled_precision(n, rho));
            let cmp = sharing_compare(params, &info, n)?;
            let s = two_period_public(params, &model_info, n)?;
            metrics.push(("exact".into(), cmp.shared.exact));
            push_opt(&mut metrics, "published", cmp.shared.published);
            push_opt(&mut metrics, "asymptotic", cmp.shared.asymptotic);
            metrics.push(("aggregate".into(), cmp.shared.aggregate));
            metrics.push(("private_exact".into(), cmp.private.exact));
            push_opt(&mut metrics, "private_published", cmp.private.published);
            metrics.push(("sharing_beneficial".into(), f64::from(u8::from(cmp.sharing_beneficial))));
            metrics.push((
                "sharing_beneficial_exact".into(),
                f64::from(u8::from(cmp.sharing_beneficial_exact)),
            ));
            (s, Some(vec![cmp.shared.exact; n]))
        }
        Variant::Targeted => {
            let choice = optimal_recipients(params, &info, n)?;
            let m = cfg.m.unwrap_or(choice.best);
            let s = targeted_release(params, &info, n, m)?;
            let r = targeted_aggregate_payoff(params, &info, n, m)?;
            metrics.push(("exact".into(), r.exact));
            push_opt(&mut metrics, "published", r.published);
            metrics.push(("aggregate".into(), r.aggregate));
            metrics.push(("m".into(), m as f64));
            metrics.push(("m_star_continuous".into(), choice.continuous));
            metrics.push(("m_star".into(), choice.best as f64));
            (s, r.per_storage)
        }
        Variant::MultiPeriod => {
            let s = multi_period_relaxed(params, &info, n)?;
            let open = multi_period_payoff(&s, params, &info, n, false)?;
            let closed = multi_period_payoff(&s, params, &info, n, true)?;
            metrics.push(("exact".into(), open.exact));
            metrics.push(("aggregate".into(), open.aggregate));
            metrics.push(("exact_closed_final".into(), closed.exact));
            (s, Some(vec![open.exact; n]))
        }
        Variant::Heterogeneous => {
            let c = cfg
                .storage_costs
                .clone()
                .unwrap_or_else(|| uniform_costs(params, n));
            let s = heterogeneous_two_period(params, &info, &c)?;
            let per = strategy_payoffs(&s, params, &info, n, Some(&c))?;
            metrics.push(("exact".into(), per[0]));
            metrics.push(("aggregate".into(), per.iter().sum()));
            for (i, v) in per.iter().enumerate() {
                metrics.push((format!("exact_{i}"), *v));
            }
            costs = Some(c);
            (s, Some(per))
        }
        Variant::Centralized => {
            if n != 1 {
                return Err(storage_equilibria::ModelError::invalid(
                    "n",
                    "the centralized variant has a single storage; set n = 1",
                ));
            }
            let (gamma, eps) = constant_costs(params)?;
            let first = plan(1, params, &info, &[], &posterior_t1_private(0.0, &info))?;
            metrics.push(("A".into(), first.base));
            metrics.push(("C".into(), first.response * posterior_t1_private(1.0, &info).value));
            for t in 1..params.horizon {
                metrics.push((
                    format!("response_{t}"),
                    response_factor(t, params.horizon, info.delta, gamma, eps),
                ));
            }
            let mut per = None;
            if params.horizon == 2 {
                let s = two_period_private(params, &info.with_sigma(0.0), 1)?;
                let exact = payoff_private(&s, params, &info.with_sigma(0.0), 1)?.exact;
                metrics.push(("exact".into(), exact));
                per = Some(vec![exact]);
            }
            (LinearStrategy::Symmetric(Coefficients::default()), per)
        }
    };
    if variant != Variant::Centralized {
        let mut rows = coefficient_rows(&strategy);
        rows.extend(metrics);
        metrics = rows;
    }
    Ok(Resolved {
        variant,
        strategy,
        info,
        model_info,
        costs,
        metrics,
        per_storage,
    })
}

impl Resolved {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}
