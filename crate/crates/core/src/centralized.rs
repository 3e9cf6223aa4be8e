//! Certainty-equivalent re-planning for a single storage over `L` periods.
//!
//! Periods are numbered `1..=L`. In each period `t < L` the storage re-solves the remaining
//! horizon with a multiplier on the expected conservation constraint and commits only the
//! period-`t` quantity; the last period closes the position.

use crate::bayes::{posterior_ar1, posterior_t1_private, PosteriorMean};
use crate::error::{ModelError, Result};
use crate::market::{InfoStructure, MarketParams, MarketPath};

/// The period-`t` plan and the quantities behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralPlan {
    pub period: usize,
    /// Forecast-independent part, including the correction for the carried position.
    pub base: f64,
    /// Multiplier on the posterior mean of the current shock.
    pub response: f64,
    pub lambda_t: f64,
    /// Net quantity already sold in earlier periods.
    pub carried: f64,
    pub decision: f64,
}

/// Elasticity and cost coefficient, which the single-storage plan requires to be constant over time.
pub fn constant_costs(params: &MarketParams) -> Result<(f64, f64)> {
    let gamma = params.gamma[0];
    let eps = params.epsilon[0];
    if params.gamma.iter().any(|g| *g != gamma) || params.epsilon.iter().any(|e| *e != eps) {
        return Err(ModelError::Precondition(
            "the single-storage plan requires gamma and epsilon constant across periods".into(),
        ));
    }
    Ok((gamma, eps))
}

/// `sum_{tau=t}^{L} delta^(tau - t)`.
fn persistence(t: usize, horizon: usize, delta: f64) -> f64 {
    (0..=(horizon - t)).map(|k| delta.powi(k as i32)).sum()
}

/// `(1 - sum_{tau>=t} delta^(tau-t) / (L-t+1)) / (2 (eps + gamma))`.
pub fn response_factor(t: usize, horizon: usize, delta: f64, gamma: f64, eps: f64) -> f64 {
    let remaining = (horizon - t + 1) as f64;
    (1.0 - persistence(t, horizon, delta) / remaining) / (2.0 * (eps + gamma))
}

fn check_period(t: usize, params: &MarketParams, history: &[f64]) -> Result<()> {
    if t == 0 || t >= params.horizon {
        return Err(ModelError::Precondition(format!(
            "period {t} outside 1..={}; use final_closure for the last period",
            params.horizon.saturating_sub(1)
        )));
    }
    if history.len() != t - 1 {
        return Err(ModelError::Dimension {
            what: "history",
            expected: t - 1,
            actual: history.len(),
        });
    }
    Ok(())
}

/// Plans period `t` from the quantities committed in periods `1..t` and the current posterior.
pub fn plan(
    t: usize,
    params: &MarketParams,
    info: &InfoStructure,
    history: &[f64],
    posterior: &PosteriorMean,
) -> Result<CentralPlan> {
    check_period(t, params, history)?;
    let (gamma, eps) = constant_costs(params)?;
    let horizon = params.horizon;
    let remaining = (horizon - t + 1) as f64;
    let carried: f64 = history.iter().sum();
    let future_mean = params.beta[t - 1..].iter().sum::<f64>() / remaining;

    let base = (params.beta[t - 1] - future_mean) / (2.0 * (eps + gamma)) - carried / remaining;
    let response = response_factor(t, horizon, info.delta, gamma, eps);
    let lambda_t = lagrange_multiplier(t, params, info, history, posterior)?;

    Ok(CentralPlan {
        period: t,
        base,
        response,
        lambda_t,
        carried,
        decision: base + response * posterior.value,
    })
}

pub fn optimal_quantity(
    t: usize,
    params: &MarketParams,
    info: &InfoStructure,
    history: &[f64],
    posterior: &PosteriorMean,
) -> Result<f64> {
    plan(t, params, info, history, posterior).map(|p| p.decision)
}

/// The last-period quantity that brings the net position back to zero.
pub fn final_closure(history: &[f64]) -> f64 {
    -history.iter().sum::<f64>()
}

/// Multiplier on the expected conservation constraint in the period-`t` subproblem.
pub fn lagrange_multiplier(
    t: usize,
    params: &MarketParams,
    info: &InfoStructure,
    history: &[f64],
    posterior: &PosteriorMean,
) -> Result<f64> {
    check_period(t, params, history)?;
    let (gamma, eps) = constant_costs(params)?;
    let horizon = params.horizon;
    let remaining = (horizon - t + 1) as f64;
    let beta_sum: f64 = params.beta[t - 1..].iter().sum();
    let carried: f64 = history.iter().sum();
    Ok((beta_sum
        + persistence(t, horizon, info.delta) * posterior.value
        + 2.0 * (eps + gamma) * carried)
        / remaining)
}

/// Quantities `E_t d[tau]` the period-`t` subproblem plans for `tau = t..=L`.
pub fn anticipated_quantities(
    t: usize,
    params: &MarketParams,
    info: &InfoStructure,
    history: &[f64],
    posterior: &PosteriorMean,
) -> Result<Vec<f64>> {
    let lambda = lagrange_multiplier(t, params, info, history, posterior)?;
    let (gamma, eps) = constant_costs(params)?;
    Ok((t..=params.horizon)
        .map(|tau| {
            let expected_shock = info.delta.powi((tau - t) as i32) * posterior.value;
            (params.beta[tau - 1] - lambda + expected_shock) / (2.0 * (eps + gamma))
        })
        .collect())
}

/// First-order residuals `beta[tau] - lambda + E[eta_tau] - 2 (eps + gamma) E_t d[tau]` for `tau = t..=L`.
pub fn foc_residuals(
    t: usize,
    params: &MarketParams,
    info: &InfoStructure,
    history: &[f64],
    posterior: &PosteriorMean,
) -> Result<Vec<f64>> {
    let lambda = lagrange_multiplier(t, params, info, history, posterior)?;
    let (gamma, eps) = constant_costs(params)?;
    let planned = anticipated_quantities(t, params, info, history, posterior)?;
    Ok((t..=params.horizon)
        .zip(planned)
        .map(|(tau, d)| {
            let expected_shock = info.delta.powi((tau - t) as i32) * posterior.value;
            params.beta[tau - 1] - lambda + expected_shock - 2.0 * (eps + gamma) * d
        })
        .collect())
}

/// One period of a rollout trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub period: usize,
    pub forecast: f64,
    pub posterior: f64,
    pub quantity: f64,
    pub price: f64,
}

/// Executes the re-planning scheme on a sampled single-storage path.
///
/// After each clearing the storage recovers the realized shock from the price,
/// `eta = P - beta + gamma d`, and uses it in the next period's posterior.
pub fn rollout(
    params: &MarketParams,
    info: &InfoStructure,
    path: &MarketPath,
) -> Result<(MarketPath, Vec<TraceRow>)> {
    if path.storages() != 1 {
        return Err(ModelError::Precondition(format!(
            "rollout is defined for one storage, path has {}",
            path.storages()
        )));
    }
    if path.horizon() != params.horizon {
        return Err(ModelError::Dimension {
            what: "path horizon",
            expected: params.horizon,
            actual: path.horizon(),
        });
    }
    constant_costs(params)?;

    let horizon = params.horizon;
    let forecasts = &path.private_forecasts[0];
    let mut history: Vec<f64> = Vec::with_capacity(horizon);
    let mut trace = Vec::with_capacity(horizon);
    let mut revealed_shock = 0.0;

    for t in 1..=horizon {
        let x = forecasts[t - 1];
        let (posterior, d) = if t < horizon {
            let post = if t == 1 {
                posterior_t1_private(x, info)
            } else {
                posterior_ar1(x, revealed_shock, info)
            };
            let d = optimal_quantity(t, params, info, &history, &post)?;
            (post.value, d)
        } else {
            (f64::NAN, final_closure(&history))
        };
        let price = params.beta[t - 1] - params.gamma[t - 1] * d + path.eta[t - 1];
        revealed_shock = price - params.beta[t - 1] + params.gamma[t - 1] * d;
        history.push(d);
        trace.push(TraceRow {
            period: t,
            forecast: x,
            posterior,
            quantity: d,
            price,
        });
    }

    let mut filled = path.clone();
    filled.fill(params, vec![history])?;
    Ok((filled, trace))
}
