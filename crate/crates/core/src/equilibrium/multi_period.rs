//! Relaxed multi-period equilibrium: conservation is imposed only in expectation through one
//! static multiplier shared by all periods.

use super::{expected_payoffs, Coefficients, LinearStrategy, PayoffReport};
use crate::error::{ModelError, Result};
use crate::market::{share, InfoStructure, MarketParams};
use crate::moments::{AffineForm, MarketForms};

fn cournot_terms(params: &MarketParams, n: usize) -> Vec<f64> {
    (0..params.horizon)
        .map(|t| 2.0 * params.epsilon[t] + (n as f64 + 1.0) * params.gamma[t])
        .collect()
}

/// `sum_t beta[t] prod_{tau != t} k[tau] / sum_t prod_{tau != t} k[tau]` with
/// `k[t] = 2 eps[t] + (n + 1) gamma[t]`.
pub fn relaxed_multiplier(params: &MarketParams, n: usize) -> f64 {
    let k = cournot_terms(params, n);
    let leave_one_out = |t: usize| -> f64 {
        k.iter()
            .enumerate()
            .filter(|(tau, _)| *tau != t)
            .map(|(_, v)| v)
            .product()
    };
    let (num, den) = (0..params.horizon).fold((0.0, 0.0), |(num, den), t| {
        let p = leave_one_out(t);
        (num + params.beta[t] * p, den + p)
    });
    num / den
}

/// Per-period rule `d_i[t] = A[t] + B[t] x0[t] + C[t] xi[t]` of the relaxed model.
pub fn multi_period_relaxed(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
) -> Result<LinearStrategy> {
    params.validate()?;
    info.validate_for(n)?;
    if params.horizon < 2 {
        return Err(ModelError::Precondition(
            "the multi-period model needs L >= 2".into(),
        ));
    }
    let rho = info.rho.common().ok_or_else(|| {
        ModelError::Precondition("the multi-period model requires a common rho".into())
    })?;

    let lambda = relaxed_multiplier(params, n);
    let k = cournot_terms(params, n);
    let nm1 = n as f64 - 1.0;
    // forecast weights against the prior and the other channel
    let w_private = share(rho, info.alpha + info.sigma);
    let w_public = share(info.sigma, info.alpha + rho);

    let periods = (0..params.horizon)
        .map(|t| {
            let (gamma, eps) = (params.gamma[t], params.epsilon[t]);
            let a = (params.beta[t] - lambda) / k[t];
            let c = if w_private == 0.0 {
                0.0
            } else {
                w_private / (2.0 * (eps + gamma) + nm1 * gamma * w_private)
            };
            let b = w_public * (1.0 - nm1 * gamma * c) / k[t];
            Coefficients::new(a, b, c)
        })
        .collect();

    Ok(LinearStrategy::MultiPeriod { lambda, periods })
}

/// Exact expected payoff of the relaxed rule under the AR(1) market.
///
/// With `close_final` the last period is overridden by `-sum_{t<L} d[t]`, which makes every
/// path conserve energy exactly.
pub fn multi_period_payoff(
    strategy: &LinearStrategy,
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
    close_final: bool,
) -> Result<PayoffReport> {
    params.validate()?;
    info.validate_for(n)?;
    let LinearStrategy::MultiPeriod { periods, .. } = strategy else {
        return Err(ModelError::Precondition(
            "expected a multi-period strategy".into(),
        ));
    };
    if periods.len() != params.horizon {
        return Err(ModelError::Dimension {
            what: "strategy periods",
            expected: params.horizon,
            actual: periods.len(),
        });
    }
    let horizon = params.horizon;
    let forms = MarketForms::new(info, n, horizon);
    let decisions: Vec<Vec<AffineForm>> = (0..n)
        .map(|i| {
            let mut d: Vec<AffineForm> = (0..horizon)
                .map(|t| periods[t].form(&forms.public[t], &forms.private[i][t]))
                .collect();
            if close_final {
                let mut closing = forms.basis.constant(0.0);
                for q in &d[..horizon - 1] {
                    closing.add_scaled(q, -1.0);
                }
                d[horizon - 1] = closing;
            }
            d
        })
        .collect();
    let payoffs = expected_payoffs(params, &forms, &decisions, None);
    let exact = payoffs[0];
    Ok(PayoffReport {
        exact,
        published: None,
        asymptotic: None,
        per_storage: None,
        aggregate: payoffs.iter().sum(),
    })
}
