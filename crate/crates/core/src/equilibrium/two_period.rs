//! Two-period equilibria under private forecasts, a public forecast, pooled forecasts and
//! targeted release of the public forecast.

use super::{
    expected_payoffs, two_period_decisions, Coefficients, LinearStrategy, PayoffReport,
    TwoPeriodSums,
};
use crate::bayes::pooled_precision;
use crate::error::{ModelError, Result};
use crate::market::{share, variance, InfoStructure, MarketParams};
use crate::moments::MarketForms;

fn common_rho(info: &InfoStructure) -> Result<f64> {
    info.rho.common().ok_or_else(|| {
        ModelError::Precondition("the symmetric models require a common rho".into())
    })
}

fn check(params: &MarketParams, info: &InfoStructure, n: usize, model: &str) -> Result<TwoPeriodSums> {
    params.validate()?;
    info.validate_for(n)?;
    params.require_horizon(2, model)?;
    Ok(TwoPeriodSums::of(params))
}

/// `k^2 * (1/alpha + 1/p)`, the second moment of a response `k x` to a forecast of precision `p`.
fn response_second_moment(k: f64, alpha: f64, p: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * k * (variance(alpha) + variance(p))
    }
}

/// `sigma / (alpha + sigma)^2`, the public-information factor of the published payoff expressions.
fn congestion_factor(sigma: f64, alpha: f64) -> f64 {
    if sigma == 0.0 || sigma.is_infinite() || alpha.is_infinite() {
        0.0
    } else {
        sigma / ((alpha + sigma) * (alpha + sigma))
    }
}

/// Symmetric equilibrium `d_i = A + C x_i` with private forecasts only.
pub fn two_period_private(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
) -> Result<LinearStrategy> {
    let sums = check(params, info, n, "the private-forecast model")?;
    let rho = common_rho(info)?;
    if info.has_public_channel() {
        return Err(ModelError::Precondition(
            "the private-forecast model has no public channel; set sigma=0".into(),
        ));
    }
    let a = sums.spread / sums.cournot_denominator(n);
    let w = share(rho, info.alpha);
    let c = if w == 0.0 {
        0.0
    } else {
        (1.0 - info.delta) * w / ((n as f64 - 1.0) * sums.gamma_sum * w + 2.0 * sums.scale())
    };
    Ok(LinearStrategy::Symmetric(Coefficients::new(a, 0.0, c)))
}

fn symmetric(strategy: &LinearStrategy) -> Result<Coefficients> {
    match strategy {
        LinearStrategy::Symmetric(c) => Ok(*c),
        _ => Err(ModelError::Precondition(
            "expected a symmetric two-period strategy".into(),
        )),
    }
}

pub fn payoff_private(
    strategy: &LinearStrategy,
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
) -> Result<PayoffReport> {
    let sums = check(params, info, n, "the private-forecast model")?;
    let coef = symmetric(strategy)?;
    let rho = common_rho(info)?;
    let exact = sums.scale()
        * (coef.a * coef.a + response_second_moment(coef.c, info.alpha, rho));
    let nf = n as f64;
    let asymptotic = sums.scale()
        * ((sums.spread / sums.gamma_sum).powi(2)
            + ((1.0 - info.delta) / sums.gamma_sum).powi(2) * variance(rho))
        / (nf * nf);
    Ok(PayoffReport {
        exact,
        published: Some(exact),
        asymptotic: Some(asymptotic),
        per_storage: None,
        aggregate: nf * exact,
    })
}

/// Symmetric equilibrium `d_i = A + B x0` when every storage sees only the public forecast.
pub fn two_period_public(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
) -> Result<LinearStrategy> {
    let sums = check(params, info, n, "the public-forecast model")?;
    let den = sums.cournot_denominator(n);
    let a = sums.spread / den;
    let b = (1.0 - info.delta) * share(info.sigma, info.alpha) / den;
    Ok(LinearStrategy::Symmetric(Coefficients::new(a, b, 0.0)))
}

pub fn payoff_public(
    strategy: &LinearStrategy,
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
) -> Result<PayoffReport> {
    let sums = check(params, info, n, "the public-forecast model")?;
    let coef = symmetric(strategy)?;
    let exact = sums.scale()
        * (coef.a * coef.a + response_second_moment(coef.b, info.alpha, info.sigma));

    let nf = n as f64;
    let den = 2.0 * sums.scale() + (nf - 1.0) * sums.gamma_sum;
    let congestion = congestion_factor(info.sigma, info.alpha);
    let published = sums.scale()
        * ((sums.spread / den).powi(2) + ((1.0 - info.delta) / den).powi(2) * congestion);
    let asymptotic = sums.scale()
        * ((sums.spread / sums.gamma_sum).powi(2)
            + ((1.0 - info.delta) / sums.gamma_sum).powi(2) * congestion)
        / (nf * nf);
    Ok(PayoffReport {
        exact,
        published: Some(published),
        asymptotic: Some(asymptotic),
        per_storage: None,
        aggregate: nf * exact,
    })
}

/// Individual payoffs with and without pooling the private forecasts.
#[derive(Debug, Clone, PartialEq)]
pub struct SharingComparison {
    /// Public-forecast payoff at the pooled precision `n rho`.
    pub shared: PayoffReport,
    pub private: PayoffReport,
    /// Verdict of the published expressions: shared `published` above private.
    pub sharing_beneficial: bool,
    /// Verdict of the exact expected payoffs.
    pub sharing_beneficial_exact: bool,
}

pub fn sharing_compare(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
) -> Result<SharingComparison> {
    let rho = common_rho(info)?;
    let private_info = info.with_sigma(0.0);
    let private = payoff_private(
        &two_period_private(params, &private_info, n)?,
        params,
        &private_info,
        n,
    )?;
    let pooled_info = info.with_sigma(pooled_precision(n, rho));
    let shared = payoff_public(
        &two_period_public(params, &pooled_info, n)?,
        params,
        &pooled_info,
        n,
    )?;
    let sharing_beneficial = shared.published > private.published;
    let sharing_beneficial_exact = shared.exact > private.exact;
    Ok(SharingComparison {
        shared,
        private,
        sharing_beneficial,
        sharing_beneficial_exact,
    })
}

fn check_recipients(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(ModelError::invalid(
            "m",
            format!("recipient count must lie in 1..={n}, got {m}"),
        ));
    }
    Ok(())
}

/// Equilibrium when only `m` of `n` storages receive the public forecast.
pub fn targeted_release(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
    m: usize,
) -> Result<LinearStrategy> {
    let sums = check(params, info, n, "targeted release")?;
    check_recipients(n, m)?;
    let a = sums.spread / sums.cournot_denominator(n);
    let b = (1.0 - info.delta) * share(info.sigma, info.alpha) / sums.cournot_denominator(m);
    Ok(LinearStrategy::Targeted {
        informed: Coefficients::new(a, b, 0.0),
        uninformed: a,
        recipients: m,
    })
}

/// Aggregate payoff under targeted release. `per_storage` lists the `m` informed storages first.
pub fn targeted_aggregate_payoff(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
    m: usize,
) -> Result<PayoffReport> {
    let sums = check(params, info, n, "targeted release")?;
    let LinearStrategy::Targeted {
        informed,
        uninformed,
        ..
    } = targeted_release(params, info, n, m)?
    else {
        unreachable!("targeted_release returns the targeted shape")
    };

    let informed_payoff = sums.scale()
        * (informed.a * informed.a + response_second_moment(informed.b, info.alpha, info.sigma));
    let uninformed_payoff = sums.scale() * uninformed * uninformed;
    let per_storage: Vec<f64> = (0..n)
        .map(|i| if i < m { informed_payoff } else { uninformed_payoff })
        .collect();
    let exact: f64 = per_storage.iter().sum();

    let mf = m as f64;
    let den = 2.0 * sums.scale() + (mf - 1.0) * sums.gamma_sum;
    let published = sums.scale()
        * (n as f64 * informed.a * informed.a
            + (1.0 - info.delta).powi(2) * mf / (den * den)
                * congestion_factor(info.sigma, info.alpha));

    Ok(PayoffReport {
        exact,
        published: Some(published),
        asymptotic: None,
        per_storage: Some(per_storage),
        aggregate: exact,
    })
}

/// Optimal number of public-forecast recipients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecipientChoice {
    /// `1 + 2 (eps1 + eps2) / (gamma1 + gamma2)`.
    pub continuous: f64,
    /// Integer maximizer of the aggregate payoff within `1..=n`.
    pub best: usize,
    /// Published aggregate payoff at `best`.
    pub payoff: f64,
}

/// Compares the published aggregate payoff at the floor and ceiling of the continuous optimum
/// (clamped to `1..=n`); ties go to the smaller recipient count.
pub fn optimal_recipients(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
) -> Result<RecipientChoice> {
    let sums = check(params, info, n, "targeted release")?;
    let continuous = 1.0 + 2.0 * sums.epsilon_sum / sums.gamma_sum;
    let clamp = |m: f64| (m.max(1.0).min(n as f64)) as usize;
    let mut candidates = vec![clamp(continuous.floor()), clamp(continuous.ceil())];
    candidates.dedup();

    let mut best = candidates[0];
    let mut payoff = aggregate_published(params, info, n, best)?;
    for &m in &candidates[1..] {
        let value = aggregate_published(params, info, n, m)?;
        if value > payoff {
            best = m;
            payoff = value;
        }
    }
    Ok(RecipientChoice {
        continuous,
        best,
        payoff,
    })
}

fn aggregate_published(params: &MarketParams, info: &InfoStructure, n: usize, m: usize) -> Result<f64> {
    Ok(targeted_aggregate_payoff(params, info, n, m)?
        .published
        .expect("targeted payoff carries the published form"))
}

/// Exact expected payoff of every storage for any two-period strategy, from Gaussian moments.
pub fn strategy_payoffs(
    strategy: &LinearStrategy,
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
    costs: Option<&[Vec<f64>]>,
) -> Result<Vec<f64>> {
    params.validate()?;
    info.validate_for(n)?;
    params.require_horizon(2, "the two-period payoff")?;
    if strategy.is_multi_period() {
        return Err(ModelError::Precondition(
            "use multi_period_payoff for per-period strategies".into(),
        ));
    }
    let forms = MarketForms::new(info, n, 2);
    let decisions = two_period_decisions(strategy, &forms, n);
    Ok(expected_payoffs(params, &forms, &decisions, costs))
}
