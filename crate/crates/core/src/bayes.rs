//! Gaussian conditional expectations used by the storage rules, and a brute-force
//! conditioning oracle that checks them.

use nalgebra::{DMatrix, DVector};

use crate::error::{ModelError, Result};
use crate::market::{share, variance, InfoStructure};

/// Observation feeding a posterior mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    PrivateForecast,
    PublicForecast,
    PreviousShock,
    /// Sum of all pooled private forecasts.
    PooledForecasts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorTerm {
    pub source: Source,
    pub weight: f64,
    pub observation: f64,
}

/// Conditional mean of the current shock, kept together with the linear weights that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMean {
    pub value: f64,
    pub terms: Vec<PosteriorTerm>,
}

impl PosteriorMean {
    fn from_terms(terms: Vec<PosteriorTerm>) -> Self {
        let value = terms
            .iter()
            .filter(|t| t.weight != 0.0)
            .map(|t| t.weight * t.observation)
            .sum();
        Self { value, terms }
    }

    pub fn weight(&self, source: Source) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.source == source)
            .map(|t| t.weight)
            .sum()
    }
}

fn term(source: Source, weight: f64, observation: f64) -> PosteriorTerm {
    PosteriorTerm {
        source,
        weight,
        observation,
    }
}

/// `E[eta_t | x_t, eta_{t-1}] = (rho x_t + zeta delta eta_{t-1}) / (rho + zeta)` for the
/// private channel of storage 0.
pub fn posterior_ar1(x_t: f64, eta_prev: f64, info: &InfoStructure) -> PosteriorMean {
    let rho = info.rho.of(0);
    let w_x = share(rho, info.zeta);
    let w_prev = share(info.zeta, rho) * info.delta;
    PosteriorMean::from_terms(vec![
        term(Source::PrivateForecast, w_x, x_t),
        term(Source::PreviousShock, w_prev, eta_prev),
    ])
}

/// `E[eta_1 | x_1] = rho / (alpha + rho) x_1`.
pub fn posterior_t1_private(x1: f64, info: &InfoStructure) -> PosteriorMean {
    let rho = info.rho.of(0);
    PosteriorMean::from_terms(vec![term(
        Source::PrivateForecast,
        share(rho, info.alpha),
        x1,
    )])
}

/// `E[eta_1 | x_0] = sigma / (alpha + sigma) x_0`.
pub fn posterior_t1_public(x0: f64, info: &InfoStructure) -> PosteriorMean {
    PosteriorMean::from_terms(vec![term(
        Source::PublicForecast,
        share(info.sigma, info.alpha),
        x0,
    )])
}

/// Two-signal first-period estimate with the market-wide weight `sigma / (alpha + sigma + rho)`
/// on the public forecast and `rho_i / (alpha + sigma + rho_i)` on the private one.
///
/// `rho` is the common private precision of `info`; with per-storage precisions it falls back to
/// `rho_i`. The result equals the exact conditional mean only when `rho == rho_i`.
pub fn posterior_t1_public_private(
    x0: f64,
    xi: f64,
    rho_i: f64,
    info: &InfoStructure,
) -> PosteriorMean {
    let rho = info.rho.common().unwrap_or(rho_i);
    let w_public = share(info.sigma, info.alpha + rho);
    let w_private = share(rho_i, info.alpha + info.sigma);
    PosteriorMean::from_terms(vec![
        term(Source::PublicForecast, w_public, x0),
        term(Source::PrivateForecast, w_private, xi),
    ])
}

/// Precision of the public signal equivalent to pooling `n` private forecasts of precision `rho`.
pub fn pooled_precision(n: usize, rho: f64) -> f64 {
    n as f64 * rho
}

/// Weight `rho / (alpha + n rho)` applied to the sum of pooled forecasts.
pub fn pooled_weight(n: usize, rho: f64, alpha: f64) -> f64 {
    let nf = n as f64;
    if rho.is_infinite() {
        return 1.0 / nf;
    }
    rho / (alpha + nf * rho)
}

/// `E[eta_1 | x_1..x_n]` for pooled private forecasts of common precision.
pub fn posterior_pooled(forecasts: &[f64], info: &InfoStructure) -> PosteriorMean {
    let w = pooled_weight(forecasts.len(), info.rho.of(0), info.alpha);
    PosteriorMean::from_terms(vec![term(
        Source::PooledForecasts,
        w,
        forecasts.iter().sum(),
    )])
}

/// Variance of the pooled estimator `rho/(alpha+n rho) * sum x_i`, which is `n rho / (alpha (alpha + n rho))`.
pub fn pooled_estimator_variance(n: usize, rho: f64, alpha: f64) -> f64 {
    let w = pooled_weight(n, rho, alpha);
    let nf = n as f64;
    w * w * (nf * nf * variance(alpha) + nf * variance(rho))
}

/// Variance of the public estimator `sigma/(alpha+sigma) * x_0`, which is `sigma / (alpha (alpha + sigma))`.
pub fn public_estimator_variance(sigma: f64, alpha: f64) -> f64 {
    let w = share(sigma, alpha);
    w * w * (variance(alpha) + variance(sigma))
}

/// Conditional mean of a jointly Gaussian vector given some of its coordinates.
///
/// Returns the full vector, with observed coordinates set to their observed values and the
/// rest equal to `mu_a + S_ab S_bb^{-1} (y - mu_b)`. The observed block must be positive definite.
pub fn gaussian_condition_oracle(
    mean: &[f64],
    covariance: &DMatrix<f64>,
    observed: &[usize],
    values: &[f64],
) -> Result<Vec<f64>> {
    let dim = mean.len();
    if covariance.nrows() != dim || covariance.ncols() != dim {
        return Err(ModelError::Dimension {
            what: "covariance",
            expected: dim,
            actual: covariance.nrows(),
        });
    }
    if observed.len() != values.len() {
        return Err(ModelError::Dimension {
            what: "observed values",
            expected: observed.len(),
            actual: values.len(),
        });
    }
    if let Some(&bad) = observed.iter().find(|&&k| k >= dim) {
        return Err(ModelError::Dimension {
            what: "observed index",
            expected: dim,
            actual: bad,
        });
    }

    let k = observed.len();
    let s_bb = DMatrix::from_fn(k, k, |r, c| covariance[(observed[r], observed[c])]);
    let residual = DVector::from_fn(k, |r, _| values[r] - mean[observed[r]]);
    let chol = s_bb.cholesky().ok_or(ModelError::SingularCovariance)?;
    let solved = chol.solve(&residual);

    let mut out = Vec::with_capacity(dim);
    for a in 0..dim {
        if let Some(pos) = observed.iter().position(|&o| o == a) {
            out.push(values[pos]);
            continue;
        }
        let shift: f64 = observed
            .iter()
            .enumerate()
            .map(|(r, &b)| covariance[(a, b)] * solved[r])
            .sum();
        out.push(mean[a] + shift);
    }
    Ok(out)
}
