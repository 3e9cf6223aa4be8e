//! Monte Carlo market simulator: samples markets, executes strategies and estimates expected
//! payoffs with standard errors. Also hosts the best-response and conservation audits.

mod audit;
mod stats;

pub use audit::{best_response_audit, DeviationReport, GridSpec, CERTIFICATION_TOLERANCE};
pub use stats::RunningStats;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::centralized::rollout;
use crate::equilibrium::{Coefficients, LinearStrategy};
use crate::error::{ModelError, Result};
use crate::market::{clear_market_with_costs, sample_replication, InfoStructure, MarketParams, MarketPath};

/// Replications per reduction block. Blocks are merged in index order, so results do not depend
/// on how rayon schedules them.
const BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Centralized,
    Private,
    Public,
    Sharing,
    Targeted,
    MultiPeriod,
    Heterogeneous,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Centralized,
        Variant::Private,
        Variant::Public,
        Variant::Sharing,
        Variant::Targeted,
        Variant::MultiPeriod,
        Variant::Heterogeneous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Centralized => "centralized",
            Variant::Private => "private",
            Variant::Public => "public",
            Variant::Sharing => "sharing",
            Variant::Targeted => "targeted",
            Variant::MultiPeriod => "multi_period",
            Variant::Heterogeneous => "heterogeneous",
        }
    }

    /// Variants whose storages reverse their first-period quantity in the second period.
    pub fn is_two_period(self) -> bool {
        !matches!(self, Variant::Centralized | Variant::MultiPeriod)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| ModelError::invalid("variant", format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub replications: u64,
    pub seed: u64,
    pub variant: Variant,
    /// Grid cross-check for the best-response audit.
    pub deviation_grid: Option<GridSpec>,
    /// Estimate the deviation gain of storage 0 by Monte Carlo as well.
    pub audit: bool,
    /// Multi-period only: force the last period to close each storage's position.
    pub close_final: bool,
    /// Storage-specific cost coefficients `costs[i][t]`, used by the heterogeneous variant.
    pub costs: Option<Vec<Vec<f64>>>,
}

impl SimConfig {
    pub fn new(variant: Variant, replications: u64, seed: u64) -> Self {
        Self {
            replications,
            seed,
            variant,
            deviation_grid: None,
            audit: false,
            close_final: false,
            costs: None,
        }
    }
}

/// Monte Carlo estimate of the gain storage 0 makes by switching to its analytic best response
/// while the others keep the candidate rule. Both payoffs use the same sampled markets.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationEstimate {
    pub best_response: Coefficients,
    pub gain: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub variant: Variant,
    pub replications: u64,
    pub seed: u64,
    pub mean_payoff: Vec<f64>,
    /// Sample standard deviation over the square root of the replication count.
    pub std_error: Vec<f64>,
    /// Mean of the summed payoff over all storages.
    pub aggregate: f64,
    pub aggregate_std_error: f64,
    /// Largest `|sum_t d_i[t]|` over all replications and storages.
    pub conservation_residual: f64,
    /// Mean and standard error of each storage's path sum `sum_t d_i[t]`.
    pub path_sum_mean: Vec<f64>,
    pub path_sum_std_error: Vec<f64>,
    /// Largest share any single replication has in storage 0's sum of squared payoffs.
    pub max_contribution: f64,
    pub deviation: Option<DeviationEstimate>,
}

/// Per-block accumulator.
#[derive(Debug, Clone)]
struct Accumulator {
    payoff: Vec<RunningStats>,
    aggregate: RunningStats,
    path_sum: Vec<RunningStats>,
    residual: f64,
    max_square: f64,
    sum_square: f64,
    deviation: RunningStats,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            payoff: vec![RunningStats::default(); n],
            aggregate: RunningStats::default(),
            path_sum: vec![RunningStats::default(); n],
            residual: 0.0,
            max_square: 0.0,
            sum_square: 0.0,
            deviation: RunningStats::default(),
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.payoff.iter_mut().zip(&other.payoff) {
            a.merge(b);
        }
        self.aggregate.merge(&other.aggregate);
        for (a, b) in self.path_sum.iter_mut().zip(&other.path_sum) {
            a.merge(b);
        }
        self.residual = self.residual.max(other.residual);
        self.max_square = self.max_square.max(other.max_square);
        self.sum_square += other.sum_square;
        self.deviation.merge(&other.deviation);
    }
}

/// Everything a replication needs, resolved once.
struct Plan<'a> {
    params: &'a MarketParams,
    sample_info: InfoStructure,
    info: &'a InfoStructure,
    n: usize,
    strategy: &'a LinearStrategy,
    config: &'a SimConfig,
    deviation: Option<Coefficients>,
}

impl Plan<'_> {
    fn public_signal(&self, path: &MarketPath, t: usize) -> f64 {
        if self.config.variant == Variant::Sharing {
            let n = path.storages() as f64;
            path.private_forecasts.iter().map(|x| x[t]).sum::<f64>() / n
        } else {
            path.public_forecasts[t]
        }
    }

    fn quantities(&self, path: &MarketPath) -> Vec<Vec<f64>> {
        let horizon = self.params.horizon;
        match self.config.variant {
            Variant::MultiPeriod => (0..self.n)
                .map(|i| {
                    let mut d: Vec<f64> = (0..horizon)
                        .map(|t| {
                            self.strategy
                                .rule(i, t)
                                .apply(path.public_forecasts[t], path.private_forecasts[i][t])
                        })
                        .collect();
                    if self.config.close_final {
                        d[horizon - 1] = -d[..horizon - 1].iter().sum::<f64>();
                    }
                    d
                })
                .collect(),
            _ => {
                let x0 = self.public_signal(path, 0);
                (0..self.n)
                    .map(|i| {
                        let d = self.strategy.rule(i, 0).apply(x0, path.private_forecasts[i][0]);
                        vec![d, -d]
                    })
                    .collect()
            }
        }
    }

    fn replication(&self, rep: u64, acc: &mut Accumulator) -> Result<()> {
        let path = sample_replication(
            self.params.horizon,
            &self.sample_info,
            self.n,
            self.config.seed,
            rep,
        );
        let costs = self.config.costs.as_deref();
        let (quantities, payoffs) = if self.config.variant == Variant::Centralized {
            let (filled, _) = rollout(self.params, self.info, &path)?;
            (filled.quantities, filled.payoffs)
        } else {
            let q = self.quantities(&path);
            let clearing = clear_market_with_costs(self.params, &q, &path.eta, costs)?;
            (q, clearing.payoffs)
        };

        let mut total = 0.0;
        for (i, pi) in payoffs.iter().enumerate() {
            acc.payoff[i].push(*pi);
            total += pi;
            let sum: f64 = quantities[i].iter().sum();
            acc.path_sum[i].push(sum);
            acc.residual = acc.residual.max(sum.abs());
        }
        acc.aggregate.push(total);
        let square = payoffs[0] * payoffs[0];
        acc.max_square = acc.max_square.max(square);
        acc.sum_square += square;

        if let Some(best) = self.deviation {
            let mut deviated = quantities;
            let d = best.apply(self.public_signal(&path, 0), path.private_forecasts[0][0]);
            deviated[0] = vec![d, -d];
            let clearing = clear_market_with_costs(self.params, &deviated, &path.eta, costs)?;
            acc.deviation.push(clearing.payoffs[0] - payoffs[0]);
        }
        Ok(())
    }
}

fn check_shape(variant: Variant, strategy: &LinearStrategy, n: usize) -> Result<()> {
    let ok = match (variant, strategy) {
        (Variant::Centralized, _) => n == 1,
        (Variant::MultiPeriod, LinearStrategy::MultiPeriod { .. }) => true,
        (Variant::Targeted, LinearStrategy::Targeted { recipients, .. }) => *recipients <= n,
        (Variant::Heterogeneous, LinearStrategy::Heterogeneous { storages, .. }) => storages.len() == n,
        (Variant::Private | Variant::Public | Variant::Sharing, LinearStrategy::Symmetric(_)) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(ModelError::Precondition(format!(
            "strategy shape does not fit the {variant} variant with n={n}"
        )))
    }
}

/// Estimates every storage's expected payoff by sampling `config.replications` markets.
///
/// Results are bit-identical for a fixed seed regardless of the rayon thread count. For the
/// centralized variant `strategy` is ignored and the re-planning rollout is executed instead.
pub fn estimate_payoff(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
    strategy: &LinearStrategy,
    config: &SimConfig,
) -> Result<SimReport> {
    params.validate()?;
    info.validate_for(n)?;
    if config.replications < 1 {
        return Err(ModelError::invalid("replications", "need at least one replication"));
    }
    check_shape(config.variant, strategy, n)?;
    if config.variant.is_two_period() {
        params.require_horizon(2, "a two-period variant")?;
    }
    if let Some(costs) = &config.costs {
        if costs.len() != n {
            return Err(ModelError::Dimension {
                what: "storage costs",
                expected: n,
                actual: costs.len(),
            });
        }
    }

    // Sharing pools the private forecasts; no separate public forecast exists.
    let sample_info = if config.variant == Variant::Sharing {
        info.with_sigma(0.0)
    } else {
        info.clone()
    };

    let deviation = if config.audit && config.variant.is_two_period() {
        let audit_info = match (config.variant, info.rho.common()) {
            (Variant::Sharing, Some(rho)) => info.with_sigma(n as f64 * rho),
            _ => info.clone(),
        };
        let reports = best_response_audit(
            params,
            &audit_info,
            n,
            strategy,
            config.variant,
            config.costs.as_deref(),
            None,
        )?;
        Some(reports[0].best_response)
    } else {
        None
    };

    let plan = Plan {
        params,
        sample_info,
        info,
        n,
        strategy,
        config,
        deviation,
    };

    let blocks = config.replications.div_ceil(BLOCK);
    let partials: Vec<Result<Accumulator>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accumulator::new(n);
            let end = ((b + 1) * BLOCK).min(config.replications);
            for rep in b * BLOCK..end {
                plan.replication(rep, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();

    let mut total = Accumulator::new(n);
    for partial in partials {
        total.merge(&partial?);
    }

    Ok(SimReport {
        variant: config.variant,
        replications: config.replications,
        seed: config.seed,
        mean_payoff: total.payoff.iter().map(RunningStats::mean).collect(),
        std_error: total.payoff.iter().map(RunningStats::std_error).collect(),
        aggregate: total.aggregate.mean(),
        aggregate_std_error: total.aggregate.std_error(),
        conservation_residual: total.residual,
        path_sum_mean: total.path_sum.iter().map(RunningStats::mean).collect(),
        path_sum_std_error: total.path_sum.iter().map(RunningStats::std_error).collect(),
        max_contribution: if total.sum_square > 0.0 {
            total.max_square / total.sum_square
        } else {
            0.0
        },
        deviation: deviation.map(|best_response| DeviationEstimate {
            best_response,
            gain: total.deviation.mean(),
            std_error: total.deviation.std_error(),
        }),
    })
}

/// `|sum_t d_i[t]|` for every storage of a filled path.
pub fn conservation_audit(path: &MarketPath) -> Vec<f64> {
    path.quantities
        .iter()
        .map(|q| q.iter().sum::<f64>().abs())
        .collect()
}
