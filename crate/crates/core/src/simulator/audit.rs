//! Best-response audit: with every opponent fixed at its candidate rule, a storage's expected
//! payoff is a concave quadratic in its own linear coefficients. Maximizing it exactly tells how
//! much a unilateral deviation could gain.

use nalgebra::{DMatrix, DVector};

use super::Variant;
use crate::equilibrium::{Coefficients, LinearStrategy};
use crate::error::{ModelError, Result};
use crate::market::{InfoStructure, MarketParams};
use crate::moments::{AffineForm, MarketForms};

/// Relative gain below which a candidate counts as a best response.
pub const CERTIFICATION_TOLERANCE: f64 = 1e-8;

/// Coarse grid around the candidate used to cross-check the analytic optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Half-width of each axis relative to the coefficient's magnitude.
    pub half_width: f64,
    /// Points per axis, including both ends and the candidate itself when odd.
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 0.5,
            points: 101,
        }
    }
}

/// Which of `(a, b, c)` a deviator may adjust.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Channel {
    Base,
    Public,
    Private,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    /// Human-readable deviator label, e.g. `storage 0` or `period 2`.
    pub group: String,
    pub candidate: Coefficients,
    pub best_response: Coefficients,
    pub candidate_payoff: f64,
    pub best_payoff: f64,
    pub gain: f64,
    pub relative_gain: f64,
    /// Largest gain found on the coarse grid, when requested.
    pub grid_gain: Option<f64>,
    pub certified: bool,
}

/// `V(theta) = theta . linear - theta' Q theta` over the deviator's free coefficients.
struct Quadratic {
    channels: Vec<Channel>,
    linear: DVector<f64>,
    curvature: DMatrix<f64>,
}

impl Quadratic {
    fn build(
        forms: &MarketForms,
        channels: Vec<Channel>,
        features: Vec<AffineForm>,
        residual: &AffineForm,
        cost: f64,
    ) -> Self {
        let k = features.len();
        let linear = DVector::from_fn(k, |a, _| forms.expect(&features[a], residual));
        let curvature =
            DMatrix::from_fn(k, k, |a, b| cost * forms.expect(&features[a], &features[b]));
        Self {
            channels,
            linear,
            curvature,
        }
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        self.linear.dot(theta) - (theta.transpose() * &self.curvature * theta)[(0, 0)]
    }

    fn theta(&self, c: &Coefficients) -> DVector<f64> {
        DVector::from_iterator(
            self.channels.len(),
            self.channels.iter().map(|ch| match ch {
                Channel::Base => c.a,
                Channel::Public => c.b,
                Channel::Private => c.c,
            }),
        )
    }

    fn coefficients(&self, theta: &DVector<f64>) -> Coefficients {
        let mut c = Coefficients::default();
        for (ch, v) in self.channels.iter().zip(theta.iter()) {
            match ch {
                Channel::Base => c.a = *v,
                Channel::Public => c.b = *v,
                Channel::Private => c.c = *v,
            }
        }
        c
    }

    fn audit(&self, group: String, candidate: Coefficients, grid: Option<GridSpec>) -> Result<DeviationReport> {
        let chol = self
            .curvature
            .clone()
            .cholesky()
            .ok_or(ModelError::NonConcave)?;
        let best = chol.solve(&self.linear) * 0.5;
        let current = self.theta(&candidate);
        let step = &best - &current;
        let gain = (step.transpose() * &self.curvature * &step)[(0, 0)];
        let best_payoff = self.value(&best);
        let candidate_payoff = self.value(&current);
        let relative_gain = if gain == 0.0 {
            0.0
        } else {
            gain / best_payoff.abs().max(f64::MIN_POSITIVE)
        };
        let grid_gain = grid.map(|spec| self.grid_search(&current, &best, spec) - candidate_payoff);
        Ok(DeviationReport {
            group,
            candidate,
            best_response: self.coefficients(&best),
            candidate_payoff,
            best_payoff,
            gain,
            relative_gain,
            grid_gain,
            certified: relative_gain < CERTIFICATION_TOLERANCE,
        })
    }

    /// Best value on a tensor grid centred on the candidate.
    fn grid_search(&self, center: &DVector<f64>, best: &DVector<f64>, spec: GridSpec) -> f64 {
        let k = center.len();
        let points = spec.points.max(1);
        let axes: Vec<Vec<f64>> = (0..k)
            .map(|a| {
                let scale = center[a].abs().max(best[a].abs());
                let half = spec.half_width * if scale > 0.0 { scale } else { 1e-3 };
                (0..points)
                    .map(|j| {
                        if points == 1 {
                            center[a]
                        } else {
                            let u = -1.0 + 2.0 * j as f64 / (points - 1) as f64;
                            center[a] + half * u
                        }
                    })
                    .collect()
            })
            .collect();

        let mut index = vec![0usize; k];
        let mut theta = center.clone();
        let mut best_value = f64::NEG_INFINITY;
        loop {
            for a in 0..k {
                theta[a] = axes[a][index[a]];
            }
            best_value = best_value.max(self.value(&theta));
            let mut a = 0;
            loop {
                if a == k {
                    return best_value;
                }
                index[a] += 1;
                if index[a] < points {
                    break;
                }
                index[a] = 0;
                a += 1;
            }
        }
    }
}

fn channels_for(variant: Variant, informed: bool, info: &InfoStructure, storage: usize) -> Vec<Channel> {
    let public = info.sigma > 0.0;
    let private = info.rho.of(storage) > 0.0;
    let mut out = vec![Channel::Base];
    match variant {
        Variant::Private => {
            if private {
                out.push(Channel::Private)
            }
        }
        Variant::Public | Variant::Sharing => {
            if public {
                out.push(Channel::Public)
            }
        }
        Variant::Targeted => {
            if informed && public {
                out.push(Channel::Public)
            }
        }
        Variant::Heterogeneous | Variant::MultiPeriod => {
            if public {
                out.push(Channel::Public);
            }
            if private {
                out.push(Channel::Private);
            }
        }
        Variant::Centralized => {}
    }
    out
}

fn feature_forms(channels: &[Channel], forms: &MarketForms, storage: usize, period: usize) -> Vec<AffineForm> {
    channels
        .iter()
        .map(|ch| match ch {
            Channel::Base => forms.basis.constant(1.0),
            Channel::Public => forms.public[period].clone(),
            Channel::Private => forms.private[storage][period].clone(),
        })
        .collect()
}

fn two_period_audit(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
    strategy: &LinearStrategy,
    variant: Variant,
    storage: usize,
    costs: Option<&[Vec<f64>]>,
    grid: Option<GridSpec>,
) -> Result<DeviationReport> {
    let forms = MarketForms::new(info, n, 2);
    let gamma_sum = params.gamma_sum();
    let mut residual = &(&forms.eta[0] - &forms.eta[1]) + &forms.basis.constant(params.beta_spread());
    for j in (0..n).filter(|&j| j != storage) {
        let d_j = strategy.rule(j, 0).form(&forms.public[0], &forms.private[j][0]);
        residual.add_scaled(&d_j, -gamma_sum);
    }
    let own_cost = costs.map_or(params.epsilon_sum(), |c| c[storage].iter().sum());

    let informed = match strategy {
        LinearStrategy::Targeted { recipients, .. } => storage < *recipients,
        _ => true,
    };
    let channels = channels_for(variant, informed, info, storage);
    let features = feature_forms(&channels, &forms, storage, 0);
    let quad = Quadratic::build(&forms, channels, features, &residual, gamma_sum + own_cost);
    let label = match strategy {
        LinearStrategy::Targeted { .. } if informed => format!("informed storage {storage}"),
        LinearStrategy::Targeted { .. } => format!("uninformed storage {storage}"),
        _ => format!("storage {storage}"),
    };
    quad.audit(label, strategy.rule(storage, 0), grid)
}

/// Per-period audit of the relaxed multi-period rule: each period is a one-shot game with prior
/// precision `alpha` and the static multiplier priced into the potential.
fn multi_period_audit(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
    strategy: &LinearStrategy,
    grid: Option<GridSpec>,
) -> Result<Vec<DeviationReport>> {
    let LinearStrategy::MultiPeriod { lambda, periods } = strategy else {
        unreachable!()
    };
    let forms = MarketForms::new(info, n, 1);
    (0..params.horizon)
        .map(|t| {
            let gamma = params.gamma[t];
            let mut residual =
                &forms.eta[0] + &forms.basis.constant(params.beta[t] - lambda);
            for j in 1..n {
                let d_j = periods[t].form(&forms.public[0], &forms.private[j][0]);
                residual.add_scaled(&d_j, -gamma);
            }
            let channels = channels_for(Variant::MultiPeriod, true, info, 0);
            let features = feature_forms(&channels, &forms, 0, 0);
            let quad = Quadratic::build(
                &forms,
                channels,
                features,
                &residual,
                gamma + params.epsilon[t],
            );
            quad.audit(format!("period {}", t + 1), periods[t], grid)
        })
        .collect()
}

/// Audits one representative deviator per group: storage 0 for symmetric rules, one informed and
/// one uninformed storage for targeted release, every storage for heterogeneous rules, and every
/// period for the relaxed multi-period rule.
///
/// For [`Variant::Sharing`] pass `info` with `sigma` set to the pooled precision.
pub fn best_response_audit(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
    strategy: &LinearStrategy,
    variant: Variant,
    costs: Option<&[Vec<f64>]>,
    grid: Option<GridSpec>,
) -> Result<Vec<DeviationReport>> {
    params.validate()?;
    info.validate_for(n)?;
    match (variant, strategy) {
        (Variant::Centralized, _) => Err(ModelError::Precondition(
            "the single-storage plan has no opponents to audit against".into(),
        )),
        (Variant::MultiPeriod, LinearStrategy::MultiPeriod { .. }) => {
            multi_period_audit(params, info, n, strategy, grid)
        }
        (Variant::MultiPeriod, _) | (_, LinearStrategy::MultiPeriod { .. }) => Err(
            ModelError::Precondition("variant and strategy shape disagree".into()),
        ),
        _ => {
            params.require_horizon(2, "the two-period audit")?;
            let storages: Vec<usize> = match strategy {
                LinearStrategy::Symmetric(_) => vec![0],
                LinearStrategy::Targeted { recipients, .. } => {
                    if *recipients < n {
                        vec![0, *recipients]
                    } else {
                        vec![0]
                    }
                }
                LinearStrategy::Heterogeneous { storages, .. } => (0..storages.len()).collect(),
                LinearStrategy::MultiPeriod { .. } => unreachable!(),
            };
            storages
                .into_iter()
                .map(|i| two_period_audit(params, info, n, strategy, variant, i, costs, grid))
                .collect()
        }
    }
}
