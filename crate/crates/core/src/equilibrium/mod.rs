//! Closed-form linear Bayesian-Nash equilibria for decentralized storages and their payoffs.

mod heterogeneous;
mod multi_period;
mod two_period;

pub use heterogeneous::{heterogeneous_two_period, uniform_costs};
pub use multi_period::{multi_period_payoff, multi_period_relaxed, relaxed_multiplier};
pub use two_period::{
    optimal_recipients, payoff_private, payoff_public, sharing_compare, strategy_payoffs,
    targeted_aggregate_payoff, targeted_release, two_period_private, two_period_public,
    RecipientChoice, SharingComparison,
};

use crate::market::MarketParams;
use crate::moments::{AffineForm, MarketForms};

/// Coefficients of the rule `d = a + b x0 + c xi` (base quantity, public response, private response).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Coefficients {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn apply(&self, public: f64, private: f64) -> f64 {
        let mut d = self.a;
        if self.b != 0.0 {
            d += self.b * public;
        }
        if self.c != 0.0 {
            d += self.c * private;
        }
        d
    }

    pub(crate) fn form(&self, public: &AffineForm, private: &AffineForm) -> AffineForm {
        let mut d = public.scaled(0.0);
        d.constant = self.a;
        d.add_scaled(public, self.b);
        d.add_scaled(private, self.c);
        d
    }
}

/// An equilibrium storage rule in one of its shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearStrategy {
    /// Every storage plays the same first-period rule; the second period reverses it.
    Symmetric(Coefficients),
    /// Storages `0..recipients` see the public forecast; the rest play a constant.
    Targeted {
        informed: Coefficients,
        uninformed: f64,
        recipients: usize,
    },
    /// Period-indexed rule of the relaxed multi-period model, sharing one static multiplier.
    MultiPeriod {
        lambda: f64,
        periods: Vec<Coefficients>,
    },
    /// Storage-indexed first-period rule; `sum_b` is the closed-form total public response.
    Heterogeneous {
        storages: Vec<Coefficients>,
        sum_b: f64,
    },
}

impl LinearStrategy {
    /// Rule applied by `storage` in zero-based `period`. Two-period shapes describe period 0 only.
    pub fn rule(&self, storage: usize, period: usize) -> Coefficients {
        match self {
            LinearStrategy::Symmetric(c) => *c,
            LinearStrategy::Targeted {
                informed,
                uninformed,
                recipients,
            } => {
                if storage < *recipients {
                    *informed
                } else {
                    Coefficients::new(*uninformed, 0.0, 0.0)
                }
            }
            LinearStrategy::MultiPeriod { periods, .. } => periods[period],
            LinearStrategy::Heterogeneous { storages, .. } => storages[storage],
        }
    }

    pub fn is_multi_period(&self) -> bool {
        matches!(self, LinearStrategy::MultiPeriod { .. })
    }
}

/// Expected payoffs of a strategy.
///
/// For symmetric variants `exact`, `published` and `asymptotic` are per storage and
/// `aggregate` is their total over all storages. For targeted release every field except
/// `per_storage` is an aggregate over all storages.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffReport {
    /// Finite-n expected payoff using the exact second moments of the forecasts.
    pub exact: f64,
    /// The finite-n closed form as published, where it differs in form from `exact`.
    pub published: Option<f64>,
    /// The large-n closed form evaluated at the given n.
    pub asymptotic: Option<f64>,
    /// Exact expected payoff of each storage when storages differ.
    pub per_storage: Option<Vec<f64>>,
    pub aggregate: f64,
}

/// Exact expected payoff of every storage when decisions are affine forms over the market noise.
///
/// `decisions[i][t]` is storage `i`'s quantity in period `t`; `costs[i][t]` overrides the
/// market cost coefficients.
pub fn expected_payoffs(
    params: &MarketParams,
    forms: &MarketForms,
    decisions: &[Vec<AffineForm>],
    costs: Option<&[Vec<f64>]>,
) -> Vec<f64> {
    let horizon = params.horizon;
    let aggregate: Vec<AffineForm> = (0..horizon)
        .map(|t| {
            let mut total = forms.basis.constant(0.0);
            for d in decisions {
                total.add_scaled(&d[t], 1.0);
            }
            total
        })
        .collect();

    decisions
        .iter()
        .enumerate()
        .map(|(i, d)| {
            (0..horizon)
                .map(|t| {
                    let eps = costs.map_or(params.epsilon[t], |c| c[i][t]);
                    params.beta[t] * d[t].mean() - params.gamma[t] * forms.expect(&d[t], &aggregate[t])
                        + forms.expect(&forms.eta[t], &d[t])
                        - eps * forms.expect(&d[t], &d[t])
                })
                .sum()
        })
        .collect()
}

/// Decision forms of a two-period strategy: the first-period rule, then its reversal.
pub(crate) fn two_period_decisions(
    strategy: &LinearStrategy,
    forms: &MarketForms,
    n: usize,
) -> Vec<Vec<AffineForm>> {
    (0..n)
        .map(|i| {
            let first = strategy.rule(i, 0).form(&forms.public[0], &forms.private[i][0]);
            let second = first.scaled(-1.0);
            vec![first, second]
        })
        .collect()
}

/// Sums over the two periods that every two-period closed form is built from.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TwoPeriodSums {
    pub spread: f64,
    pub gamma_sum: f64,
    pub epsilon_sum: f64,
}

impl TwoPeriodSums {
    pub fn of(params: &MarketParams) -> Self {
        Self {
            spread: params.beta_spread(),
            gamma_sum: params.gamma_sum(),
            epsilon_sum: params.epsilon_sum(),
        }
    }

    /// `2 (eps1 + eps2) + (k + 1)(gamma1 + gamma2)`.
    pub fn cournot_denominator(&self, k: usize) -> f64 {
        2.0 * self.epsilon_sum + (k as f64 + 1.0) * self.gamma_sum
    }

    pub fn scale(&self) -> f64 {
        self.epsilon_sum + self.gamma_sum
    }
}
