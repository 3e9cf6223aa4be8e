//! Two-period equilibrium for storages with their own cost coefficients and forecast precisions,
//! all observing a common public forecast as well.

use super::{Coefficients, LinearStrategy};
use crate::error::{ModelError, Result};
use crate::market::{share, InfoStructure, MarketParams};

/// Every storage pays the market cost coefficients: `costs[i][t] = epsilon[t]`.
pub fn uniform_costs(params: &MarketParams, n: usize) -> Vec<Vec<f64>> {
    vec![params.epsilon.clone(); n]
}

/// Per-storage rules `d_i = A_i + B_i x0 + C_i x_i`.
///
/// `costs[i]` holds storage `i`'s two cost coefficients; precisions come from `info.rho`.
/// Aggregate sums are formed first and each storage's coefficients follow from them.
pub fn heterogeneous_two_period(
    params: &MarketParams,
    info: &InfoStructure,
    costs: &[Vec<f64>],
) -> Result<LinearStrategy> {
    let n = costs.len();
    if n < 1 {
        return Err(ModelError::invalid("n", "storage count must be at least 1"));
    }
    params.validate()?;
    info.validate_for(n)?;
    params.require_horizon(2, "the heterogeneous model")?;
    for row in costs {
        if row.len() != 2 {
            return Err(ModelError::Dimension {
                what: "storage costs",
                expected: 2,
                actual: row.len(),
            });
        }
        if row.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(ModelError::invalid("epsilon", "epsilon must be positive"));
        }
    }

    let g = params.gamma_sum();
    let spread = params.beta_spread();
    let persistence = 1.0 - info.delta;
    let e: Vec<f64> = costs.iter().map(|row| row[0] + row[1]).collect();
    // 2 e_i + g
    let h: Vec<f64> = e.iter().map(|ei| 2.0 * ei + g).collect();
    // 1 + sum_k g / h_k
    let own_count = 1.0 + h.iter().map(|hk| g / hk).sum::<f64>();

    let w: Vec<f64> = (0..n)
        .map(|i| share(info.rho.of(i), info.alpha + info.sigma))
        .collect();
    let v: Vec<f64> = (0..n)
        .map(|i| share(info.sigma, info.alpha + info.rho.of(i)))
        .collect();
    // 2 (g + e_i) - g w_i
    let k: Vec<f64> = (0..n).map(|i| 2.0 * (g + e[i]) - g * w[i]).collect();
    let w_over_k: f64 = (0..n).map(|i| w[i] / k[i]).sum();

    let a: Vec<f64> = h.iter().map(|hi| spread / hi / own_count).collect();
    let c: Vec<f64> = (0..n)
        .map(|i| {
            let own = persistence * w[i] / k[i];
            -(g * own) * w_over_k / (1.0 + g * w_over_k) + own
        })
        .collect();
    let c_total: f64 = c.iter().sum();

    let sum_b = (-(0..n)
        .map(|i| g * v[i] * (c_total - c[i]) / h[i])
        .sum::<f64>()
        + (0..n).map(|i| persistence * v[i] / h[i]).sum::<f64>())
        / own_count;
    let b: Vec<f64> = (0..n)
        .map(|i| -g * (sum_b + v[i] * (c_total - c[i])) / h[i] + persistence * v[i] / h[i])
        .collect();

    let storages = (0..n).map(|i| Coefficients::new(a[i], b[i], c[i])).collect();
    Ok(LinearStrategy::Heterogeneous { storages, sum_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Rho;

    #[test]
    fn flat_potential_has_zero_base() {
        let p = MarketParams::two_period(1.5, 1.5, 1.0, 1.0);
        let mut info = InfoStructure::new(1.0, 0.2, 1.0, 1.0, 2.0);
        info.rho = Rho::PerStorage(vec![0.5, 1.0, 3.0]);
        let costs = vec![vec![1.0, 2.0], vec![0.5, 0.5], vec![3.0, 1.0]];
        let LinearStrategy::Heterogeneous { storages, .. } =
            heterogeneous_two_period(&p, &info, &costs).unwrap()
        else {
            panic!()
        };
        assert!(storages.iter().all(|c| c.a == 0.0));
    }

    #[test]
    fn public_responses_sum_to_closed_form_total() {
        let p = MarketParams::new(vec![2.0, 1.0], vec![0.7, 1.3], vec![1.0, 1.0]);
        let mut info = InfoStructure::new(1.2, 0.4, 1.0, 1.0, 2.5);
        info.rho = Rho::PerStorage(vec![0.5, 1.0, 3.0, 8.0]);
        let costs = vec![vec![1.0, 2.0], vec![0.5, 0.5], vec![3.0, 1.0], vec![0.2, 0.9]];
        let LinearStrategy::Heterogeneous { storages, sum_b } =
            heterogeneous_two_period(&p, &info, &costs).unwrap()
        else {
            panic!()
        };
        let total: f64 = storages.iter().map(|c| c.b).sum();
        assert!((total - sum_b).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_population_and_bad_costs() {
        let p = MarketParams::two_period(2.0, 1.0, 1.0, 1.0);
        let info = InfoStructure::new(1.0, 0.0, 1.0, 1.0, 0.0);
        assert!(heterogeneous_two_period(&p, &info, &[]).is_err());
        assert!(heterogeneous_two_period(&p, &info, &[vec![1.0]]).is_err());
        assert!(heterogeneous_two_period(&p, &info, &[vec![1.0, -1.0]]).is_err());
    }
}
