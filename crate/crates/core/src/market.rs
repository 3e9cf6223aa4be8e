//! Model primitives: demand and cost parameters, the information structure,
//! sampling of the AR(1) shock process with its forecasts, and Cournot clearing.
//!
//! All noise is parameterized by precisions. An infinite precision is the
//! degenerate "perfect" limit and produces exact-zero noise; a zero precision
//! on a forecast channel means the channel does not exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ModelError, Result};

/// Variance of a Gaussian with the given precision. Infinite precision maps to zero variance.
pub fn variance(precision: f64) -> f64 {
    if precision.is_infinite() {
        0.0
    } else {
        precision.recip()
    }
}

/// Weight `p / (p + rest)` of a signal with precision `p` against competing precision `rest`,
/// with the infinite-precision limits resolved exactly.
pub fn share(p: f64, rest: f64) -> f64 {
    match (p.is_infinite(), rest.is_infinite()) {
        _ if p == 0.0 => 0.0,
        (true, false) => 1.0,
        (false, true) => 0.0,
        (true, true) => f64::NAN,
        (false, false) => p / (p + rest),
    }
}

/// Per-period demand and cost primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams {
    pub horizon: usize,
    /// Market potential for each period.
    pub beta: Vec<f64>,
    /// Price elasticity for each period.
    pub gamma: Vec<f64>,
    /// Quadratic storage-cost coefficient for each period.
    pub epsilon: Vec<f64>,
}

impl MarketParams {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>, epsilon: Vec<f64>) -> Self {
        Self {
            horizon: beta.len(),
            beta,
            gamma,
            epsilon,
        }
    }

    /// Two periods with a common elasticity and cost coefficient.
    pub fn two_period(beta1: f64, beta2: f64, gamma: f64, epsilon: f64) -> Self {
        Self::new(vec![beta1, beta2], vec![gamma; 2], vec![epsilon; 2])
    }

    pub fn beta_spread(&self) -> f64 {
        self.beta[0] - self.beta[1]
    }

    /// Sum of elasticities over all periods.
    pub fn gamma_sum(&self) -> f64 {
        self.gamma.iter().sum()
    }

    /// Sum of cost coefficients over all periods.
    pub fn epsilon_sum(&self) -> f64 {
        self.epsilon.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(ModelError::invalid("L", "horizon must be at least 1"));
        }
        for (what, v) in [
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("epsilon", &self.epsilon),
        ] {
            if v.len() != self.horizon {
                return Err(ModelError::Dimension {
                    what,
                    expected: self.horizon,
                    actual: v.len(),
                });
            }
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(ModelError::invalid("beta", "beta must be finite"));
        }
        if self.gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(ModelError::invalid("gamma", "gamma must be positive"));
        }
        if self.epsilon.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(ModelError::invalid("epsilon", "epsilon must be positive"));
        }
        Ok(())
    }

    pub(crate) fn require_horizon(&self, horizon: usize, model: &str) -> Result<()> {
        if self.horizon != horizon {
            return Err(ModelError::Precondition(format!(
                "{model} requires L={horizon}, got L={}",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Private-forecast precision: one value shared by every storage, or one per storage.
#[derive(Debug, Clone, PartialEq)]
pub enum Rho {
    Common(f64),
    PerStorage(Vec<f64>),
}

impl Rho {
    /// Precision of storage `i`'s private channel.
    pub fn of(&self, i: usize) -> f64 {
        match self {
            Rho::Common(r) => *r,
            Rho::PerStorage(rs) => rs[i],
        }
    }

    pub fn common(&self) -> Option<f64> {
        match self {
            Rho::Common(r) => Some(*r),
            Rho::PerStorage(_) => None,
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Rho::Common(r) => std::slice::from_ref(r),
            Rho::PerStorage(rs) => rs,
        }
    }
}

/// Precisions and dynamics of the market shock and of the forecast channels.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoStructure {
    /// Prior precision of the first-period shock.
    pub alpha: f64,
    /// AR(1) coefficient.
    pub delta: f64,
    /// Precision of the innovation between consecutive shocks.
    pub zeta: f64,
    pub rho: Rho,
    /// Public-forecast precision; zero disables the public channel.
    pub sigma: f64,
}

impl InfoStructure {
    pub fn new(alpha: f64, delta: f64, zeta: f64, rho: f64, sigma: f64) -> Self {
        Self {
            alpha,
            delta,
            zeta,
            rho: Rho::Common(rho),
            sigma,
        }
    }

    pub fn with_sigma(&self, sigma: f64) -> Self {
        Self {
            sigma,
            ..self.clone()
        }
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        Self {
            rho: Rho::Common(rho),
            ..self.clone()
        }
    }

    pub fn has_public_channel(&self) -> bool {
        self.sigma > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(ModelError::invalid("alpha", "alpha must be positive"));
        }
        if !(self.delta.abs() < 1.0) {
            return Err(ModelError::invalid(
                "delta",
                "delta must satisfy |delta|<1",
            ));
        }
        if self.zeta.is_nan() || self.zeta <= 0.0 {
            return Err(ModelError::invalid("zeta", "zeta must be positive"));
        }
        if self.rho.values().iter().any(|r| r.is_nan() || *r < 0.0) {
            return Err(ModelError::invalid("rho", "rho must be nonnegative"));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(ModelError::invalid("sigma", "sigma must be nonnegative"));
        }
        if self.alpha.is_infinite()
            && (self.sigma.is_infinite() || self.rho.values().iter().any(|r| r.is_infinite()))
        {
            return Err(ModelError::invalid(
                "alpha",
                "an infinite prior precision cannot be combined with an infinite forecast precision",
            ));
        }
        Ok(())
    }

    /// Checks a per-storage precision list against the storage count.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.validate()?;
        if n == 0 {
            return Err(ModelError::invalid("n", "storage count must be at least 1"));
        }
        if let Rho::PerStorage(rs) = &self.rho {
            if rs.len() != n {
                return Err(ModelError::Dimension {
                    what: "rho",
                    expected: n,
                    actual: rs.len(),
                });
            }
        }
        Ok(())
    }
}

/// Validates the market and the information structure together.
pub fn validate(params: &MarketParams, info: &InfoStructure) -> Result<()> {
    params.validate()?;
    info.validate()
}

/// Independent random streams used inside one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    Shock,
    Public,
    Private(usize),
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::Shock => 0,
            StreamRole::Public => 1,
            StreamRole::Private(i) => 2 + i as u64,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based generator for one (seed, replication, role) triple.
///
/// The key depends on the master seed and the role, the ChaCha stream id is the
/// replication index, so any replication can be regenerated in isolation.
pub fn stream_rng(seed: u64, replication: u64, role: StreamRole) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(role.tag())));
    rng.set_stream(replication);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, precision: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    variance(precision).sqrt() * z
}

/// One realization of the market: shocks, forecasts and, once filled, decisions and outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPath {
    pub eta: Vec<f64>,
    /// `private_forecasts[i][t]`; all zero for a storage without a private channel.
    pub private_forecasts: Vec<Vec<f64>>,
    /// All zero when the public channel is disabled.
    pub public_forecasts: Vec<f64>,
    /// `quantities[i][t]`, empty until filled.
    pub quantities: Vec<Vec<f64>>,
    pub prices: Vec<f64>,
    pub payoffs: Vec<f64>,
}

impl MarketPath {
    pub fn storages(&self) -> usize {
        self.private_forecasts.len()
    }

    pub fn horizon(&self) -> usize {
        self.eta.len()
    }

    /// Clears the market at the given quantities and stores prices and payoffs.
    pub fn fill(&mut self, params: &MarketParams, quantities: Vec<Vec<f64>>) -> Result<()> {
        let clearing = clear_market(params, &quantities, &self.eta)?;
        self.quantities = quantities;
        self.prices = clearing.prices;
        self.payoffs = clearing.payoffs;
        Ok(())
    }
}

/// Samples replication 0 for the given seed.
pub fn sample_path(
    params: &MarketParams,
    info: &InfoStructure,
    n: usize,
    seed: u64,
) -> Result<MarketPath> {
    params.validate()?;
    info.validate_for(n)?;
    Ok(sample_replication(params.horizon, info, n, seed, 0))
}

/// Samples the shocks and forecasts of one replication. Inputs are assumed validated.
pub fn sample_replication(
    horizon: usize,
    info: &InfoStructure,
    n: usize,
    seed: u64,
    replication: u64,
) -> MarketPath {
    let mut shocks = stream_rng(seed, replication, StreamRole::Shock);
    let mut eta = Vec::with_capacity(horizon);
    let mut current = gaussian(&mut shocks, info.alpha);
    eta.push(current);
    for _ in 1..horizon {
        current = info.delta * current + gaussian(&mut shocks, info.zeta);
        eta.push(current);
    }

    let private_forecasts = (0..n)
        .map(|i| {
            let rho = info.rho.of(i);
            if rho == 0.0 {
                return vec![0.0; horizon];
            }
            let mut rng = stream_rng(seed, replication, StreamRole::Private(i));
            eta.iter().map(|e| e + gaussian(&mut rng, rho)).collect()
        })
        .collect();

    let public_forecasts = if info.has_public_channel() {
        let mut rng = stream_rng(seed, replication, StreamRole::Public);
        eta.iter().map(|e| e + gaussian(&mut rng, info.sigma)).collect()
    } else {
        vec![0.0; horizon]
    };

    MarketPath {
        eta,
        private_forecasts,
        public_forecasts,
        quantities: Vec::new(),
        prices: Vec::new(),
        payoffs: Vec::new(),
    }
}

/// Prices and per-storage payoffs of one cleared market.
#[derive(Debug, Clone, PartialEq)]
pub struct Clearing {
    pub prices: Vec<f64>,
    pub payoffs: Vec<f64>,
}

/// Clears the Cournot market: `P[t] = beta[t] - gamma[t] * D[t] + eta[t]`, and each storage earns
/// `sum_t P[t] d_i[t] - epsilon[t] d_i[t]^2`.
pub fn clear_market(params: &MarketParams, quantities: &[Vec<f64>], eta: &[f64]) -> Result<Clearing> {
    clear_market_with_costs(params, quantities, eta, None)
}

/// Like [`clear_market`], with optional storage-specific cost coefficients `costs[i][t]`.
pub fn clear_market_with_costs(
    params: &MarketParams,
    quantities: &[Vec<f64>],
    eta: &[f64],
    costs: Option<&[Vec<f64>]>,
) -> Result<Clearing> {
    let horizon = params.horizon;
    if eta.len() != horizon {
        return Err(ModelError::Dimension {
            what: "eta",
            expected: horizon,
            actual: eta.len(),
        });
    }
    if let Some(bad) = quantities.iter().find(|q| q.len() != horizon) {
        return Err(ModelError::Dimension {
            what: "quantities",
            expected: horizon,
            actual: bad.len(),
        });
    }
    if let Some(c) = costs {
        if c.len() != quantities.len() {
            return Err(ModelError::Dimension {
                what: "costs",
                expected: quantities.len(),
                actual: c.len(),
            });
        }
        if let Some(bad) = c.iter().find(|row| row.len() != horizon) {
            return Err(ModelError::Dimension {
                what: "costs",
                expected: horizon,
                actual: bad.len(),
            });
        }
    }

    let prices: Vec<f64> = (0..horizon)
        .map(|t| {
            let aggregate: f64 = quantities.iter().map(|q| q[t]).sum();
            params.beta[t] - params.gamma[t] * aggregate + eta[t]
        })
        .collect();

    let payoffs = quantities
        .iter()
        .enumerate()
        .map(|(i, q)| {
            (0..horizon)
                .map(|t| {
                    let eps = costs.map_or(params.epsilon[t], |c| c[i][t]);
                    prices[t] * q[t] - eps * q[t] * q[t]
                })
                .sum()
        })
        .collect();

    Ok(Clearing { prices, payoffs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> (MarketParams, InfoStructure) {
        (
            MarketParams::new(vec![1.0; 2], vec![1.0; 2], vec![1.0; 2]),
            InfoStructure::new(1.0, 0.0, 1.0, 1.0, 0.0),
        )
    }

    #[test]
    fn accepts_unit_parameters() {
        let (p, i) = unit();
        assert!(validate(&p, &i).is_ok());
    }

    #[test]
    fn rejects_unit_root() {
        let (p, mut i) = unit();
        i.delta = 1.0;
        let err = validate(&p, &i).unwrap_err();
        assert!(err.to_string().contains("delta must satisfy |delta|<1"), "{err}");
    }

    #[test]
    fn rejects_zero_elasticity() {
        let (mut p, i) = unit();
        p.gamma[0] = 0.0;
        let err = validate(&p, &i).unwrap_err();
        assert!(err.to_string().contains("gamma must be positive"), "{err}");
    }

    #[test]
    fn rejects_length_mismatch() {
        let (mut p, i) = unit();
        p.epsilon.push(1.0);
        assert!(matches!(
            validate(&p, &i),
            Err(ModelError::Dimension { what: "epsilon", .. })
        ));
    }

    #[test]
    fn rejects_per_storage_rho_of_wrong_length() {
        let (_, mut i) = unit();
        i.rho = Rho::PerStorage(vec![1.0, 2.0]);
        assert!(i.validate_for(3).is_err());
        assert!(i.validate_for(2).is_ok());
    }

    #[test]
    fn share_limits() {
        assert_eq!(share(f64::INFINITY, 3.0), 1.0);
        assert_eq!(share(3.0, f64::INFINITY), 0.0);
        assert_eq!(share(0.0, f64::INFINITY), 0.0);
        assert_eq!(share(1.0, 3.0), 0.25);
    }

    #[test]
    fn null_market_prices_are_potential_plus_shock() {
        let p = MarketParams::new(vec![2.0, 1.0, 4.0], vec![1.0; 3], vec![1.0; 3]);
        let eta = [0.5, -0.25, 0.0];
        let c = clear_market(&p, &[vec![0.0; 3], vec![0.0; 3]], &eta).unwrap();
        assert_eq!(c.prices, vec![2.5, 0.75, 4.0]);
        assert_eq!(c.payoffs, vec![0.0, 0.0]);
    }

    #[test]
    fn hand_evaluated_single_storage() {
        let p = MarketParams::new(vec![2.0, 1.0], vec![1.0; 2], vec![1.0; 2]);
        let c = clear_market(&p, &[vec![1.0, -1.0]], &[0.0, 0.0]).unwrap();
        assert_eq!(c.prices, vec![1.0, 2.0]);
        assert_eq!(c.payoffs, vec![-3.0]);
    }

    #[test]
    fn more_supply_lowers_price() {
        let p = MarketParams::new(vec![2.0, 1.0], vec![0.7, 1.3], vec![1.0; 2]);
        let base = clear_market(&p, &[vec![0.4, -0.4], vec![0.2, 0.3]], &[0.1, 0.2]).unwrap();
        let doubled = clear_market(&p, &[vec![0.8, -0.8], vec![0.2, 0.3]], &[0.1, 0.2]).unwrap();
        assert!(doubled.prices[0] < base.prices[0]);
        // storage 0 sells in period 0 and buys in period 1
        assert!(doubled.prices[1] > base.prices[1]);
    }

    #[test]
    fn clearing_rejects_bad_dimensions() {
        let (p, _) = unit();
        assert!(clear_market(&p, &[vec![1.0]], &[0.0, 0.0]).is_err());
        assert!(clear_market(&p, &[vec![1.0, 1.0]], &[0.0]).is_err());
    }

    #[test]
    fn same_seed_same_path() {
        let (p, mut i) = unit();
        i.sigma = 2.0;
        let a = sample_path(&p, &i, 3, 42).unwrap();
        let b = sample_path(&p, &i, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_path(&p, &i, 3, 43).unwrap();
        assert_ne!(a.eta, c.eta);
    }

    #[test]
    fn dogmatic_prior_gives_zero_first_shock() {
        let (p, mut i) = unit();
        i.alpha = f64::INFINITY;
        for seed in 0..20 {
            assert_eq!(sample_path(&p, &i, 2, seed).unwrap().eta[0], 0.0);
        }
    }

    #[test]
    fn perfect_forecasts_equal_the_shock() {
        let (p, mut i) = unit();
        i.rho = Rho::Common(f64::INFINITY);
        i.sigma = f64::INFINITY;
        let path = sample_path(&p, &i, 2, 9).unwrap();
        assert_eq!(path.private_forecasts[1], path.eta);
        assert_eq!(path.public_forecasts, path.eta);
    }

    #[test]
    fn adding_storages_keeps_existing_streams() {
        let (p, i) = unit();
        let a = sample_path(&p, &i, 2, 5).unwrap();
        let b = sample_path(&p, &i, 4, 5).unwrap();
        assert_eq!(a.eta, b.eta);
        assert_eq!(a.private_forecasts[..], b.private_forecasts[..2]);
    }
}
