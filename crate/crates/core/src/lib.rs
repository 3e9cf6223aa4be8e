//! Equilibrium strategies of decentralized energy storages competing à la Cournot under
//! uncertain prices, with a Monte Carlo simulator that checks them.
//!
//! Storages buy in some periods and sell in others against the inverse demand
//! `P[t] = beta[t] - gamma[t] D[t] + eta[t]`, where the shock `eta` follows an AR(1) process and
//! storages see noisy private and public forecasts of it. The [`equilibrium`] module gives the
//! linear Bayesian-Nash rules in closed form; [`simulator`] samples markets to estimate payoffs
//! and audits each rule against unilateral deviations.

pub mod bayes;
pub mod centralized;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod market;
pub mod moments;
pub mod report;
pub mod simulator;

pub use config::Config;
pub use equilibrium::{Coefficients, LinearStrategy, PayoffReport};
pub use error::{ModelError, Result};
pub use market::{InfoStructure, MarketParams, MarketPath, Rho};
pub use simulator::{SimConfig, SimReport, Variant};
