//! Exact first and second moments of affine functions of independent zero-mean Gaussians.
//!
//! Every quantity a linear storage rule produces (forecasts, decisions, aggregate supply, shocks)
//! is an affine form over the independent noise terms of the market, so expected payoffs and
//! best responses reduce to inner products weighted by the noise variances.

use std::ops::{Add, Mul, Sub};

use crate::market::{variance, InfoStructure};

/// Independent zero-mean Gaussian sources with known variances.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBasis {
    variances: Vec<f64>,
}

impl GaussianBasis {
    pub fn new(variances: Vec<f64>) -> Self {
        Self { variances }
    }

    pub fn dim(&self) -> usize {
        self.variances.len()
    }

    pub fn constant(&self, c: f64) -> AffineForm {
        AffineForm {
            constant: c,
            coefs: vec![0.0; self.dim()],
        }
    }

    /// The `k`-th source itself.
    pub fn source(&self, k: usize) -> AffineForm {
        let mut f = self.constant(0.0);
        f.coefs[k] = 1.0;
        f
    }

    /// `E[a b]`.
    pub fn expect_product(&self, a: &AffineForm, b: &AffineForm) -> f64 {
        a.constant * b.constant
            + a.coefs
                .iter()
                .zip(&b.coefs)
                .zip(&self.variances)
                .filter(|((x, y), _)| **x != 0.0 && **y != 0.0)
                .map(|((x, y), v)| x * y * v)
                .sum::<f64>()
    }

    pub fn variance_of(&self, a: &AffineForm) -> f64 {
        let centered = AffineForm {
            constant: 0.0,
            coefs: a.coefs.clone(),
        };
        self.expect_product(&centered, &centered)
    }
}

/// `constant + sum_k coefs[k] * source_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub constant: f64,
    pub coefs: Vec<f64>,
}

impl AffineForm {
    pub fn mean(&self) -> f64 {
        self.constant
    }

    pub fn scaled(&self, s: f64) -> AffineForm {
        if s == 0.0 {
            return AffineForm {
                constant: 0.0,
                coefs: vec![0.0; self.coefs.len()],
            };
        }
        AffineForm {
            constant: self.constant * s,
            coefs: self.coefs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &AffineForm, s: f64) {
        if s == 0.0 {
            return;
        }
        self.constant += s * other.constant;
        for (a, b) in self.coefs.iter_mut().zip(&other.coefs) {
            *a += s * b;
        }
    }
}

impl Add for &AffineForm {
    type Output = AffineForm;
    fn add(self, rhs: &AffineForm) -> AffineForm {
        let mut out = self.clone();
        out.add_scaled(rhs, 1.0);
        out
    }
}

impl Sub for &AffineForm {
    type Output = AffineForm;
    fn sub(self, rhs: &AffineForm) -> AffineForm {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0);
        out
    }
}

impl Mul<f64> for &AffineForm {
    type Output = AffineForm;
    fn mul(self, rhs: f64) -> AffineForm {
        self.scaled(rhs)
    }
}

/// Affine forms for every primitive random variable of an `n`-storage, `horizon`-period market.
///
/// Sources, in order: the first-period shock, the `horizon - 1` innovations, the public noise of
/// every period and the private noise of every storage and period. Absent channels get zero
/// variance; their forecasts then coincide with the shock and must not be used by a rule.
#[derive(Debug, Clone)]
pub struct MarketForms {
    pub basis: GaussianBasis,
    /// `eta[t]`.
    pub eta: Vec<AffineForm>,
    /// `public[t]`.
    pub public: Vec<AffineForm>,
    /// `private[i][t]`.
    pub private: Vec<Vec<AffineForm>>,
}

impl MarketForms {
    pub fn new(info: &InfoStructure, n: usize, horizon: usize) -> Self {
        let alpha_var = variance(info.alpha);
        let mut variances = vec![alpha_var];
        variances.extend(std::iter::repeat_n(variance(info.zeta), horizon - 1));
        let sigma_var = if info.has_public_channel() {
            variance(info.sigma)
        } else {
            0.0
        };
        variances.extend(std::iter::repeat_n(sigma_var, horizon));
        for i in 0..n {
            let rho = info.rho.of(i);
            let v = if rho > 0.0 { variance(rho) } else { 0.0 };
            variances.extend(std::iter::repeat_n(v, horizon));
        }
        let basis = GaussianBasis::new(variances);

        let mut eta = Vec::with_capacity(horizon);
        eta.push(basis.source(0));
        for t in 1..horizon {
            let next = &(&eta[t - 1] * info.delta) + &basis.source(t);
            eta.push(next);
        }
        let public_offset = horizon;
        let public = (0..horizon)
            .map(|t| &eta[t] + &basis.source(public_offset + t))
            .collect();
        let private_offset = 2 * horizon;
        let private = (0..n)
            .map(|i| {
                (0..horizon)
                    .map(|t| &eta[t] + &basis.source(private_offset + i * horizon + t))
                    .collect()
            })
            .collect();

        Self {
            basis,
            eta,
            public,
            private,
        }
    }

    pub fn expect(&self, a: &AffineForm, b: &AffineForm) -> f64 {
        self.basis.expect_product(a, b)
    }
}
