//! Closed-form posteriors against brute-force Gaussian conditioning.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use storage_equilibria::bayes::{
    gaussian_condition_oracle, pooled_estimator_variance, posterior_ar1, posterior_pooled,
    posterior_t1_private, posterior_t1_public, posterior_t1_public_private,
    public_estimator_variance,
};
use storage_equilibria::market::{InfoStructure, Rho};

const TOL: f64 = 1e-10;

fn draw(rng: &mut ChaCha8Rng) -> InfoStructure {
    InfoStructure::new(
        rng.random_range(0.1..10.0),
        rng.random_range(-0.9..0.9),
        rng.random_range(0.1..10.0),
        rng.random_range(0.1..10.0),
        rng.random_range(0.1..10.0),
    )
}

/// Joint covariance of `(eta1, x1, x0)` for one storage in the first period.
fn first_period_cov(alpha: f64, rho: f64, sigma: f64) -> DMatrix<f64> {
    let a = 1.0 / alpha;
    DMatrix::from_row_slice(3, 3, &[a, a, a, a, a + 1.0 / rho, a, a, a, a + 1.0 / sigma])
}

#[test]
fn single_forecast_posteriors() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let info = draw(&mut rng);
        let rho = info.rho.of(0);
        let cov = first_period_cov(info.alpha, rho, info.sigma);
        let x: f64 = rng.random_range(-3.0..3.0);

        let oracle = gaussian_condition_oracle(&[0.0; 3], &cov, &[1], &[x]).unwrap()[0];
        assert!((posterior_t1_private(x, &info).value - oracle).abs() < TOL);

        let oracle = gaussian_condition_oracle(&[0.0; 3], &cov, &[2], &[x]).unwrap()[0];
        assert!((posterior_t1_public(x, &info).value - oracle).abs() < TOL);
    }
}

#[test]
fn autoregressive_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let info = draw(&mut rng);
        let (alpha, delta, zeta, rho) = (info.alpha, info.delta, info.zeta, info.rho.of(0));
        // (eta1, eta2, x2)
        let v1 = 1.0 / alpha;
        let v2 = delta * delta * v1 + 1.0 / zeta;
        let cov = DMatrix::from_row_slice(
            3,
            3,
            &[v1, delta * v1, delta * v1, delta * v1, v2, v2, delta * v1, v2, v2 + 1.0 / rho],
        );
        let (eta1, x2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let oracle = gaussian_condition_oracle(&[0.0; 3], &cov, &[0, 2], &[eta1, x2]).unwrap()[1];
        assert!((posterior_ar1(x2, eta1, &info).value - oracle).abs() < TOL);
    }
}

#[test]
fn two_signal_posterior_with_common_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let info = draw(&mut rng);
        let rho = info.rho.of(0);
        let cov = first_period_cov(info.alpha, rho, info.sigma);
        let (x0, xi) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let oracle = gaussian_condition_oracle(&[0.0; 3], &cov, &[1, 2], &[xi, x0]).unwrap()[0];
        let closed = posterior_t1_public_private(x0, xi, rho, &info).value;
        assert!((closed - oracle).abs() < TOL, "{closed} vs {oracle}");
    }
}

#[test]
fn pooled_posterior_equals_conditioning_on_all_forecasts() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let info = draw(&mut rng);
        let n = rng.random_range(1..7usize);
        let (a, r) = (1.0 / info.alpha, 1.0 / info.rho.of(0));
        let cov = DMatrix::from_fn(n + 1, n + 1, |i, j| if i == j && i > 0 { a + r } else { a });
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let observed: Vec<usize> = (1..=n).collect();
        let oracle = gaussian_condition_oracle(&vec![0.0; n + 1], &cov, &observed, &xs).unwrap()[0];
        assert!((posterior_pooled(&xs, &info).value - oracle).abs() < TOL);
    }
}

#[test]
fn pooled_estimator_matches_public_at_pooled_precision() {
    for &(n, rho, alpha) in &[(1usize, 1.0, 1.0), (5, 0.3, 2.0), (40, 2.0, 0.5)] {
        let pooled = pooled_estimator_variance(n, rho, alpha);
        let public = public_estimator_variance(n as f64 * rho, alpha);
        assert!((pooled - public).abs() < 1e-14);
        let closed = n as f64 * rho / (alpha * (alpha + n as f64 * rho));
        assert!((pooled - closed).abs() < 1e-14);
    }
}

/// The market-wide public weight of the two-signal estimator is exact only when the storage's
/// own precision equals the common one. Report the size of the deviation without asserting it.
#[test]
fn heterogeneous_two_signal_deviation_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut info = draw(&mut rng);
        let rho_i: f64 = rng.random_range(0.1..10.0);
        let common = info.rho.of(0);
        info.rho = Rho::Common(common);
        let cov = first_period_cov(info.alpha, rho_i, info.sigma);
        let (x0, xi) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let oracle = gaussian_condition_oracle(&[0.0; 3], &cov, &[1, 2], &[xi, x0]).unwrap()[0];
        let closed = posterior_t1_public_private(x0, xi, rho_i, &info).value;
        worst = worst.max((closed - oracle).abs());
    }
    println!("largest two-signal deviation with mismatched precisions: {worst:.3e}");
}

#[test]
fn singular_observation_block_is_reported() {
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    assert!(gaussian_condition_oracle(&[0.0, 0.0], &cov, &[0, 1], &[1.0, 1.0]).is_err());
}
