//! Seeded synthetic data generation for validating the fitters.
//!
//! Every generator takes a `ChaCha8Rng` so results are reproducible across
//! platforms and runs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::fit::{convolved_decay, lorentzian_value, DecayModel};

/// Uniform grid of `n` samples over `[lo, hi]` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least 2 samples");
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Add zero-mean Gaussian noise of standard deviation `sigma` in place.
pub fn add_gaussian_noise(y: &mut [f64], sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    for v in y {
        *v += normal.sample(rng);
    }
}

/// Replace each sample by a Poisson draw with that mean (negative clamped
/// to zero first), as photon-counting noise.
pub fn poissonize(y: &mut [f64], rng: &mut ChaCha8Rng) {
    for v in y {
        let mean = v.max(0.0);
        *v = if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(rng)
        } else {
            0.0
        };
    }
}

/// Gaussian-scattered series around `center` with standard deviation
/// `sigma`.
pub fn gaussian_series(center: f64, sigma: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = Normal::new(center, sigma).expect("finite sigma");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Sample a Lorentzian peak on a grid.
pub fn lorentzian_samples(
    grid: &[f64],
    center: f64,
    fwhm: f64,
    amplitude: f64,
    offset: f64,
) -> Vec<f64> {
    grid.iter()
        .map(|&x| lorentzian_value(x, center, fwhm, amplitude, offset))
        .collect()
}

/// Sample a multi-exponential decay on a grid.
pub fn decay_samples(grid: &[f64], model: &DecayModel) -> Vec<f64> {
    grid.iter().map(|&t| model.evaluate(t)).collect()
}

/// Sample an IRF-convolved exponential on a grid.
pub fn convolved_decay_samples(
    grid: &[f64],
    tau: f64,
    amplitude: f64,
    t0: f64,
    irf_sigma: f64,
    baseline: f64,
) -> Vec<f64> {
    grid.iter()
        .map(|&t| convolved_decay(t, tau, amplitude, t0, irf_sigma, baseline))
        .collect()
}

/// Uniform random draw in `[lo, hi)`.
pub fn uniform_in(lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(lo..hi)
}
