//! Nonlinear least-squares fitters for the spectroscopic analysis chain:
//! Lorentzian peaks, Stark shifts, exponential charge decays, IRF-convolved
//! lifetimes and Hamiltonian-parameter inversion, plus drift statistics.

use thiserror::Error;

pub mod decay;
pub mod drift;
pub mod hamiltonian;
pub mod lifetime;
pub mod lm;
pub mod lorentzian;
pub mod stark;

pub use decay::{fit_decay, DecayFitOptions, DecayModel};
pub use drift::rms_drift;
pub use hamiltonian::{fit_hamiltonian_params, HamiltonianFitConfig};
pub use lifetime::{convolved_decay, fit_lifetime_irf, LifetimeFitOptions};
pub use lm::{least_squares, LmOptions, LmOutcome};
pub use lorentzian::{fit_lorentzian, lorentzian_value};
pub use stark::{
    convert_dipole, convert_polarizability, fit_stark, fit_stark_referenced, local_field,
    shifts_from_reference, stark_shift, StarkModel,
};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least {needed} data points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("no peak above the noise floor (amplitude {amplitude:.3e} < 3 x residual rms {noise:.3e})")]
    NoPeak { amplitude: f64, noise: f64 },
    #[error("invalid fit input: {0}")]
    InvalidInput(String),
    #[error("decay component count must be 1 or 2, got {0}")]
    BadComponentCount(usize),
    #[error("lifetime not identifiable: tau = {tau:.3e} is below the bin width {bin:.3e}")]
    TauNotIdentifiable { tau: f64, bin: f64 },
    #[error("peak assignment is ambiguous: measured peaks {a:.6} and {b:.6} GHz both map to the simulated line at {line:.6} GHz")]
    AssignmentAmbiguity { a: f64, b: f64, line: f64 },
    #[error(transparent)]
    Spectrum(#[from] crate::spectrum::SpectrumError),
}

/// One named fitted parameter with its 1-sigma standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

/// Outcome of a least-squares fit.
///
/// `converged` requires the residual gradient norm at the optimum to sit
/// below the engine tolerance; `degenerate` marks a rank-deficient Jacobian
/// (some parameter combination left unconstrained by the data).
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: Vec<FitParam>,
    pub r_squared: f64,
    /// Root of the unweighted residual sum of squares, in data units.
    pub residual_norm: f64,
    pub converged: bool,
    pub degenerate: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.std_error)
    }
}

/// Coefficient of determination of `model` against `data`.
///
/// Returns 0 when the data has no variance (R^2 is undefined there).
pub(crate) fn r_squared(data: &[f64], model: &[f64]) -> f64 {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let ss_tot: f64 = data.iter().map(|y| (y - mean) * (y - mean)).sum();
    let ss_res: f64 = data
        .iter()
        .zip(model)
        .map(|(y, m)| (y - m) * (y - m))
        .sum();
    if ss_tot <= f64::MIN_POSITIVE * n {
        return 0.0;
    }
    1.0 - ss_res / ss_tot
}

/// Standard errors from the unscaled covariance, scaled by the reduced
/// chi-square (chi2 / (n - k)). Rank-deficient directions yield infinity.
pub(crate) fn scaled_std_errors(outcome: &lm::LmOutcome, n_points: usize) -> Vec<f64> {
    let k = outcome.params.len();
    let dof = n_points.saturating_sub(k).max(1) as f64;
    let scale = outcome.chi_square / dof;
    outcome
        .covariance_diagonal
        .iter()
        .map(|&c| {
            if c.is_finite() {
                (c * scale).max(0.0).sqrt()
            } else {
                f64::INFINITY
            }
        })
        .collect()
}
