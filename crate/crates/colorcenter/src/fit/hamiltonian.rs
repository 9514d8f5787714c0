//! Inversion of measured peak positions to the spin-orbit and Jahn-Teller
//! strengths, using the spectrum simulator as the forward model with
//! nearest-line assignment per iteration.

use super::lm::{least_squares, LmOptions};
use super::{r_squared, scaled_std_errors, FitError, FitParam, FitResult};
use crate::defect::{DefectParameters, FieldConfig};
use crate::spectrum::{transition_lines, IntensityModel};

/// Fixed inputs of the inversion: everything except lambda and xi.
#[derive(Debug, Clone)]
pub struct HamiltonianFitConfig {
    /// Fixed parameters; `lambda_soc`, `xi_x`, `xi_y` are overridden by the
    /// fit (xi is carried on xi_x with xi_y = 0).
    pub fixed: DefectParameters,
    pub axis: [f64; 3],
    pub field_dir: [f64; 3],
    /// Optional (lambda, xi) starting point; otherwise seeded from the data.
    pub initial: Option<(f64, f64)>,
    /// Two measured peaks further apart than this that land on one simulated
    /// line raise an ambiguity error (GHz).
    pub ambiguity_tol: f64,
    pub lm: LmOptions,
}

impl Default for HamiltonianFitConfig {
    fn default() -> Self {
        Self {
            fixed: DefectParameters::default(),
            axis: [-1.0, -1.0, 1.0],
            field_dir: [1.0, 1.0, 1.0],
            initial: None,
            ambiguity_tol: 1e-3,
            lm: LmOptions::default(),
        }
    }
}

fn with_couplings(fixed: &DefectParameters, lambda: f64, xi: f64) -> DefectParameters {
    DefectParameters {
        lambda_soc: lambda.abs(),
        xi_x: xi.abs(),
        xi_y: 0.0,
        ..fixed.clone()
    }
}

/// Simulated line frequencies for each distinct field magnitude.
fn simulate(
    fields: &[f64],
    params: &DefectParameters,
    config: &HamiltonianFitConfig,
) -> Result<Vec<Vec<f64>>, FitError> {
    fields
        .iter()
        .map(|&b| {
            let field = FieldConfig::from_direction(b, config.field_dir, config.axis)
                .map_err(crate::spectrum::SpectrumError::from)?;
            let lines = transition_lines(params, &field, IntensityModel::Uniform)?;
            Ok(lines.iter().map(|l| l.freq_offset).collect())
        })
        .collect()
}

fn nearest(value: f64, candidates: &[f64]) -> f64 {
    candidates
        .iter()
        .copied()
        .min_by(|a, b| (a - value).abs().total_cmp(&(b - value).abs()))
        .expect("eight lines")
}

/// Fit (lambda, xi) to measured (field, frequency-offset) peaks.
///
/// Needs peaks at two or more distinct fields for both couplings to be
/// identifiable; zero-field data alone constrains only
/// sqrt(lambda^2 + 4 xi^2) and comes back flagged degenerate.
pub fn fit_hamiltonian_params(
    peaks: &[(f64, f64)],
    config: &HamiltonianFitConfig,
) -> Result<FitResult, FitError> {
    if peaks.len() < 2 {
        return Err(FitError::TooFewPoints {
            needed: 2,
            got: peaks.len(),
        });
    }
    config.fixed.validate().map_err(|e| FitError::InvalidInput(e.to_string()))?;

    let mut fields: Vec<f64> = peaks.iter().map(|p| p.0).collect();
    fields.sort_by(f64::total_cmp);
    fields.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let field_index = |b: f64| -> usize {
        fields
            .iter()
            .position(|&f| (f - b).abs() < 1e-9)
            .expect("deduped from the same list")
    };

    let measured: Vec<f64> = peaks.iter().map(|p| p.1).collect();

    let residuals_for = |lambda: f64,
                         xi: f64|
     -> Result<Vec<f64>, FitError> {
        let params = with_couplings(&config.fixed, lambda, xi);
        let sim = simulate(&fields, &params, config)?;
        Ok(peaks
            .iter()
            .map(|&(b, f)| nearest(f, &sim[field_index(b)]) - f)
            .collect())
    };

    // Starting point: scan the (lambda, xi) arc of constant zero-field
    // splitting taken from the data spread.
    let (lambda0, xi0) = match config.initial {
        Some(start) => start,
        None => {
            let zero_field: Vec<f64> = peaks
                .iter()
                .filter(|(b, _)| b.abs() < 1e-9)
                .map(|&(_, f)| f)
                .collect();
            let splitting = if zero_field.len() >= 2 {
                let max = zero_field.iter().cloned().fold(f64::MIN, f64::max);
                let min = zero_field.iter().cloned().fold(f64::MAX, f64::min);
                max - min
            } else {
                let max = measured.iter().cloned().fold(f64::MIN, f64::max);
                let min = measured.iter().cloned().fold(f64::MAX, f64::min);
                max - min
            };
            let splitting = splitting.max(1.0);
            let mut best = (splitting, 0.0);
            let mut best_ssr = f64::INFINITY;
            for j in 0..=40 {
                let xi = 0.999 * splitting / 2.0 * j as f64 / 40.0;
                let lambda = (splitting * splitting - 4.0 * xi * xi).max(0.0).sqrt();
                if let Ok(r) = residuals_for(lambda, xi) {
                    let ssr: f64 = r.iter().map(|v| v * v).sum();
                    if ssr < best_ssr {
                        best_ssr = ssr;
                        best = (lambda, xi);
                    }
                }
            }
            best
        }
    };

    let outcome = least_squares(
        |p| {
            residuals_for(p[0], p[1]).unwrap_or_else(|_| vec![f64::MAX; peaks.len()])
        },
        &[lambda0, xi0],
        &config.lm,
    );

    let lambda = outcome.params[0].abs();
    let xi = outcome.params[1].abs();

    // ambiguity check at the solution: two well-separated measured peaks
    // claiming the same simulated line
    let params = with_couplings(&config.fixed, lambda, xi);
    let sim = simulate(&fields, &params, config)?;
    for (fi, &b) in fields.iter().enumerate() {
        let assigned: Vec<(f64, f64)> = peaks
            .iter()
            .filter(|(pb, _)| (pb - b).abs() < 1e-9)
            .map(|&(_, f)| (f, nearest(f, &sim[fi])))
            .collect();
        for i in 0..assigned.len() {
            for j in (i + 1)..assigned.len() {
                let (fa, la) = assigned[i];
                let (fb, lb) = assigned[j];
                if (fa - fb).abs() > config.ambiguity_tol && (la - lb).abs() < 1e-6 {
                    return Err(FitError::AssignmentAmbiguity {
                        a: fa,
                        b: fb,
                        line: la,
                    });
                }
            }
        }
    }

    let model: Vec<f64> = peaks
        .iter()
        .map(|&(b, f)| nearest(f, &sim[field_index(b)]))
        .collect();
    let ss_res: f64 = measured
        .iter()
        .zip(&model)
        .map(|(m, s)| (m - s) * (m - s))
        .sum();
    let errors = scaled_std_errors(&outcome, peaks.len());

    Ok(FitResult {
        params: vec![
            FitParam {
                name: "lambda_soc_ghz".into(),
                value: lambda,
                std_error: errors[0],
            },
            FitParam {
                name: "xi_ghz".into(),
                value: xi,
                std_error: errors[1],
            },
        ],
        r_squared: r_squared(&measured, &model),
        residual_norm: ss_res.sqrt(),
        converged: outcome.converged,
        degenerate: outcome.degenerate,
        iterations: outcome.iterations,
    })
}
