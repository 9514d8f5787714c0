//! Lorentzian peak fitting for PLE linewidth extraction.

use super::lm::{least_squares, LmOptions};
use super::{r_squared, scaled_std_errors, FitError, FitParam, FitResult};
use crate::metrics::SpectrumTrace;

/// Lorentzian with peak height `amplitude` above `offset`.
pub fn lorentzian_value(x: f64, center: f64, fwhm: f64, amplitude: f64, offset: f64) -> f64 {
    let half = fwhm / 2.0;
    offset + amplitude * half * half / ((x - center) * (x - center) + half * half)
}

/// Fit center, fwhm, amplitude and offset to a sampled peak.
///
/// Initial guesses are data-driven: center at the sample maximum, fwhm at
/// half the x span. When the peak is much narrower than the scan that start
/// can roll into the no-peak local minimum, so a second start with the fwhm
/// taken from the half-maximum crossings is tried before giving up. Fails
/// with `NoPeak` when the fitted amplitude does not clear three times the
/// residual rms.
pub fn fit_lorentzian(trace: &SpectrumTrace, options: &LmOptions) -> Result<FitResult, FitError> {
    let n = trace.len();
    if n < 5 {
        return Err(FitError::TooFewPoints { needed: 5, got: n });
    }
    let x = &trace.x;
    let y = &trace.y;

    let (argmax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let ymin = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = x[n - 1] - x[0];
    let amplitude0 = (ymax - ymin).max(f64::MIN_POSITIVE);

    let run = |fwhm0: f64| {
        least_squares(
            |p| {
                x.iter()
                    .zip(y)
                    .map(|(&xi, &yi)| lorentzian_value(xi, p[0], p[1].abs(), p[2], p[3]) - yi)
                    .collect()
            },
            &[x[argmax], fwhm0, amplitude0, ymin],
            options,
        )
    };

    let mut outcome = run(span / 2.0);
    if outcome.params[2] <= 0.0 || !outcome.converged {
        let retry = run(half_max_width(x, y, argmax, ymin));
        if retry.chi_square < outcome.chi_square {
            outcome = retry;
        }
    }

    let center = outcome.params[0];
    let fwhm = outcome.params[1].abs();
    let amplitude = outcome.params[2];
    let offset = outcome.params[3];

    let model: Vec<f64> = x
        .iter()
        .map(|&xi| lorentzian_value(xi, center, fwhm, amplitude, offset))
        .collect();
    let ss_res: f64 = y
        .iter()
        .zip(&model)
        .map(|(yi, mi)| (yi - mi) * (yi - mi))
        .sum();
    let noise_rms = (ss_res / n as f64).sqrt();
    let scale = ymax.abs().max(ymin.abs()).max(f64::MIN_POSITIVE);
    if amplitude < 3.0 * noise_rms || amplitude <= 1e-12 * scale {
        return Err(FitError::NoPeak {
            amplitude,
            noise: noise_rms,
        });
    }

    let errors = scaled_std_errors(&outcome, n);
    let names = ["center", "fwhm", "amplitude", "offset"];
    let values = [center, fwhm, amplitude, offset];
    Ok(FitResult {
        params: names
            .iter()
            .zip(values)
            .zip(&errors)
            .map(|((name, value), &std_error)| FitParam {
                name: (*name).into(),
                value,
                std_error,
            })
            .collect(),
        r_squared: r_squared(y, &model),
        residual_norm: ss_res.sqrt(),
        converged: outcome.converged,
        degenerate: outcome.degenerate,
        iterations: outcome.iterations,
    })
}

/// Width between the half-maximum crossings around the sample maximum,
/// clamped to at least one grid step.
fn half_max_width(x: &[f64], y: &[f64], argmax: usize, floor: f64) -> f64 {
    let half = floor + (y[argmax] - floor) / 2.0;
    let mut left = argmax;
    while left > 0 && y[left] > half {
        left -= 1;
    }
    let mut right = argmax;
    while right + 1 < y.len() && y[right] > half {
        right += 1;
    }
    let step = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    (x[right] - x[left]).max(step)
}
