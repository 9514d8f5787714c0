//! Single- and bi-exponential decay fits for charge-state lifetime traces.

use super::lm::{least_squares, LmOptions};
use super::{r_squared, scaled_std_errors, FitError, FitParam, FitResult};

/// Fitted decay: one or two exponential components over a constant baseline.
/// For two components the convention is tau_1 < tau_2.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayModel {
    /// (amplitude, time constant) per component, sorted by time constant.
    pub components: Vec<(f64, f64)>,
    pub baseline: f64,
}

impl DecayModel {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.baseline
            + self
                .components
                .iter()
                .map(|(a, tau)| a * (-t / tau).exp())
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Default)]
pub struct DecayFitOptions {
    /// Restrict the fit to `t` within this window (e.g. to skip an initial
    /// plateau before the decay sets in).
    pub window: Option<(f64, f64)>,
    pub lm: LmOptions,
}

/// Fit `n_components` (1 or 2) exponentials plus baseline to a decay trace.
///
/// Time constants are seeded from log-linear regression on the tail and the
/// result is reported with ascending time constants. A trace with no decay
/// content comes back flagged non-converged rather than as an error.
pub fn fit_decay(
    time: &[f64],
    counts: &[f64],
    n_components: usize,
    options: &DecayFitOptions,
) -> Result<(FitResult, DecayModel), FitError> {
    if n_components != 1 && n_components != 2 {
        return Err(FitError::BadComponentCount(n_components));
    }
    if time.len() != counts.len() {
        return Err(FitError::InvalidInput(format!(
            "time ({}) and counts ({}) lengths differ",
            time.len(),
            counts.len()
        )));
    }
    if time.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FitError::InvalidInput(
            "time samples must be strictly ascending".into(),
        ));
    }
    if counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
        return Err(FitError::InvalidInput(
            "counts must be finite and nonnegative".into(),
        ));
    }

    let (t, y): (Vec<f64>, Vec<f64>) = match options.window {
        Some((lo, hi)) => time
            .iter()
            .zip(counts)
            .filter(|(&ti, _)| ti >= lo && ti <= hi)
            .map(|(&ti, &yi)| (ti, yi))
            .unzip(),
        None => (time.to_vec(), counts.to_vec()),
    };
    let needed = 2 * n_components + 2;
    if t.len() < needed {
        return Err(FitError::TooFewPoints {
            needed,
            got: t.len(),
        });
    }

    let initial = initial_guess(&t, &y, n_components);
    let outcome = least_squares(
        |p| {
            t.iter()
                .zip(&y)
                .map(|(&ti, &yi)| evaluate_params(p, n_components, ti) - yi)
                .collect()
        },
        &initial,
        &options.lm,
    );

    // sort components by time constant, carrying the errors along
    let errors = scaled_std_errors(&outcome, t.len());
    let mut comps: Vec<(f64, f64, f64, f64)> = (0..n_components)
        .map(|c| {
            (
                outcome.params[2 * c].abs(),
                outcome.params[2 * c + 1].abs(),
                errors[2 * c],
                errors[2 * c + 1],
            )
        })
        .collect();
    comps.sort_by(|a, b| a.1.total_cmp(&b.1));
    let baseline = outcome.params[2 * n_components];

    let model = DecayModel {
        components: comps.iter().map(|&(a, tau, _, _)| (a, tau)).collect(),
        baseline,
    };
    let model_values: Vec<f64> = t.iter().map(|&ti| model.evaluate(ti)).collect();
    let ss_res: f64 = y
        .iter()
        .zip(&model_values)
        .map(|(yi, mi)| (yi - mi) * (yi - mi))
        .sum();

    let mut params = Vec::new();
    for (i, &(a, tau, aerr, tauerr)) in comps.iter().enumerate() {
        let suffix = if n_components == 1 {
            String::new()
        } else {
            format!("_{}", i + 1)
        };
        params.push(FitParam {
            name: format!("amplitude{suffix}"),
            value: a,
            std_error: aerr,
        });
        params.push(FitParam {
            name: format!("tau{suffix}"),
            value: tau,
            std_error: tauerr,
        });
    }
    params.push(FitParam {
        name: "baseline".into(),
        value: baseline,
        std_error: errors[2 * n_components],
    });

    Ok((
        FitResult {
            params,
            r_squared: r_squared(&y, &model_values),
            residual_norm: ss_res.sqrt(),
            converged: outcome.converged,
            degenerate: outcome.degenerate,
            iterations: outcome.iterations,
        },
        model,
    ))
}

fn evaluate_params(p: &[f64], n_components: usize, t: f64) -> f64 {
    let mut v = p[2 * n_components];
    for c in 0..n_components {
        let tau = p[2 * c + 1].abs().max(f64::MIN_POSITIVE);
        v += p[2 * c] * (-t / tau).exp();
    }
    v
}

/// Data-driven starting point: baseline from the trace tail, the slowest
/// time constant from log-linear regression on the tail, and for two
/// components the fast constant by peeling: subtract the extrapolated slow
/// exponential and regress the early-time residual.
fn initial_guess(t: &[f64], y: &[f64], n_components: usize) -> Vec<f64> {
    let n = t.len();
    let tail_start = n - (n / 10).max(2);
    let baseline: f64 = y[tail_start..].iter().sum::<f64>() / (n - tail_start) as f64;
    let span = t[n - 1] - t[0];

    let slow = log_linear_fit(&t[n / 2..], &y[n / 2..], baseline);
    let (amp_slow, tau_slow) = slow.unwrap_or(((y[0] - baseline).abs(), span / 3.0));
    let amp = (y[0] - baseline).max(f64::MIN_POSITIVE);

    match n_components {
        1 => vec![amp, tau_slow, baseline],
        _ => {
            // fast component left after removing baseline and the
            // extrapolated slow exponential
            let peeled: Vec<f64> = t
                .iter()
                .zip(y)
                .map(|(&ti, &yi)| yi - baseline - amp_slow * (-ti / tau_slow).exp())
                .collect();
            let peak = peeled.iter().cloned().fold(f64::MIN, f64::max);
            // regress only over the residual's own decay range
            let cut = peeled
                .iter()
                .position(|&p| p < 0.02 * peak)
                .unwrap_or(n / 4)
                .clamp(4, n);
            let (amp_fast, tau_fast) = match log_linear_fit(&t[..cut], &peeled[..cut], 0.0) {
                Some((a, tau)) if tau < tau_slow => (a, tau),
                _ => (0.7 * amp, tau_slow / 10.0),
            };
            vec![
                amp_fast.max(f64::MIN_POSITIVE),
                tau_fast,
                amp_slow.max(f64::MIN_POSITIVE),
                tau_slow,
                baseline,
            ]
        }
    }
}

/// Regress ln(y - baseline) on t; returns (amplitude at t = 0, time
/// constant) when the data decays.
fn log_linear_fit(t: &[f64], y: &[f64], baseline: f64) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(_, &yi)| yi - baseline > 0.0)
        .map(|(&ti, &yi)| (ti, (yi - baseline).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    if slope < 0.0 {
        let intercept = my - slope * mx;
        Some((intercept.exp(), -1.0 / slope))
    } else {
        None
    }
}
