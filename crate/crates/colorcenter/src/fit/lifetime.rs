//! Excited-state lifetime from TCSPC histograms by forward convolution of an
//! exponential decay with a Gaussian instrument response.
//!
//! Fitting the convolved model is robust to noise, unlike spectral division;
//! the IRF width is a fixed input by default and can be freed with a flag.

use super::lm::{least_squares, LmOptions};
use super::{r_squared, scaled_std_errors, FitError, FitParam, FitResult};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Gaussian sigma for a given FWHM.
pub fn sigma_from_fwhm(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// Scaled complementary error function exp(x^2) erfc(x) for x >= 0.
fn erfcx(x: f64) -> f64 {
    if x < 25.0 {
        (x * x).exp() * libm::erfc(x)
    } else {
        // asymptotic series; relative error < 1e-8 here
        let ix2 = 1.0 / (x * x);
        (1.0 - 0.5 * ix2 + 0.75 * ix2 * ix2) / (x * std::f64::consts::PI.sqrt())
    }
}

/// Exponential decay exp(-(t - t0)/tau), amplitude `amplitude`, convolved
/// with a Gaussian IRF of standard deviation `irf_sigma`, over `baseline`.
///
/// `irf_sigma = 0` reduces exactly to the step exponential.
pub fn convolved_decay(
    t: f64,
    tau: f64,
    amplitude: f64,
    t0: f64,
    irf_sigma: f64,
    baseline: f64,
) -> f64 {
    if irf_sigma <= 0.0 {
        let dt = t - t0;
        return baseline
            + if dt >= 0.0 {
                amplitude * (-dt / tau).exp()
            } else {
                0.0
            };
    }
    let k = irf_sigma / tau;
    let z = (t - t0) / irf_sigma;
    let u = (k - z) / SQRT_2;
    let value = if u >= 0.0 {
        // pre-peak side: exp(k^2/2 - k z) erfc(u) = erfcx(u) exp(-z^2/2)
        erfcx(u) * (-0.5 * z * z).exp()
    } else {
        (0.5 * k * k - k * z).exp() * libm::erfc(u)
    };
    baseline + 0.5 * amplitude * value
}

#[derive(Debug, Clone, Default)]
pub struct LifetimeFitOptions {
    /// Also fit the IRF width instead of holding it fixed.
    pub fit_irf: bool,
    pub lm: LmOptions,
}

/// Fit (tau, amplitude, t0, baseline) to a TCSPC histogram given the IRF
/// FWHM in the same time unit as the histogram (ns).
pub fn fit_lifetime_irf(
    time_ns: &[f64],
    counts: &[f64],
    irf_fwhm_ns: f64,
    options: &LifetimeFitOptions,
) -> Result<(FitResult, f64), FitError> {
    let n = time_ns.len();
    if n < 8 {
        return Err(FitError::TooFewPoints { needed: 8, got: n });
    }
    if time_ns.len() != counts.len() {
        return Err(FitError::InvalidInput(format!(
            "time ({}) and counts ({}) lengths differ",
            time_ns.len(),
            counts.len()
        )));
    }
    if time_ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FitError::InvalidInput(
            "time samples must be strictly ascending".into(),
        ));
    }
    if !(irf_fwhm_ns >= 0.0) {
        return Err(FitError::InvalidInput(format!(
            "IRF FWHM must be nonnegative, got {irf_fwhm_ns}"
        )));
    }
    let bin = (time_ns[n - 1] - time_ns[0]) / (n - 1) as f64;
    if irf_fwhm_ns > 0.0 && bin >= irf_fwhm_ns {
        return Err(FitError::InvalidInput(format!(
            "bin width {bin:.3} ns does not resolve the IRF FWHM {irf_fwhm_ns:.3} ns"
        )));
    }

    let sigma0 = sigma_from_fwhm(irf_fwhm_ns);
    let (argmax, &ymax) = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let pre = (n / 50).max(3).min(argmax.max(1));
    let baseline0 = counts[..pre].iter().sum::<f64>() / pre as f64;
    let tau0 = tail_tau(time_ns, counts, baseline0).unwrap_or((time_ns[n - 1] - time_ns[0]) / 5.0);
    let initial_common = [tau0, (ymax - baseline0).max(f64::MIN_POSITIVE), time_ns[argmax], baseline0];

    let model_of = |p: &[f64], sigma_fixed: f64, t: f64| {
        let sigma = if p.len() == 5 { p[4].abs() } else { sigma_fixed };
        convolved_decay(t, p[0].abs().max(f64::MIN_POSITIVE), p[1], p[2], sigma, p[3])
    };

    let initial: Vec<f64> = if options.fit_irf {
        initial_common
            .iter()
            .copied()
            .chain([sigma0.max(bin / 2.0)])
            .collect()
    } else {
        initial_common.to_vec()
    };

    let outcome = least_squares(
        |p| {
            time_ns
                .iter()
                .zip(counts)
                .map(|(&t, &y)| model_of(p, sigma0, t) - y)
                .collect()
        },
        &initial,
        &options.lm,
    );

    let tau = outcome.params[0].abs();
    if tau < bin {
        return Err(FitError::TauNotIdentifiable { tau, bin });
    }
    let sigma = if options.fit_irf {
        outcome.params[4].abs()
    } else {
        sigma0
    };

    let model_values: Vec<f64> = time_ns
        .iter()
        .map(|&t| model_of(&outcome.params, sigma0, t))
        .collect();
    let ss_res: f64 = counts
        .iter()
        .zip(&model_values)
        .map(|(y, m)| (y - m) * (y - m))
        .sum();
    let errors = scaled_std_errors(&outcome, n);

    let mut params = vec![
        FitParam {
            name: "tau_ns".into(),
            value: tau,
            std_error: errors[0],
        },
        FitParam {
            name: "amplitude".into(),
            value: outcome.params[1],
            std_error: errors[1],
        },
        FitParam {
            name: "t0_ns".into(),
            value: outcome.params[2],
            std_error: errors[2],
        },
        FitParam {
            name: "baseline".into(),
            value: outcome.params[3],
            std_error: errors[3],
        },
    ];
    if options.fit_irf {
        params.push(FitParam {
            name: "irf_sigma_ns".into(),
            value: sigma,
            std_error: errors[4],
        });
    }

    Ok((
        FitResult {
            params,
            r_squared: r_squared(counts, &model_values),
            residual_norm: ss_res.sqrt(),
            converged: outcome.converged,
            degenerate: outcome.degenerate,
            iterations: outcome.iterations,
        },
        sigma,
    ))
}

fn tail_tau(t: &[f64], y: &[f64], baseline: f64) -> Option<f64> {
    let n = t.len();
    let (argmax, _) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let start = argmax + (n - argmax) / 10;
    let pts: Vec<(f64, f64)> = t[start..]
        .iter()
        .zip(&y[start..])
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
    (slope < 0.0).then(|| -1.0 / slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn histogram(tau: f64, fwhm: f64, t0: f64, peak: f64) -> (Vec<f64>, Vec<f64>) {
        let sigma = sigma_from_fwhm(fwhm);
        let t: Vec<f64> = (0..1600).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&ti| convolved_decay(ti, tau, peak, t0, sigma, 20.0))
            .collect();
        (t, y)
    }

    #[test]
    fn model_reduces_to_exponential_without_irf() {
        for &t in &[0.0, 1.0, 5.0, 20.0] {
            let with_zero = convolved_decay(t, 10.43, 1.0, 2.0, 0.0, 0.0);
            let tiny = convolved_decay(t, 10.43, 1.0, 2.0, 1e-9, 0.0);
            assert_close(with_zero, tiny, 1e-9);
        }
    }

    #[test]
    fn closed_form_matches_brute_force_convolution() {
        // independent oracle: trapezoid quadrature of
        // f(t) = int_{t0}^{inf} exp(-(u - t0)/tau) g(t - u) du
        // with a normalized Gaussian kernel g; the integrand is smooth on
        // [t0, inf) so the quadrature converges cleanly
        let (tau, t0, sigma) = (10.43, 5.0, 0.2251);
        let norm = sigma * (2.0 * std::f64::consts::PI).sqrt();
        for &t in &[3.0, 4.5, 5.0, 5.5, 7.0, 20.0, 60.0] {
            let upper = t + 10.0 * sigma;
            let n = 200_000;
            let du = (upper - t0) / n as f64;
            let integrand = |u: f64| {
                (-(u - t0) / tau).exp() * (-((t - u) / sigma).powi(2) / 2.0).exp() / norm
            };
            let mut brute = (integrand(t0) + integrand(upper)) / 2.0;
            for i in 1..n {
                brute += integrand(t0 + i as f64 * du);
            }
            brute *= du;
            let closed = convolved_decay(t, tau, 1.0, t0, sigma, 0.0);
            assert!(
                (closed - brute).abs() < 1e-7 * (1.0 + brute.abs()),
                "t = {t}: closed {closed} vs brute {brute}"
            );
        }
    }

    #[test]
    fn model_is_smooth_and_finite_everywhere() {
        for i in -200..400 {
            let t = i as f64 * 0.25;
            let v = convolved_decay(t, 10.43, 1e4, 5.0, 0.225, 0.0);
            assert!(v.is_finite() && v >= 0.0, "t={t}: {v}");
        }
    }

    #[test]
    fn noiseless_recovery() {
        let (t, y) = histogram(10.43, 0.53, 5.0, 1e4);
        let (fit, _) =
            fit_lifetime_irf(&t, &y, 0.53, &LifetimeFitOptions::default()).unwrap();
        assert!(fit.converged);
        let tau = fit.value("tau_ns").unwrap();
        assert!((tau - 10.43).abs() / 10.43 < 0.005, "tau = {tau}");
        assert_close(fit.value("t0_ns").unwrap(), 5.0, 1e-4);
        assert_close(fit.value("baseline").unwrap(), 20.0, 1e-4);
    }

    #[test]
    fn fit_irf_recovers_width() {
        let (t, y) = histogram(10.43, 0.53, 5.0, 1e4);
        let options = LifetimeFitOptions {
            fit_irf: true,
            ..Default::default()
        };
        let (fit, sigma) = fit_lifetime_irf(&t, &y, 0.4, &options).unwrap();
        assert!(fit.converged);
        assert_close(sigma, sigma_from_fwhm(0.53), 1e-4);
    }

    #[test]
    fn zero_irf_reduces_to_pure_exponential_fit() {
        // with no IRF the model is the step exponential; amplitude and t0
        // then only enter through A exp(t0/tau), so that pair is flagged
        // degenerate while tau stays identified
        let t: Vec<f64> = (0..800).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&ti| convolved_decay(ti, 10.43, 5000.0, 5.0, 0.0, 12.0))
            .collect();
        let (fit, sigma) =
            fit_lifetime_irf(&t, &y, 0.0, &LifetimeFitOptions::default()).unwrap();
        assert_eq!(sigma, 0.0);
        let tau = fit.value("tau_ns").unwrap();
        assert_close(tau, 10.43, 1e-3);
        let scaled_amp =
            fit.value("amplitude").unwrap() * (fit.value("t0_ns").unwrap() / tau).exp();
        assert_close(scaled_amp, 5000.0 * (5.0f64 / 10.43).exp(), 1.0);
        assert!(fit.degenerate);
    }

    #[test]
    fn preconditions() {
        let (t, y) = histogram(10.43, 0.53, 5.0, 1e4);
        // bin width 0.05 ns >= claimed IRF fwhm 0.04 ns
        assert!(matches!(
            fit_lifetime_irf(&t, &y, 0.04, &LifetimeFitOptions::default()),
            Err(FitError::InvalidInput(_))
        ));
        assert!(fit_lifetime_irf(&t[..4], &y[..4], 0.53, &LifetimeFitOptions::default()).is_err());
    }

    #[test]
    fn sub_bin_tau_not_identifiable() {
        // decay much faster than the bin width
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&ti| convolved_decay(ti, 0.01, 1000.0, 10.0, sigma_from_fwhm(2.0), 1.0))
            .collect();
        match fit_lifetime_irf(&t, &y, 2.0, &LifetimeFitOptions::default()) {
            Err(FitError::TauNotIdentifiable { .. }) => {}
            other => panic!("expected TauNotIdentifiable, got {other:?}"),
        }
    }
}
