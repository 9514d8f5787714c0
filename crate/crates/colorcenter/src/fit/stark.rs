//! DC Stark-shift model, field conversion and the quadratic fit extracting
//! the permanent-dipole and polarizability differences.

use super::lm::{least_squares, LmOptions};
use super::{r_squared, scaled_std_errors, FitError, FitParam, FitResult};
use crate::constants::{GHZ_PER_MV_M2_PER_A3, GHZ_PER_MV_M_PER_DEBYE};

/// Stark model: fitted dipole/polarizability differences plus the fixed
/// dielectric environment (relative permittivity and junction thickness).
#[derive(Debug, Clone, PartialEq)]
pub struct StarkModel {
    /// Permanent dipole difference, GHz/(MV/m).
    pub delta_mu: f64,
    /// Polarizability difference, GHz/(MV/m)^2.
    pub delta_alpha: f64,
    /// Relative permittivity of the host (diamond: 5.7).
    pub epsilon_r: f64,
    /// Junction thickness in meters.
    pub junction_thickness_m: f64,
}

impl Default for StarkModel {
    fn default() -> Self {
        Self {
            delta_mu: 0.0,
            delta_alpha: 0.0,
            epsilon_r: 5.7,
            junction_thickness_m: 3.5e-6,
        }
    }
}

impl StarkModel {
    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.epsilon_r > 1.0) {
            return Err(FitError::InvalidInput(format!(
                "epsilon_r must exceed 1, got {}",
                self.epsilon_r
            )));
        }
        if !(self.junction_thickness_m > 0.0) {
            return Err(FitError::InvalidInput(format!(
                "junction thickness must be positive, got {} m",
                self.junction_thickness_m
            )));
        }
        Ok(())
    }
}

/// Internal (local) electric field for a bias voltage, in MV/m.
///
/// The external field is V/d; the Lorentz local-field factor (eps + 2)/3
/// converts it to the field at the defect. The sign of the bias is kept so
/// the linear Stark term stays odd in V.
pub fn local_field(v_bias: f64, model: &StarkModel) -> f64 {
    let f_ext_mv_m = v_bias / model.junction_thickness_m * 1e-6;
    f_ext_mv_m * (model.epsilon_r + 2.0) / 3.0
}

/// Transition-energy shift -delta_mu F - 1/2 delta_alpha F^2 in GHz, F in
/// MV/m.
pub fn stark_shift(f_mv_m: f64, model: &StarkModel) -> f64 {
    -model.delta_mu * f_mv_m - 0.5 * model.delta_alpha * f_mv_m * f_mv_m
}

/// Convert a dipole difference from GHz/(MV/m) to Debye.
pub fn convert_dipole(delta_mu_ghz_per_mv_m: f64) -> f64 {
    delta_mu_ghz_per_mv_m / GHZ_PER_MV_M_PER_DEBYE
}

/// Convert a polarizability difference from GHz/(MV/m)^2 to A^3.
pub fn convert_polarizability(delta_alpha_ghz_per_mv_m2: f64) -> f64 {
    delta_alpha_ghz_per_mv_m2 / GHZ_PER_MV_M2_PER_A3
}

/// Inverse of [`convert_dipole`].
pub fn dipole_to_ghz(delta_mu_debye: f64) -> f64 {
    delta_mu_debye * GHZ_PER_MV_M_PER_DEBYE
}

/// Inverse of [`convert_polarizability`].
pub fn polarizability_to_ghz(delta_alpha_a3: f64) -> f64 {
    delta_alpha_a3 * GHZ_PER_MV_M2_PER_A3
}

/// Re-reference peak frequencies to the scan's reference point (0 V or the
/// lowest revival voltage), giving (voltage, shift) pairs.
pub fn shifts_from_reference(
    points: &[(f64, f64)],
    reference_index: usize,
) -> Result<Vec<(f64, f64)>, FitError> {
    let reference = points
        .get(reference_index)
        .ok_or_else(|| {
            FitError::InvalidInput(format!(
                "reference index {reference_index} out of range for {} points",
                points.len()
            ))
        })?
        .1;
    Ok(points.iter().map(|&(v, f)| (v, f - reference)).collect())
}

/// Weighted least-squares fit of the Stark model to (voltage, shift) data.
///
/// `model` supplies the fixed epsilon_r and thickness; `weights`, when
/// given, are per-point 1/sigma factors applied to the residuals. Designs
/// with fewer than 3 distinct voltages are refused as degenerate.
///
/// Shifts referenced to a nonzero voltage are handled by
/// [`fit_stark_referenced`]; this entry point takes the reference at zero
/// field.
pub fn fit_stark(
    points: &[(f64, f64)],
    model: &StarkModel,
    weights: Option<&[f64]>,
    options: &LmOptions,
) -> Result<(FitResult, StarkModel), FitError> {
    fit_stark_referenced(points, model, weights, None, options)
}

/// [`fit_stark`] with the shift reference at bias `reference_v` instead of
/// zero field: the fitted curve is shift(F(v)) - shift(F(reference_v)), so a
/// scan referenced to its lowest revival voltage stays unbiased.
pub fn fit_stark_referenced(
    points: &[(f64, f64)],
    model: &StarkModel,
    weights: Option<&[f64]>,
    reference_v: Option<f64>,
    options: &LmOptions,
) -> Result<(FitResult, StarkModel), FitError> {
    model.validate()?;
    let n = points.len();
    if n < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: n });
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(FitError::InvalidInput(format!(
                "weights length {} does not match {} points",
                w.len(),
                n
            )));
        }
        if w.iter().any(|&wi| !(wi > 0.0) || !wi.is_finite()) {
            return Err(FitError::InvalidInput(
                "weights must be positive and finite".into(),
            ));
        }
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < 3 {
        return Err(FitError::DegenerateDesign(format!(
            "{} distinct voltages cannot constrain both delta_mu and delta_alpha",
            distinct.len()
        )));
    }

    let fields: Vec<f64> = points.iter().map(|&(v, _)| local_field(v, model)).collect();
    let shifts: Vec<f64> = points.iter().map(|&(_, s)| s).collect();
    let f_ref = reference_v.map(|v| local_field(v, model)).unwrap_or(0.0);

    // ordinary quadratic regression for the starting point:
    // shift = -mu (F - F_ref) - alpha/2 (F^2 - F_ref^2)
    let (mu0, alpha0) = quadratic_regression(&fields, f_ref, &shifts);

    let apply_weight = |i: usize, r: f64| weights.map(|w| w[i] * r).unwrap_or(r);
    let outcome = least_squares(
        |p| {
            let trial = StarkModel {
                delta_mu: p[0],
                delta_alpha: p[1],
                ..model.clone()
            };
            let offset = stark_shift(f_ref, &trial);
            fields
                .iter()
                .zip(&shifts)
                .enumerate()
                .map(|(i, (&f, &s))| apply_weight(i, stark_shift(f, &trial) - offset - s))
                .collect()
        },
        &[mu0, alpha0],
        options,
    );

    let fitted = StarkModel {
        delta_mu: outcome.params[0],
        delta_alpha: outcome.params[1],
        ..model.clone()
    };
    let ref_shift = stark_shift(f_ref, &fitted);
    let model_values: Vec<f64> = fields
        .iter()
        .map(|&f| stark_shift(f, &fitted) - ref_shift)
        .collect();
    let ss_res: f64 = shifts
        .iter()
        .zip(&model_values)
        .map(|(s, m)| (s - m) * (s - m))
        .sum();
    let errors = scaled_std_errors(&outcome, n);

    let result = FitResult {
        params: vec![
            FitParam {
                name: "delta_mu_ghz_per_mvm".into(),
                value: fitted.delta_mu,
                std_error: errors[0],
            },
            FitParam {
                name: "delta_alpha_ghz_per_mvm2".into(),
                value: fitted.delta_alpha,
                std_error: errors[1],
            },
        ],
        r_squared: r_squared(&shifts, &model_values),
        residual_norm: ss_res.sqrt(),
        converged: outcome.converged,
        degenerate: outcome.degenerate,
        iterations: outcome.iterations,
    };
    Ok((result, fitted))
}

/// Least-squares (mu, alpha) for shift = -mu (F - F_ref) - alpha/2
/// (F^2 - F_ref^2) by the normal equations of the two-column design.
fn quadratic_regression(fields: &[f64], f_ref: f64, shifts: &[f64]) -> (f64, f64) {
    // columns: a = -(F - F_ref), b = -(F^2 - F_ref^2)/2
    let mut saa = 0.0;
    let mut sab = 0.0;
    let mut sbb = 0.0;
    let mut say = 0.0;
    let mut sby = 0.0;
    for (&f, &y) in fields.iter().zip(shifts) {
        let a = -(f - f_ref);
        let b = -0.5 * (f * f - f_ref * f_ref);
        saa += a * a;
        sab += a * b;
        sbb += b * b;
        say += a * y;
        sby += b * y;
    }
    let det = saa * sbb - sab * sab;
    if det.abs() < 1e-300 {
        return (0.0, 0.0);
    }
    ((sbb * say - sab * sby) / det, (saa * sby - sab * say) / det)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn local_field_values() {
        let model = StarkModel::default();
        assert_eq!(local_field(0.0, &model), 0.0);
        // V = -8 V, d = 3.5 um, eps = 5.7: |F_ext| = 2.286, |F| = 5.867 MV/m
        let f = local_field(-8.0, &model);
        assert_close(f.abs(), 5.867, 1e-3);
        assert!(f < 0.0, "sign of the bias is preserved");
        let f_ext = f * 3.0 / (model.epsilon_r + 2.0);
        assert_close(f_ext.abs(), 2.286, 1e-3);

        // vacuum limit: (eps + 2)/3 -> 1
        let vacuum = StarkModel {
            epsilon_r: 1.0 + 1e-12,
            ..StarkModel::default()
        };
        let f = local_field(-8.0, &vacuum);
        assert_close(f.abs(), 8.0 / 3.5, 1e-6);
    }

    #[test]
    fn stark_shift_values() {
        let model = StarkModel {
            delta_mu: 0.0,
            delta_alpha: -2.1e-4,
            ..StarkModel::default()
        };
        assert_eq!(stark_shift(0.0, &model), 0.0);
        assert_close(stark_shift(5.867, &model), 3.61e-3, 2e-5);

        // sign convention: positive dipole, positive field -> red shift
        let dipole = StarkModel {
            delta_mu: 1.0,
            delta_alpha: 0.0,
            ..StarkModel::default()
        };
        assert!(stark_shift(2.0, &dipole) < 0.0);
    }

    #[test]
    fn unit_conversions() {
        assert_close(convert_dipole(6.9e-4), 1.37e-4, 2e-6);
        assert_close(convert_polarizability(2.1e-4), 2.50, 5e-3);
        assert_eq!(convert_dipole(0.0), 0.0);
        assert_eq!(convert_polarizability(0.0), 0.0);
        // linearity / inverse pair
        assert_close(dipole_to_ghz(convert_dipole(1.23e-3)), 1.23e-3, 1e-15);
        assert_close(
            polarizability_to_ghz(convert_polarizability(4.56e-4)),
            4.56e-4,
            1e-15,
        );
    }

    #[test]
    fn exact_recovery_from_noiseless_scan() {
        let truth = StarkModel {
            delta_mu: -1.9e-4,
            delta_alpha: 1.6e-4,
            ..StarkModel::default()
        };
        let points: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let v = -4.0 - i as f64;
                (v, stark_shift(local_field(v, &truth), &truth))
            })
            .collect();
        let (fit, model) =
            fit_stark(&points, &StarkModel::default(), None, &LmOptions::default()).unwrap();
        assert!(fit.converged);
        assert_close(model.delta_mu, truth.delta_mu, 1e-9 * truth.delta_mu.abs());
        assert_close(
            model.delta_alpha,
            truth.delta_alpha,
            1e-9 * truth.delta_alpha.abs(),
        );
        assert!(fit.r_squared > 0.999_999_9);
    }

    #[test]
    fn voltage_sign_flip_flips_delta_mu() {
        let truth = StarkModel {
            delta_mu: 5.0e-4,
            delta_alpha: 2.0e-4,
            ..StarkModel::default()
        };
        let points: Vec<(f64, f64)> = (1..=10)
            .map(|i| {
                let v = -1.2 * i as f64;
                (v, stark_shift(local_field(v, &truth), &truth))
            })
            .collect();
        let flipped: Vec<(f64, f64)> = points.iter().map(|&(v, s)| (-v, s)).collect();
        let (_, m1) =
            fit_stark(&points, &StarkModel::default(), None, &LmOptions::default()).unwrap();
        let (_, m2) =
            fit_stark(&flipped, &StarkModel::default(), None, &LmOptions::default()).unwrap();
        assert_close(m1.delta_mu, -m2.delta_mu, 1e-12);
        assert_close(m1.delta_alpha, m2.delta_alpha, 1e-12);
    }

    #[test]
    fn quadratic_dominated_scan_gives_mu_consistent_with_zero() {
        // inversion-symmetric defect: vanishing static dipole moment
        let truth = StarkModel {
            delta_mu: 0.0,
            delta_alpha: 1.8e-4,
            ..StarkModel::default()
        };
        let mut state = 0x12345u64;
        let mut next = move || {
            // xorshift, uniform in [-1, 1]
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let points: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let v = -4.0 - i as f64;
                let s = stark_shift(local_field(v, &truth), &truth);
                (v, s + 1e-5 * next())
            })
            .collect();
        let (fit, model) =
            fit_stark(&points, &StarkModel::default(), None, &LmOptions::default()).unwrap();
        let mu_err = fit.std_error("delta_mu_ghz_per_mvm").unwrap();
        assert!(
            model.delta_mu.abs() <= 3.0 * mu_err,
            "delta_mu = {} should be consistent with 0 (err {mu_err})",
            model.delta_mu
        );
    }

    #[test]
    fn nonzero_reference_stays_unbiased() {
        // shifts referenced to the lowest revival voltage, not to 0 V
        let truth = StarkModel {
            delta_mu: -9.4e-4,
            delta_alpha: 1.58e-4,
            ..StarkModel::default()
        };
        let v_ref = -5.0;
        let e_ref = stark_shift(local_field(v_ref, &truth), &truth);
        let points: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let v = -5.0 - i as f64;
                (v, stark_shift(local_field(v, &truth), &truth) - e_ref)
            })
            .collect();
        let (fit, model) = fit_stark_referenced(
            &points,
            &StarkModel::default(),
            None,
            Some(v_ref),
            &LmOptions::default(),
        )
        .unwrap();
        assert!(fit.converged);
        assert_close(model.delta_mu, truth.delta_mu, 1e-8 * truth.delta_mu.abs());
        assert_close(
            model.delta_alpha,
            truth.delta_alpha,
            1e-8 * truth.delta_alpha.abs(),
        );
    }

    #[test]
    fn degenerate_designs_are_refused() {
        let p2 = [(0.0, 0.0), (-1.0, 0.1)];
        assert!(matches!(
            fit_stark(&p2, &StarkModel::default(), None, &LmOptions::default()),
            Err(FitError::TooFewPoints { .. })
        ));
        let repeated = [(-1.0, 0.1), (-1.0, 0.11), (-1.0, 0.09), (-2.0, 0.2)];
        assert!(matches!(
            fit_stark(&repeated, &StarkModel::default(), None, &LmOptions::default()),
            Err(FitError::DegenerateDesign(_))
        ));
    }

    #[test]
    fn reference_subtraction() {
        let points = [(0.0, 100.0), (-5.0, 100.2), (-10.0, 100.9)];
        let shifts = shifts_from_reference(&points, 0).unwrap();
        assert_eq!(shifts[0], (0.0, 0.0));
        assert_close(shifts[2].1, 0.9, 1e-12);
        assert!(shifts_from_reference(&points, 7).is_err());
    }
}
