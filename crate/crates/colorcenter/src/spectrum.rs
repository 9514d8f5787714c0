//! Optical transition lines, magnetic-field sweeps and broadened spectra.
//!
//! Eigen-systems of the ground (4x4) and excited (2x2) manifolds are turned
//! into the eight emission lines, referenced to the centroid of the two
//! zero-field lines. Field sweeps reproduce the measured frequency-vs-field
//! maps.

use num_complex::Complex64;
use thiserror::Error;

use crate::defect::{assemble_excited, assemble_ground, DefectError, DefectParameters, FieldConfig};
use crate::linalg::{eigensolve, LinalgError};
use crate::metrics::{MetricsError, SpectrumTrace, XKind};

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("vector must be nonzero")]
    ZeroVector,
    #[error("field magnitudes must be non-empty and ascending")]
    BadFieldValues,
    #[error("frequency grid must be ascending with at least 2 samples")]
    BadGrid,
    #[error("line profile fwhm must be positive, got {0}")]
    BadFwhm(f64),
    #[error(transparent)]
    Defect(#[from] DefectError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// How relative line intensities are assigned.
///
/// The orbital-singlet excited state fixes no dipole matrix elements, so two
/// conventions are offered: `Uniform` gives every line unit weight;
/// `SpinOverlap` weighs a line by the spin overlap between the excited
/// spinor and each orbital component of the ground eigenvector, which
/// suppresses spin-flip lines when the field is aligned with the axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntensityModel {
    Uniform,
    #[default]
    SpinOverlap,
}

/// One optical emission line.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLine {
    /// Frequency offset from the zero-field ZPL centroid, GHz.
    pub freq_offset: f64,
    /// Relative intensity, normalized so the brightest line is 1.
    pub intensity: f64,
    /// Index into the ascending ground-state eigenvalues (0..4).
    pub ground_index: usize,
    /// Index into the ascending excited-state eigenvalues (0..2).
    pub excited_index: usize,
}

/// Lines evaluated across a set of field magnitudes at fixed geometry.
#[derive(Debug, Clone)]
pub struct FieldSweep {
    pub b_values: Vec<f64>,
    pub angle_to_axis_deg: f64,
    pub lines_per_field: Vec<Vec<TransitionLine>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineShape {
    Lorentzian,
    Gaussian,
}

/// Unit-height line profile of a given FWHM (same unit as the grid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineProfile {
    pub shape: LineShape,
    pub fwhm: f64,
}

impl LineProfile {
    pub fn new(shape: LineShape, fwhm: f64) -> Result<Self, SpectrumError> {
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(SpectrumError::BadFwhm(fwhm));
        }
        Ok(Self { shape, fwhm })
    }

    /// Profile value at distance `dx` from the center (height 1 at dx = 0).
    pub fn evaluate(&self, dx: f64) -> f64 {
        let half = self.fwhm / 2.0;
        match self.shape {
            LineShape::Lorentzian => half * half / (dx * dx + half * half),
            LineShape::Gaussian => (-std::f64::consts::LN_2 * (dx / half) * (dx / half)).exp(),
        }
    }

    /// Integral of the unit-height profile over the whole axis.
    pub fn area(&self) -> f64 {
        match self.shape {
            LineShape::Lorentzian => std::f64::consts::PI * self.fwhm / 2.0,
            LineShape::Gaussian => {
                // sigma sqrt(2 pi) with sigma = fwhm / (2 sqrt(2 ln 2))
                let sigma = self.fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
                sigma * (2.0 * std::f64::consts::PI).sqrt()
            }
        }
    }
}

/// Angle between a field direction and the defect axis, in degrees
/// ([0, 180]).
pub fn orientation_angle(field_dir: [f64; 3], axis: [f64; 3]) -> Result<f64, SpectrumError> {
    let nf = (field_dir.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let na = (axis.iter().map(|v| v * v).sum::<f64>()).sqrt();
    if !(nf > 0.0) || !(na > 0.0) {
        return Err(SpectrumError::ZeroVector);
    }
    let dot: f64 = field_dir.iter().zip(&axis).map(|(a, b)| a * b).sum();
    Ok((dot / (nf * na)).clamp(-1.0, 1.0).acos().to_degrees())
}

/// Centroid of the two distinct zero-field line positions for these
/// parameters; defines the 0 GHz reference of all frequency offsets.
fn zero_field_centroid(params: &DefectParameters, axis: [f64; 3]) -> Result<f64, SpectrumError> {
    let field = FieldConfig::new([0.0, 0.0, 0.0], axis)?;
    let ground = eigensolve(&assemble_ground(params, &field))?;
    let excited = eigensolve(&assemble_excited(params, &field))?;
    let e_exc = (excited.values[0] + excited.values[1]) / 2.0;
    // two doubly-degenerate ground levels: centroid of the two line positions
    let low = (ground.values[0] + ground.values[1]) / 2.0;
    let high = (ground.values[2] + ground.values[3]) / 2.0;
    Ok(e_exc - (low + high) / 2.0)
}

fn spin_overlap_intensity(excited: &[Complex64], ground: &[Complex64]) -> f64 {
    // sum over orbital components of |<excited spinor | ground spinor>|^2
    let mut total = 0.0;
    for orbital in [0usize, 2] {
        let dot: Complex64 = excited[0].conj() * ground[orbital]
            + excited[1].conj() * ground[orbital + 1];
        total += dot.norm_sqr();
    }
    total
}

/// The eight emission lines (2 excited x 4 ground) for one field
/// configuration, ordered by excited index then ground index.
pub fn transition_lines(
    params: &DefectParameters,
    field: &FieldConfig,
    model: IntensityModel,
) -> Result<Vec<TransitionLine>, SpectrumError> {
    let centroid = zero_field_centroid(params, field.axis())?;
    let ground = eigensolve(&assemble_ground(params, field))?;
    let excited = eigensolve(&assemble_excited(params, field))?;

    let mut lines = Vec::with_capacity(8);
    for (e, e_val) in excited.values.iter().enumerate() {
        for (g, g_val) in ground.values.iter().enumerate() {
            let raw = match model {
                IntensityModel::Uniform => 1.0,
                IntensityModel::SpinOverlap => {
                    spin_overlap_intensity(&excited.vectors[e], &ground.vectors[g])
                }
            };
            lines.push(TransitionLine {
                freq_offset: e_val - g_val - centroid,
                intensity: raw,
                ground_index: g,
                excited_index: e,
            });
        }
    }
    let max = lines
        .iter()
        .map(|l| l.intensity)
        .fold(f64::MIN, f64::max)
        .max(1e-300);
    for line in &mut lines {
        line.intensity /= max;
    }
    Ok(lines)
}

/// Evaluate [`transition_lines`] at each field magnitude along a fixed
/// direction.
pub fn field_sweep(
    params: &DefectParameters,
    axis: [f64; 3],
    field_dir: [f64; 3],
    b_values: &[f64],
    model: IntensityModel,
) -> Result<FieldSweep, SpectrumError> {
    if b_values.is_empty() || b_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(SpectrumError::BadFieldValues);
    }
    let angle = orientation_angle(field_dir, axis)?;
    let lines_per_field = b_values
        .iter()
        .map(|&b| {
            let field = FieldConfig::from_direction(b, field_dir, axis)?;
            transition_lines(params, &field, model)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FieldSweep {
        b_values: b_values.to_vec(),
        angle_to_axis_deg: angle,
        lines_per_field,
    })
}

/// The four <111> axis directions of the diamond lattice.
pub const AXES_111: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Sweeps for all four <111> orientation families at equal weight.
///
/// `merged_lines(i)` concatenates the four families at field index `i` with
/// intensities scaled by 1/4, matching an unpolarized ensemble average.
#[derive(Debug, Clone)]
pub struct EnsembleSweep {
    pub sweeps: Vec<FieldSweep>,
}

impl EnsembleSweep {
    pub fn merged_lines(&self, field_index: usize) -> Vec<TransitionLine> {
        let mut merged = Vec::with_capacity(32);
        for sweep in &self.sweeps {
            for line in &sweep.lines_per_field[field_index] {
                merged.push(TransitionLine {
                    intensity: line.intensity / self.sweeps.len() as f64,
                    ..line.clone()
                });
            }
        }
        merged
    }
}

/// Sum of sweeps over the four <111> axes with equal weights.
pub fn ensemble_sweep(
    params: &DefectParameters,
    field_dir: [f64; 3],
    b_values: &[f64],
    model: IntensityModel,
) -> Result<EnsembleSweep, SpectrumError> {
    let sweeps = AXES_111
        .iter()
        .map(|&axis| field_sweep(params, axis, field_dir, b_values, model))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleSweep { sweeps })
}

/// Render lines on a frequency grid as a sum of profile-shaped peaks scaled
/// by line intensity.
pub fn render_spectrum(
    lines: &[TransitionLine],
    profile: &LineProfile,
    grid: &[f64],
) -> Result<SpectrumTrace, SpectrumError> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectrumError::BadGrid);
    }
    let y = grid
        .iter()
        .map(|&x| {
            lines
                .iter()
                .map(|line| line.intensity * profile.evaluate(x - line.freq_offset))
                .sum()
        })
        .collect();
    Ok(SpectrumTrace::new(grid.to_vec(), y, XKind::FrequencyGhz)?)
}

/// Distinct frequencies in a line list, using an absolute tolerance in GHz.
pub fn distinct_frequencies(lines: &[TransitionLine], tol: f64) -> Vec<f64> {
    let mut freqs: Vec<f64> = lines.iter().map(|l| l.freq_offset).collect();
    freqs.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    for f in freqs {
        if distinct.last().map(|&d| f - d > tol).unwrap_or(true) {
            distinct.push(f);
        }
    }
    distinct
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn orientation_angles() {
        let a = orientation_angle([0.0, 0.0, 1.0], [1.0, 1.0, 1.0]).unwrap();
        assert_close(a, 54.7356, 1e-3);
        let a = orientation_angle([1.0, 1.0, 1.0], [-1.0, -1.0, 1.0]).unwrap();
        assert_close(a, 109.4712, 1e-3);
        let a = orientation_angle([2.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap();
        assert_close(a, 0.0, 1e-12);
        assert!(orientation_angle([0.0; 3], [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_field_two_lines() {
        let params = DefectParameters::default();
        let field = FieldConfig::new([0.0; 3], [1.0, 1.0, 1.0]).unwrap();
        let lines = transition_lines(&params, &field, IntensityModel::SpinOverlap).unwrap();
        assert_eq!(lines.len(), 8);
        let distinct = distinct_frequencies(&lines, 1e-6);
        assert_eq!(distinct.len(), 2);
        assert_close(distinct[1] - distinct[0], 672.19, 0.01);
        // centroid reference puts the two lines symmetric about zero
        assert_close(distinct[0] + distinct[1], 0.0, 1e-9);
    }

    #[test]
    fn eight_lines_at_high_tilted_field() {
        let params = DefectParameters::default();
        let field = FieldConfig::from_direction(9.0, [1.0, 1.0, 1.0], [-1.0, -1.0, 1.0]).unwrap();
        let lines = transition_lines(&params, &field, IntensityModel::SpinOverlap).unwrap();
        let distinct = distinct_frequencies(&lines, 1e-6);
        assert_eq!(distinct.len(), 8);
        for w in distinct.windows(2) {
            assert!(w[1] - w[0] > 1.0, "lines closer than 1 GHz: {distinct:?}");
        }
    }

    #[test]
    fn uniform_model_gives_unit_intensities() {
        let params = DefectParameters::default();
        let field = FieldConfig::from_direction(5.0, [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]).unwrap();
        let lines = transition_lines(&params, &field, IntensityModel::Uniform).unwrap();
        assert!(lines.iter().all(|l| l.intensity == 1.0));
    }

    #[test]
    fn aligned_field_suppresses_spin_flip_lines() {
        let params = DefectParameters::default();
        let field = FieldConfig::from_direction(9.0, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]).unwrap();
        let lines = transition_lines(&params, &field, IntensityModel::SpinOverlap).unwrap();
        let dark = lines.iter().filter(|l| l.intensity < 1e-9).count();
        assert_eq!(dark, 4, "spin is conserved for an aligned field");
    }

    #[test]
    fn field_sign_flip_preserves_frequency_multiset() {
        let params = DefectParameters::default();
        let forward = FieldConfig::from_direction(7.0, [1.0, 1.0, 1.0], [-1.0, -1.0, 1.0]).unwrap();
        let backward =
            FieldConfig::from_direction(-7.0, [1.0, 1.0, 1.0], [-1.0, -1.0, 1.0]).unwrap();
        let mut f: Vec<f64> = transition_lines(&params, &forward, IntensityModel::SpinOverlap)
            .unwrap()
            .iter()
            .map(|l| l.freq_offset)
            .collect();
        let mut b: Vec<f64> = transition_lines(&params, &backward, IntensityModel::SpinOverlap)
            .unwrap()
            .iter()
            .map(|l| l.freq_offset)
            .collect();
        f.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in f.iter().zip(&b) {
            assert_close(*x, *y, 1e-6);
        }
    }

    #[test]
    fn sweep_shapes_and_endpoint() {
        let params = DefectParameters::default();
        let b: Vec<f64> = (0..19).map(|i| i as f64 * 0.5).collect();
        let sweep = field_sweep(
            &params,
            [-1.0, -1.0, 1.0],
            [1.0, 1.0, 1.0],
            &b,
            IntensityModel::SpinOverlap,
        )
        .unwrap();
        assert_eq!(sweep.lines_per_field.len(), 19);
        assert!(sweep.lines_per_field.iter().all(|l| l.len() == 8));
        assert_close(sweep.angle_to_axis_deg, 109.47, 0.01);
        let distinct = distinct_frequencies(&sweep.lines_per_field[0], 1e-6);
        assert_eq!(distinct.len(), 2);

        assert!(matches!(
            field_sweep(
                &params,
                [1.0, 1.0, 1.0],
                [0.0, 0.0, 1.0],
                &[],
                IntensityModel::Uniform
            ),
            Err(SpectrumError::BadFieldValues)
        ));
    }

    #[test]
    fn sweep_single_zero_field_entry() {
        let params = DefectParameters::default();
        let sweep = field_sweep(
            &params,
            [1.0, 1.0, 1.0],
            [0.0, 0.0, 1.0],
            &[0.0],
            IntensityModel::Uniform,
        )
        .unwrap();
        assert_eq!(sweep.lines_per_field.len(), 1);
        assert_eq!(
            distinct_frequencies(&sweep.lines_per_field[0], 1e-6).len(),
            2
        );
    }

    #[test]
    fn sweep_lines_are_continuous_in_field() {
        // per-index line positions cannot jump faster than the worst-case
        // eigenvalue slope times the field step
        let params = DefectParameters::default();
        let b: Vec<f64> = (0..19).map(|i| i as f64 * 0.5).collect();
        let sweep = field_sweep(
            &params,
            [-1.0, -1.0, 1.0],
            [1.0, 1.0, 1.0],
            &b,
            IntensityModel::SpinOverlap,
        )
        .unwrap();
        let slope_bound = 2.0
            * (params.gamma_s
                + params.ham_p * params.gamma_l
                + 2.0 * params.delta_p.abs() * params.g_l * params.gamma_l);
        for pair in sweep.lines_per_field.windows(2) {
            for (a, b) in pair[0].iter().zip(&pair[1]) {
                let jump = (b.freq_offset - a.freq_offset).abs();
                assert!(
                    jump <= slope_bound * 0.5 + 1e-9,
                    "jump {jump} exceeds {slope_bound} * step"
                );
            }
        }
    }

    #[test]
    fn aligned_vs_tilted_axis_patterns_differ() {
        let params = DefectParameters::default();
        let b = [9.0];
        let aligned = field_sweep(
            &params,
            [1.0, 1.0, 1.0],
            [1.0, 1.0, 1.0],
            &b,
            IntensityModel::Uniform,
        )
        .unwrap();
        let tilted = field_sweep(
            &params,
            [-1.0, -1.0, 1.0],
            [1.0, 1.0, 1.0],
            &b,
            IntensityModel::Uniform,
        )
        .unwrap();
        let fa: Vec<f64> = distinct_frequencies(&aligned.lines_per_field[0], 1e-6);
        let ft: Vec<f64> = distinct_frequencies(&tilted.lines_per_field[0], 1e-6);
        let max_diff = fa
            .iter()
            .zip(&ft)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(
            max_diff > 1.0,
            "orientation should be distinguishable: {max_diff}"
        );
    }

    #[test]
    fn ensemble_merges_four_families() {
        let params = DefectParameters::default();
        let ens = ensemble_sweep(
            &params,
            [1.0, 1.0, 1.0],
            &[0.0, 4.5, 9.0],
            IntensityModel::SpinOverlap,
        )
        .unwrap();
        assert_eq!(ens.sweeps.len(), 4);
        let merged = ens.merged_lines(2);
        assert_eq!(merged.len(), 32);
        assert!(merged.iter().all(|l| l.intensity <= 0.25 + 1e-12));
    }

    #[test]
    fn rendered_fwhm_matches_profile() {
        let profile = LineProfile::new(LineShape::Lorentzian, 2.0).unwrap();
        let line = TransitionLine {
            freq_offset: 0.0,
            intensity: 1.0,
            ground_index: 0,
            excited_index: 0,
        };
        let grid: Vec<f64> = (0..4001).map(|i| -20.0 + i as f64 * 0.01).collect();
        let trace = render_spectrum(&[line], &profile, &grid).unwrap();
        let max = trace.y.iter().cloned().fold(f64::MIN, f64::max);
        let above: Vec<f64> = trace
            .x
            .iter()
            .zip(&trace.y)
            .filter(|(_, &y)| y >= max / 2.0)
            .map(|(&x, _)| x)
            .collect();
        let width = above.last().unwrap() - above.first().unwrap();
        assert_close(width, 2.0, 0.03);
    }

    #[test]
    fn two_separated_lines_resolve() {
        let profile = LineProfile::new(LineShape::Gaussian, 1.0).unwrap();
        let lines = vec![
            TransitionLine {
                freq_offset: -10.0,
                intensity: 1.0,
                ground_index: 0,
                excited_index: 0,
            },
            TransitionLine {
                freq_offset: 10.0,
                intensity: 0.5,
                ground_index: 1,
                excited_index: 0,
            },
        ];
        let grid: Vec<f64> = (0..2001).map(|i| -30.0 + i as f64 * 0.03).collect();
        let trace = render_spectrum(&lines, &profile, &grid).unwrap();
        // local maxima
        let mut peaks = 0;
        for i in 1..trace.len() - 1 {
            if trace.y[i] > trace.y[i - 1] && trace.y[i] > trace.y[i + 1] && trace.y[i] > 0.1 {
                peaks += 1;
            }
        }
        assert_eq!(peaks, 2);
    }

    #[test]
    fn rendered_integral_matches_line_areas() {
        let profile = LineProfile::new(LineShape::Lorentzian, 1.0).unwrap();
        let lines = vec![
            TransitionLine {
                freq_offset: -3.0,
                intensity: 1.0,
                ground_index: 0,
                excited_index: 0,
            },
            TransitionLine {
                freq_offset: 5.0,
                intensity: 0.25,
                ground_index: 1,
                excited_index: 1,
            },
        ];
        // Lorentzian tails: +-80 fwhm captures >99.5% of the area
        let grid: Vec<f64> = (0..32001).map(|i| -80.0 + i as f64 * 0.005).collect();
        let trace = render_spectrum(&lines, &profile, &grid).unwrap();
        let mut integral = 0.0;
        for i in 1..trace.len() {
            integral +=
                (trace.x[i] - trace.x[i - 1]) * (trace.y[i] + trace.y[i - 1]) / 2.0;
        }
        let expected = (1.0 + 0.25) * profile.area();
        assert!(
            (integral - expected).abs() / expected < 0.01,
            "{integral} vs {expected}"
        );
    }
}
