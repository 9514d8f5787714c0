//! Long-term spectral stability: RMS drift of a peak-center time series.

use super::FitError;

/// Root-mean-square deviation of peak centers (GHz) about their mean,
/// reported in MHz.
pub fn rms_drift(peak_centers_ghz: &[f64]) -> Result<f64, FitError> {
    if peak_centers_ghz.len() < 2 {
        return Err(FitError::TooFewPoints {
            needed: 2,
            got: peak_centers_ghz.len(),
        });
    }
    if peak_centers_ghz.iter().any(|v| !v.is_finite()) {
        return Err(FitError::InvalidInput(
            "peak centers must be finite".into(),
        ));
    }
    let n = peak_centers_ghz.len() as f64;
    let mean = peak_centers_ghz.iter().sum::<f64>() / n;
    let variance = peak_centers_ghz
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    Ok(variance.sqrt() * 1e3)
}
