//! Scalar spectroscopic metrics: response correction, background
//! subtraction, Debye-Waller and Huang-Rhys factors, and the
//! lifetime-limited linewidth.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("trace must contain at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("x axis must be strictly ascending (violated at sample {0})")]
    NonAscendingAxis(usize),
    #[error("sample {0} is not finite")]
    NonFiniteSample(usize),
    #[error("sample {0} is negative")]
    NegativeSample(usize),
    #[error("response efficiency must lie in (0, 1] (violated at sample {0})")]
    BadEfficiency(usize),
    #[error("response curve does not cover the trace support [{lo}, {hi}]")]
    ResponseCoverage { lo: f64, hi: f64 },
    #[error("background window [{lo}, {hi}] contains {got} samples (needs >= 2)")]
    EmptyWindow { lo: f64, hi: f64, got: usize },
    #[error("no background windows given")]
    NoWindows,
    #[error("window [{lo}, {hi}] is outside the trace range [{xlo}, {xhi}]")]
    WindowOutsideTrace {
        lo: f64,
        hi: f64,
        xlo: f64,
        xhi: f64,
    },
    #[error("ZPL window [{zlo}, {zhi}] is not contained in the total window [{tlo}, {thi}]")]
    WindowNesting {
        zlo: f64,
        zhi: f64,
        tlo: f64,
        thi: f64,
    },
    #[error("window bounds must satisfy lo < hi, got [{lo}, {hi}]")]
    BadWindow { lo: f64, hi: f64 },
    #[error("total intensity integral is zero")]
    ZeroIntegral,
    #[error("Debye-Waller factor must lie in (0, 1], got {0}")]
    BadDebyeWaller(f64),
    #[error("lifetime must be positive, got {0} ns")]
    NonPositiveLifetime(f64),
    #[error("trace axis is already {0:?}")]
    WrongAxisKind(XKind),
}

/// Which physical quantity the x axis carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XKind {
    WavelengthNm,
    FrequencyGhz,
}

/// A sampled spectrum: strictly ascending x, finite nonnegative intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_kind: XKind,
}

impl SpectrumTrace {
    pub fn new(x: Vec<f64>, y: Vec<f64>, x_kind: XKind) -> Result<Self, MetricsError> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(MetricsError::TooFewSamples(x.len().min(y.len())));
        }
        for (i, w) in x.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(MetricsError::NonAscendingAxis(i + 1));
            }
        }
        for (i, &v) in x.iter().chain(y.iter()).enumerate() {
            if !v.is_finite() {
                return Err(MetricsError::NonFiniteSample(i % x.len()));
            }
        }
        if let Some(i) = y.iter().position(|&v| v < 0.0) {
            return Err(MetricsError::NegativeSample(i));
        }
        Ok(Self { x, y, x_kind })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn span(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }
}

/// Detection-efficiency curve vs. wavelength, used to undo the instrument
/// response.
#[derive(Debug, Clone)]
pub struct ResponseCurve {
    pub x: Vec<f64>,
    pub efficiency: Vec<f64>,
}

impl ResponseCurve {
    pub fn new(x: Vec<f64>, efficiency: Vec<f64>) -> Result<Self, MetricsError> {
        if x.len() < 2 || x.len() != efficiency.len() {
            return Err(MetricsError::TooFewSamples(x.len().min(efficiency.len())));
        }
        for (i, w) in x.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(MetricsError::NonAscendingAxis(i + 1));
            }
        }
        for (i, &e) in efficiency.iter().enumerate() {
            if !(e > 0.0 && e <= 1.0) || !e.is_finite() {
                return Err(MetricsError::BadEfficiency(i));
            }
        }
        Ok(Self { x, efficiency })
    }

    /// Linear interpolation; the caller guarantees coverage.
    fn at(&self, x: f64) -> f64 {
        match self.x.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => self.efficiency[i],
            Err(i) => {
                let (i0, i1) = (i - 1, i);
                let t = (x - self.x[i0]) / (self.x[i1] - self.x[i0]);
                self.efficiency[i0] + t * (self.efficiency[i1] - self.efficiency[i0])
            }
        }
    }
}

/// Divide each sample by the interpolated detection efficiency.
pub fn correct_response(
    trace: &SpectrumTrace,
    response: &ResponseCurve,
) -> Result<SpectrumTrace, MetricsError> {
    let (lo, hi) = trace.span();
    if response.x[0] > lo || *response.x.last().unwrap() < hi {
        return Err(MetricsError::ResponseCoverage { lo, hi });
    }
    let y = trace
        .x
        .iter()
        .zip(&trace.y)
        .map(|(&x, &v)| v / response.at(x))
        .collect();
    SpectrumTrace::new(trace.x.clone(), y, trace.x_kind)
}

/// Re-apply a response curve (multiply by efficiency); inverse of
/// [`correct_response`] on the same curve.
pub fn apply_response(
    trace: &SpectrumTrace,
    response: &ResponseCurve,
) -> Result<SpectrumTrace, MetricsError> {
    let (lo, hi) = trace.span();
    if response.x[0] > lo || *response.x.last().unwrap() < hi {
        return Err(MetricsError::ResponseCoverage { lo, hi });
    }
    let y = trace
        .x
        .iter()
        .zip(&trace.y)
        .map(|(&x, &v)| v * response.at(x))
        .collect();
    SpectrumTrace::new(trace.x.clone(), y, trace.x_kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackgroundMethod {
    Constant,
    Linear,
}

/// Background-subtracted trace plus bookkeeping about the estimate.
#[derive(Debug, Clone)]
pub struct BackgroundResult {
    pub trace: SpectrumTrace,
    /// Samples that went negative after subtraction and were clamped to 0.
    pub clamped: usize,
    /// Baseline value at the left edge and right edge of the trace.
    pub baseline_edges: (f64, f64),
}

/// Estimate a baseline on the given x windows and subtract it. Negative
/// results are clamped to zero and counted rather than rejected, so noisy
/// baselines keep the downstream integrals well defined.
pub fn subtract_background(
    trace: &SpectrumTrace,
    method: BackgroundMethod,
    windows: &[(f64, f64)],
) -> Result<BackgroundResult, MetricsError> {
    if windows.is_empty() {
        return Err(MetricsError::NoWindows);
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for &(lo, hi) in windows {
        if !(lo < hi) {
            return Err(MetricsError::BadWindow { lo, hi });
        }
        let mut got = 0;
        for (&x, &y) in trace.x.iter().zip(&trace.y) {
            if x >= lo && x <= hi {
                xs.push(x);
                ys.push(y);
                got += 1;
            }
        }
        if got < 2 {
            return Err(MetricsError::EmptyWindow { lo, hi, got });
        }
    }

    let n = xs.len() as f64;
    let (intercept, slope) = match method {
        BackgroundMethod::Constant => (ys.iter().sum::<f64>() / n, 0.0),
        BackgroundMethod::Linear => {
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            (my - slope * mx, slope)
        }
    };

    let mut clamped = 0;
    let y: Vec<f64> = trace
        .x
        .iter()
        .zip(&trace.y)
        .map(|(&x, &v)| {
            let r = v - (intercept + slope * x);
            if r < 0.0 {
                clamped += 1;
                0.0
            } else {
                r
            }
        })
        .collect();
    let baseline_edges = (
        intercept + slope * trace.x[0],
        intercept + slope * trace.x[trace.len() - 1],
    );
    Ok(BackgroundResult {
        trace: SpectrumTrace::new(trace.x.clone(), y, trace.x_kind)?,
        clamped,
        baseline_edges,
    })
}

/// Trapezoidal integral of the trace over `[lo, hi]`, with linear
/// interpolation at the window edges.
fn integrate_window(trace: &SpectrumTrace, lo: f64, hi: f64) -> Result<f64, MetricsError> {
    if !(lo < hi) {
        return Err(MetricsError::BadWindow { lo, hi });
    }
    let (xlo, xhi) = trace.span();
    if lo < xlo || hi > xhi {
        return Err(MetricsError::WindowOutsideTrace {
            lo,
            hi,
            xlo,
            xhi,
        });
    }
    let y_at = |x: f64| -> f64 {
        match trace.x.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => trace.y[i],
            Err(i) => {
                let (i0, i1) = (i - 1, i);
                let t = (x - trace.x[i0]) / (trace.x[i1] - trace.x[i0]);
                trace.y[i0] + t * (trace.y[i1] - trace.y[i0])
            }
        }
    };
    // interior sample range
    let start = trace.x.partition_point(|&x| x < lo);
    let end = trace.x.partition_point(|&x| x <= hi);
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(end - start + 2);
    if start >= trace.len() || trace.x[start] > lo {
        nodes.push((lo, y_at(lo)));
    }
    for i in start..end {
        nodes.push((trace.x[i], trace.y[i]));
    }
    if nodes.last().map(|&(x, _)| x < hi).unwrap_or(true) {
        nodes.push((hi, y_at(hi)));
    }
    let mut integral = 0.0;
    for pair in nodes.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        integral += (x1 - x0) * (y0 + y1) / 2.0;
    }
    Ok(integral)
}

/// Debye-Waller factor: the fraction of emitted light inside the ZPL window
/// relative to the total window (ZPL plus phonon sideband).
pub fn debye_waller(
    trace: &SpectrumTrace,
    zpl_window: (f64, f64),
    total_window: (f64, f64),
) -> Result<f64, MetricsError> {
    let (zlo, zhi) = zpl_window;
    let (tlo, thi) = total_window;
    if zlo < tlo || zhi > thi {
        return Err(MetricsError::WindowNesting {
            zlo,
            zhi,
            tlo,
            thi,
        });
    }
    let zpl = integrate_window(trace, zlo, zhi)?;
    let total = integrate_window(trace, tlo, thi)?;
    if total <= 0.0 {
        return Err(MetricsError::ZeroIntegral);
    }
    Ok(zpl / total)
}

/// Convert a wavelength-axis trace (nm) to the frequency axis (GHz),
/// applying the Jacobian |d lambda / d nu| = lambda^2 / c so that integrals
/// are preserved. Integration-based metrics default to the wavelength axis;
/// this enables the frequency-axis variant.
pub fn wavelength_to_frequency_axis(trace: &SpectrumTrace) -> Result<SpectrumTrace, MetricsError> {
    if trace.x_kind != XKind::WavelengthNm {
        return Err(MetricsError::WrongAxisKind(trace.x_kind));
    }
    let c = crate::constants::C_NM_GHZ;
    // descending in frequency as wavelength ascends; emit reversed
    let mut pairs: Vec<(f64, f64)> = trace
        .x
        .iter()
        .zip(&trace.y)
        .map(|(&lambda, &y)| (c / lambda, y * lambda * lambda / c))
        .collect();
    pairs.reverse();
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    SpectrumTrace::new(x, y, XKind::FrequencyGhz)
}

/// Huang-Rhys factor S = -ln(DW): the mean number of phonons emitted per
/// optical cycle.
pub fn huang_rhys(dw: f64) -> Result<f64, MetricsError> {
    if !(dw > 0.0 && dw <= 1.0) {
        return Err(MetricsError::BadDebyeWaller(dw));
    }
    Ok(-dw.ln())
}

/// Lifetime-limited linewidth (2 pi tau)^-1 in MHz for tau in ns.
pub fn lifetime_limited_linewidth(tau_ns: f64) -> Result<f64, MetricsError> {
    if !(tau_ns > 0.0) {
        return Err(MetricsError::NonPositiveLifetime(tau_ns));
    }
    Ok(1e3 / (2.0 * std::f64::consts::PI * tau_ns))
}
