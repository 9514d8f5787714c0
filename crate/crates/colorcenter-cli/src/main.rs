//! `colorcenter`: reproducible simulation and analysis pipelines for
//! orbital-doublet color-center spectroscopy.
//!
//! Exit codes: 0 on success, 2 on any input error, 3 when a fit fails to
//! converge. No output file is written on a nonzero exit.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod csvio;
mod report;
mod svg;

const LONG_ABOUT: &str = "Simulates the magneto-optical emission spectrum of an \
orbital-doublet color center and fits the associated spectroscopy data: \
Lorentzian PLE peaks, Stark-shift voltage scans, charge-decay traces, \
IRF-convolved TCSPC lifetime histograms and Hamiltonian couplings.\n\n\
Energies are handled in GHz; vacuum wavelengths relate to frequencies via \
nu[GHz] = 299792458 / lambda[nm]. All commands are deterministic given \
their inputs and --seed, and no output file is written on a nonzero exit.";

#[derive(Parser)]
#[command(name = "colorcenter", version, about = "Color-center spectroscopy simulator and fit pipelines", long_about = LONG_ABOUT)]
pub struct Cli {
    /// Seed for synthetic-noise generation (reserved; the current commands
    /// consume no randomness)
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Simulate the emission-line map versus magnetic field
    SimulateZeeman(SimulateArgs),
    /// Fit a model to a measurement CSV
    #[command(subcommand)]
    Fit(FitKind),
    /// Debye-Waller and Huang-Rhys metrics from a fluorescence spectrum
    Metrics(MetricsArgs),
    /// Validate a CSV file against a named schema
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntensityModelArg {
    Uniform,
    SpinOverlap,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Lorentzian,
    Gaussian,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumAxisArg {
    Ghz,
    Nm,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Defect parameter JSON (default: $COLORCENTER_PARAMS, else built-in
    /// values)
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Defect <111> axis, lab frame, as "x,y,z"
    #[arg(long, default_value = "1,1,1")]
    pub axis: String,
    /// Field direction, lab frame, as "x,y,z"
    #[arg(long, default_value = "0,0,1")]
    pub field_dir: String,
    /// Lowest field magnitude, Tesla
    #[arg(long, default_value_t = 0.0)]
    pub b_min: f64,
    /// Highest field magnitude, Tesla
    #[arg(long, default_value_t = 9.0)]
    pub b_max: f64,
    /// Field step, Tesla
    #[arg(long, default_value_t = 0.5)]
    pub b_step: f64,
    #[arg(long, value_enum, default_value_t = IntensityModelArg::SpinOverlap)]
    pub intensity_model: IntensityModelArg,
    /// Sum the sweep over all four <111> orientation families
    #[arg(long)]
    pub ensemble: bool,
    /// Field-map CSV output (b_tesla, line_index, freq_offset_ghz, intensity)
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Optional field-map SVG output
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
    /// Also render a broadened spectrum at this field magnitude (Tesla)
    #[arg(long, requires = "spectrum_csv")]
    pub spectrum_at_b: Option<f64>,
    /// FWHM of the rendered line profile, GHz
    #[arg(long, default_value_t = 1.0)]
    pub spectrum_fwhm_ghz: f64,
    #[arg(long, value_enum, default_value_t = ShapeArg::Lorentzian)]
    pub spectrum_shape: ShapeArg,
    /// x axis of the rendered spectrum
    #[arg(long, value_enum, default_value_t = SpectrumAxisArg::Ghz)]
    pub spectrum_axis: SpectrumAxisArg,
    /// Rendered-spectrum CSV output
    #[arg(long, requires = "spectrum_at_b")]
    pub spectrum_csv: Option<PathBuf>,
    /// Vacuum wavelength of the zero-offset reference when rendering in nm
    #[arg(long, default_value_t = 884.0)]
    pub zpl_center_nm: f64,
}

#[derive(Subcommand)]
pub enum FitKind {
    /// Lorentzian peak (PLE linewidth); input: freq_ghz|freq_mhz, counts
    Lorentzian(FitCommonArgs),
    /// Stark shift vs. bias voltage; input: voltage_v, peak_freq_ghz
    Stark(StarkFitArgs),
    /// Exponential charge decay; input: time_us|time_ns, counts
    Decay(DecayFitArgs),
    /// IRF-convolved excited-state lifetime; input: time_ns, counts
    Lifetime(LifetimeFitArgs),
    /// Hamiltonian couplings from peak positions; input: b_tesla,
    /// freq_offset_ghz
    Hamiltonian(HamiltonianFitArgs),
}

#[derive(Args)]
pub struct FitCommonArgs {
    /// Input CSV
    #[arg(long)]
    pub input: PathBuf,
    /// Fit-report JSON output
    #[arg(long)]
    pub out_json: PathBuf,
    /// Model-overlay CSV output
    #[arg(long)]
    pub out_overlay: Option<PathBuf>,
    /// Overlay SVG output
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
}

#[derive(Args)]
pub struct StarkFitArgs {
    #[command(flatten)]
    pub common: FitCommonArgs,
    /// Junction thickness, micrometers
    #[arg(long, default_value_t = 3.5)]
    pub thickness_um: f64,
    /// Relative permittivity of the host
    #[arg(long, default_value_t = 5.7)]
    pub epsilon_r: f64,
    /// Row index (0-based) whose peak frequency defines zero shift
    #[arg(long, default_value_t = 0)]
    pub reference_index: usize,
}

#[derive(Args)]
pub struct DecayFitArgs {
    #[command(flatten)]
    pub common: FitCommonArgs,
    /// Number of exponential components (1 or 2)
    #[arg(long, default_value_t = 1)]
    pub components: usize,
    /// Fit window start (same unit as the time column)
    #[arg(long)]
    pub window_start: Option<f64>,
    /// Fit window end (same unit as the time column)
    #[arg(long)]
    pub window_end: Option<f64>,
}

#[derive(Args)]
pub struct LifetimeFitArgs {
    #[command(flatten)]
    pub common: FitCommonArgs,
    /// Instrument response FWHM, ns
    #[arg(long)]
    pub irf_fwhm_ns: f64,
    /// Fit the IRF width instead of holding it fixed
    #[arg(long)]
    pub fit_irf: bool,
}

#[derive(Args)]
pub struct HamiltonianFitArgs {
    #[command(flatten)]
    pub common: FitCommonArgs,
    /// Defect parameter JSON for the fixed parameters
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Defect <111> axis as "x,y,z"
    #[arg(long, default_value = "-1,-1,1")]
    pub axis: String,
    /// Field direction as "x,y,z"
    #[arg(long, default_value = "1,1,1")]
    pub field_dir: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackgroundArg {
    Constant,
    Linear,
}

#[derive(Args)]
pub struct MetricsArgs {
    /// Spectrum CSV (wavelength_nm, counts)
    #[arg(long)]
    pub input: PathBuf,
    /// Detector response CSV (wavelength_nm, efficiency) to divide out
    #[arg(long)]
    pub response: Option<PathBuf>,
    /// Background estimation method (requires --background-window)
    #[arg(long, value_enum)]
    pub background: Option<BackgroundArg>,
    /// Background window "lo:hi" in nm; repeatable
    #[arg(long = "background-window")]
    pub background_windows: Vec<String>,
    /// ZPL integration window "lo:hi" in nm
    #[arg(long, default_value = "882:886")]
    pub zpl_window: String,
    /// Total (ZPL + sideband) integration window "lo:hi" in nm
    #[arg(long, default_value = "882:1100")]
    pub total_window: String,
    /// Metrics JSON output
    #[arg(long)]
    pub out_json: PathBuf,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// CSV file to validate
    #[arg(long)]
    pub input: PathBuf,
    /// Schema name: spectrum, response, stark, decay, tcspc, peaks or ple
    #[arg(long)]
    pub schema: String,
}

/// Errors carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad inputs, bad files, bad schemas: exit 2.
    Input(String),
    /// A fit ran but did not converge: exit 3.
    NonConvergence(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::NonConvergence(m) => write!(f, "fit did not converge: {m}"),
        }
    }
}

impl From<csvio::CsvErrors> for CliError {
    fn from(e: csvio::CsvErrors) -> Self {
        CliError::Input(e.to_string())
    }
}

macro_rules! input_error_from {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}
input_error_from!(
    colorcenter::DefectError,
    colorcenter::SpectrumError,
    colorcenter::MetricsError,
    colorcenter::FitError,
    std::io::Error,
);

pub fn parse_vec3(text: &str, what: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!(
            "{what} must be three comma-separated numbers, got '{text}'"
        )));
    }
    let mut v = [0.0; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .map_err(|_| CliError::Input(format!("{what}: cannot parse '{part}' as a number")))?;
    }
    Ok(v)
}

pub fn parse_window(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::Input(format!(
            "{what} must be 'lo:hi', got '{text}'"
        )));
    }
    let lo = parts[0]
        .parse::<f64>()
        .map_err(|_| CliError::Input(format!("{what}: cannot parse '{}'", parts[0])))?;
    let hi = parts[1]
        .parse::<f64>()
        .map_err(|_| CliError::Input(format!("{what}: cannot parse '{}'", parts[1])))?;
    if !(lo < hi) {
        return Err(CliError::Input(format!(
            "{what}: lower bound {lo} must be below upper bound {hi}"
        )));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SimulateZeeman(args) => commands::simulate_zeeman(&args),
        Command::Fit(kind) => commands::fit(&kind),
        Command::Metrics(args) => commands::metrics(&args),
        Command::Validate(args) => commands::validate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
