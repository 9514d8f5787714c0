//! Magneto-optical spectrum simulation and spectroscopic analysis for D3d
//! color centers in diamond with an orbital-doublet ground state and an
//! orbital-singlet excited state (the NiV-class level structure).
//!
//! The crate covers two sides of the same experiment:
//!
//! * **Forward simulation** ([`defect`], [`spectrum`]): symmetry-adapted
//!   ground- and excited-state Hamiltonians (spin-orbit, Jahn-Teller,
//!   orbital/spin Zeeman, second-order Jahn-Teller), their
//!   eigendecomposition, the eight optical emission lines and their
//!   evolution with magnetic field, and rendering into broadened spectra.
//! * **Analysis** ([`fit`], [`metrics`]): Levenberg-Marquardt fitters for
//!   Lorentzian PLE peaks, Stark shifts with Lorentz local-field and unit
//!   conversion, single/bi-exponential charge decays, IRF-convolved
//!   lifetime extraction and Hamiltonian-parameter inversion, plus scalar
//!   metrics (Debye-Waller and Huang-Rhys factors, lifetime-limited
//!   linewidth, spectral drift).
//!
//! Energies are GHz everywhere; conversions to nm, Debye and A^3 live in
//! [`constants`]. All operations are pure functions of their inputs and are
//! safe to evaluate concurrently.

pub mod constants;
pub mod defect;
pub mod fit;
pub mod linalg;
pub mod metrics;
pub mod spectrum;
pub mod synth;

pub use defect::{
    assemble_excited, assemble_ground, h_jt, h_second_order_jt, h_so, h_zeeman_orbital,
    h_zeeman_spin, DefectError, DefectParameters, FieldConfig,
};
pub use fit::{FitError, FitParam, FitResult};
pub use linalg::{eigensolve, EigenSystem, HermitianMatrix, LinalgError};
pub use metrics::{
    correct_response, debye_waller, huang_rhys, lifetime_limited_linewidth, subtract_background,
    wavelength_to_frequency_axis, BackgroundMethod, MetricsError, ResponseCurve, SpectrumTrace,
    XKind,
};
pub use spectrum::{
    ensemble_sweep, field_sweep, orientation_angle, render_spectrum, transition_lines, FieldSweep,
    IntensityModel, LineProfile, LineShape, SpectrumError, TransitionLine,
};
