//! Physical constants and unit-conversion factors.
//!
//! Energies are carried in GHz throughout the crate; conversion to other
//! units (nm, Debye, A^3) happens only at the boundaries defined here.

use std::f64::consts::PI;

/// Planck constant, J s (exact, SI 2019).
pub const PLANCK_J_S: f64 = 6.626_070_15e-34;

/// Bohr magneton, J/T (CODATA 2018).
pub const BOHR_MAGNETON_J_PER_T: f64 = 9.274_010_078_3e-24;

/// Vacuum permittivity, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY_F_PER_M: f64 = 8.854_187_812_8e-12;

/// One Debye in C m.
pub const DEBYE_C_M: f64 = 1e-21 / 299_792_458.0;

/// Orbital gyromagnetic ratio mu_B/h in GHz/T (~13.9962).
pub const MU_B_GHZ_PER_T: f64 = BOHR_MAGNETON_J_PER_T / PLANCK_J_S * 1e-9;

/// Electron-spin gyromagnetic ratio 2 mu_B/h in GHz/T (~27.9925).
pub const GAMMA_S_GHZ_PER_T: f64 = 2.0 * MU_B_GHZ_PER_T;

/// Speed of light expressed so that `nu_GHz = C_NM_GHZ / lambda_nm`.
pub const C_NM_GHZ: f64 = 299_792_458.0;

/// Stark-shift slope produced by a 1 Debye dipole in a 1 MV/m field, in GHz.
///
/// `1 D * 1 MV/m / h` = 5.0341 GHz; divides a measured GHz/(MV/m) slope
/// into Debye.
pub const GHZ_PER_MV_M_PER_DEBYE: f64 = DEBYE_C_M * 1e6 / PLANCK_J_S * 1e-9;

/// Quadratic Stark coefficient of a 1 A^3 polarizability volume, in
/// GHz/(MV/m)^2.
///
/// The quadratic shift is written `-1/2 * delta_alpha * F^2`, so the factor
/// 1/2 is folded in here: one A^3 of polarizability volume produces a
/// coefficient of 8.396e-5 GHz/(MV/m)^2.
pub const GHZ_PER_MV_M2_PER_A3: f64 =
    0.5 * 4.0 * PI * VACUUM_PERMITTIVITY_F_PER_M * 1e-30 * 1e12 / PLANCK_J_S * 1e-9;

/// Convert a vacuum wavelength in nm to a frequency in GHz.
pub fn wavelength_nm_to_ghz(lambda_nm: f64) -> f64 {
    C_NM_GHZ / lambda_nm
}

/// Convert a frequency in GHz to a vacuum wavelength in nm.
pub fn ghz_to_wavelength_nm(nu_ghz: f64) -> f64 {
    C_NM_GHZ / nu_ghz
}
