//! Symmetry-adapted Hamiltonians for a D3d defect with an orbital-doublet
//! ground state and an orbital-singlet excited state.
//!
//! The ground-state basis is |e_x up>, |e_x dn>, |e_y up>, |e_y dn>; the
//! excited state uses |a_1g up>, |a_1g dn>. The spin quantization axis z is
//! the defect <111> high-symmetry direction, and every matrix element is in
//! GHz. Residual strain and electric-field terms are not modeled.

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::constants::MU_B_GHZ_PER_T;
use crate::linalg::HermitianMatrix;

#[derive(Debug, Error)]
pub enum DefectError {
    #[error("invalid defect parameters: {0}")]
    InvalidParameters(String),
    #[error("axis vector must be nonzero")]
    ZeroAxis,
    #[error("spin Hamiltonian dimension must be 2 or 4, got {0}")]
    BadSpinDimension(usize),
    #[error("failed to parse parameter file: {0}")]
    ParameterFile(String),
}

/// Coupling constants of the defect model plus the two gyromagnetic ratios.
///
/// Defaults are the values that reproduce the measured eight-line field map:
/// spin-orbit 672 GHz, Jahn-Teller 8 GHz, Ham reduction factor 0.124,
/// second-order Jahn-Teller parameter 0.0839 and Stevens reduction factor
/// 0.7821.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectParameters {
    /// Ground-state spin-orbit coupling constant lambda, GHz.
    pub lambda_soc: f64,
    /// Jahn-Teller coupling strength, x component, GHz.
    pub xi_x: f64,
    /// Jahn-Teller coupling strength, y component, GHz.
    pub xi_y: f64,
    /// Ham vibronic reduction factor p quenching the orbital Zeeman response.
    pub ham_p: f64,
    /// Second-order Jahn-Teller parameter delta_p.
    pub delta_p: f64,
    /// Stevens orbital reduction factor g_L.
    pub g_l: f64,
    /// Orbital gyromagnetic ratio mu_B/h, GHz/T.
    pub gamma_l: f64,
    /// Spin gyromagnetic ratio 2 mu_B/h, GHz/T.
    pub gamma_s: f64,
}

impl Default for DefectParameters {
    fn default() -> Self {
        Self {
            lambda_soc: 672.0,
            xi_x: 8.0,
            xi_y: 0.0,
            ham_p: 0.124,
            delta_p: 0.0839,
            g_l: 0.7821,
            gamma_l: MU_B_GHZ_PER_T,
            gamma_s: 2.0 * MU_B_GHZ_PER_T,
        }
    }
}

/// On-disk parameter file. Units are baked into the key names; unknown keys
/// are rejected so typos cannot silently fall back to defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParameterFile {
    lambda_soc_ghz: Option<f64>,
    xi_x_ghz: Option<f64>,
    xi_y_ghz: Option<f64>,
    ham_p: Option<f64>,
    delta_p: Option<f64>,
    g_l: Option<f64>,
}

impl DefectParameters {
    /// Combined Jahn-Teller strength xi = sqrt(xi_x^2 + xi_y^2), GHz.
    pub fn jt_strength(&self) -> f64 {
        self.xi_x.hypot(self.xi_y)
    }

    /// Zero-field ground-state splitting sqrt(lambda^2 + 4 xi^2), GHz.
    pub fn zero_field_splitting(&self) -> f64 {
        let xi = self.jt_strength();
        (self.lambda_soc * self.lambda_soc + 4.0 * xi * xi).sqrt()
    }

    pub fn validate(&self) -> Result<(), DefectError> {
        if !(self.lambda_soc >= 0.0) {
            return Err(DefectError::InvalidParameters(format!(
                "lambda_soc must be >= 0 GHz, got {}",
                self.lambda_soc
            )));
        }
        if !(0.0..=1.0).contains(&self.ham_p) {
            return Err(DefectError::InvalidParameters(format!(
                "ham_p must lie in [0, 1], got {}",
                self.ham_p
            )));
        }
        for (name, value) in [
            ("xi_x", self.xi_x),
            ("xi_y", self.xi_y),
            ("delta_p", self.delta_p),
            ("g_l", self.g_l),
            ("gamma_l", self.gamma_l),
            ("gamma_s", self.gamma_s),
        ] {
            if !value.is_finite() {
                return Err(DefectError::InvalidParameters(format!(
                    "{name} must be finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Parse the JSON parameter file, filling omitted keys from the defaults.
    pub fn from_json_str(text: &str) -> Result<Self, DefectError> {
        let file: ParameterFile =
            serde_json::from_str(text).map_err(|e| DefectError::ParameterFile(e.to_string()))?;
        let defaults = Self::default();
        let params = Self {
            lambda_soc: file.lambda_soc_ghz.unwrap_or(defaults.lambda_soc),
            xi_x: file.xi_x_ghz.unwrap_or(defaults.xi_x),
            xi_y: file.xi_y_ghz.unwrap_or(defaults.xi_y),
            ham_p: file.ham_p.unwrap_or(defaults.ham_p),
            delta_p: file.delta_p.unwrap_or(defaults.delta_p),
            g_l: file.g_l.unwrap_or(defaults.g_l),
            ..defaults
        };
        params.validate()?;
        Ok(params)
    }
}

/// Magnetic-field configuration: a lab-frame field vector and the defect
/// <111> axis it is resolved against.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    b_lab: [f64; 3],
    axis: [f64; 3],
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl FieldConfig {
    /// A lab-frame field `b_lab` (Tesla) against defect axis `axis`
    /// (normalized internally).
    pub fn new(b_lab: [f64; 3], axis: [f64; 3]) -> Result<Self, DefectError> {
        let n = norm3(axis);
        if !(n > 0.0) || !n.is_finite() {
            return Err(DefectError::ZeroAxis);
        }
        if b_lab.iter().any(|b| !b.is_finite()) {
            return Err(DefectError::InvalidParameters(
                "field components must be finite".into(),
            ));
        }
        Ok(Self {
            b_lab,
            axis: [axis[0] / n, axis[1] / n, axis[2] / n],
        })
    }

    /// Field of magnitude `b_tesla` along `direction`, against `axis`.
    pub fn from_direction(
        b_tesla: f64,
        direction: [f64; 3],
        axis: [f64; 3],
    ) -> Result<Self, DefectError> {
        let n = norm3(direction);
        if !(n > 0.0) || !n.is_finite() {
            return Err(DefectError::InvalidParameters(
                "field direction must be nonzero".into(),
            ));
        }
        Self::new(
            [
                b_tesla * direction[0] / n,
                b_tesla * direction[1] / n,
                b_tesla * direction[2] / n,
            ],
            axis,
        )
    }

    pub fn b_lab(&self) -> [f64; 3] {
        self.b_lab
    }

    /// Normalized defect axis (the defect-frame z direction).
    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn magnitude(&self) -> f64 {
        norm3(self.b_lab)
    }

    /// Resolve the lab-frame field into defect-frame components (Bx, By, Bz).
    ///
    /// z is the defect axis; x and y complete a right-handed orthonormal
    /// frame. The in-plane orientation of x is a gauge choice: eigenvalues
    /// depend only on Bz and Bx^2 + By^2.
    pub fn defect_frame_field(&self) -> [f64; 3] {
        let z = self.axis;
        // pick a helper direction that is not parallel to z
        let helper = if z[2].abs() < 0.9 {
            [0.0, 0.0, 1.0]
        } else {
            [1.0, 0.0, 0.0]
        };
        let hz = dot3(helper, z);
        let mut x = [helper[0] - hz * z[0], helper[1] - hz * z[1], helper[2] - hz * z[2]];
        let xn = norm3(x);
        x = [x[0] / xn, x[1] / xn, x[2] / xn];
        let y = cross3(z, x);
        [dot3(self.b_lab, x), dot3(self.b_lab, y), dot3(self.b_lab, z)]
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Ground-state spin-orbit interaction: entries +-i lambda/2 coupling the
/// two orbitals with a spin-dependent sign.
pub fn h_so(params: &DefectParameters) -> HermitianMatrix {
    let mut m = HermitianMatrix::zeros(4).expect("dim 4");
    let half = params.lambda_soc / 2.0;
    m.set_pair(0, 2, c(0.0, -half)); // <e_x up| H |e_y up>
    m.set_pair(1, 3, c(0.0, half)); // <e_x dn| H |e_y dn>
    m
}

/// Ground-state Jahn-Teller interaction; eigenvalues are
/// +-sqrt(xi_x^2 + xi_y^2), each doubly degenerate.
pub fn h_jt(params: &DefectParameters) -> HermitianMatrix {
    let mut m = HermitianMatrix::zeros(4).expect("dim 4");
    m.set_pair(0, 0, c(params.xi_x, 0.0));
    m.set_pair(1, 1, c(params.xi_x, 0.0));
    m.set_pair(2, 2, c(-params.xi_x, 0.0));
    m.set_pair(3, 3, c(-params.xi_x, 0.0));
    m.set_pair(0, 2, c(params.xi_y, 0.0));
    m.set_pair(1, 3, c(params.xi_y, 0.0));
    m
}

/// Orbital Zeeman term. Only the axial field component Bz enters, quenched
/// by the Ham factor p: off-diagonal entries +-i p gamma_L Bz.
pub fn h_zeeman_orbital(params: &DefectParameters, field: &FieldConfig) -> HermitianMatrix {
    let bz = field.defect_frame_field()[2];
    let mut m = HermitianMatrix::zeros(4).expect("dim 4");
    let v = params.ham_p * params.gamma_l * bz;
    m.set_pair(0, 2, c(0.0, v));
    m.set_pair(1, 3, c(0.0, v));
    m
}

/// Spin Zeeman term gamma_S (sigma . B) on the spin index.
///
/// `dim = 4` gives the ground-state form (one sigma.B block per orbital);
/// `dim = 2` gives the single spin block used for the excited state.
pub fn h_zeeman_spin(
    params: &DefectParameters,
    field: &FieldConfig,
    dim: usize,
) -> Result<HermitianMatrix, DefectError> {
    let [bx, by, bz] = field.defect_frame_field();
    let g = params.gamma_s;
    let diag = g * bz;
    let off = c(g * bx, -g * by); // gamma_S (Bx - i By)
    match dim {
        2 => {
            let mut m = HermitianMatrix::zeros(2).expect("dim 2");
            m.set_pair(0, 0, c(diag, 0.0));
            m.set_pair(1, 1, c(-diag, 0.0));
            m.set_pair(0, 1, off);
            Ok(m)
        }
        4 => {
            let mut m = HermitianMatrix::zeros(4).expect("dim 4");
            for block in [0usize, 2] {
                m.set_pair(block, block, c(diag, 0.0));
                m.set_pair(block + 1, block + 1, c(-diag, 0.0));
                m.set_pair(block, block + 1, off);
            }
            Ok(m)
        }
        other => Err(DefectError::BadSpinDimension(other)),
    }
}

/// Second-order Jahn-Teller correction 2 delta_p g_L gamma_L Bz Sz, with Sz
/// the spin Pauli matrix (eigenvalues +-1) tensored with the orbital
/// identity. gamma_L supplies the GHz/T scale.
pub fn h_second_order_jt(params: &DefectParameters, field: &FieldConfig) -> HermitianMatrix {
    let bz = field.defect_frame_field()[2];
    let v = 2.0 * params.delta_p * params.g_l * params.gamma_l * bz;
    let mut m = HermitianMatrix::zeros(4).expect("dim 4");
    m.set_pair(0, 0, c(v, 0.0));
    m.set_pair(1, 1, c(-v, 0.0));
    m.set_pair(2, 2, c(v, 0.0));
    m.set_pair(3, 3, c(-v, 0.0));
    m
}

/// Full ground-state Hamiltonian: spin-orbit + Jahn-Teller + second-order
/// Jahn-Teller + orbital Zeeman + spin Zeeman.
pub fn assemble_ground(params: &DefectParameters, field: &FieldConfig) -> HermitianMatrix {
    let zeeman_spin = h_zeeman_spin(params, field, 4).expect("dim 4 is valid");
    h_so(params)
        .add(&h_jt(params))
        .and_then(|m| m.add(&h_second_order_jt(params, field)))
        .and_then(|m| m.add(&h_zeeman_orbital(params, field)))
        .and_then(|m| m.add(&zeeman_spin))
        .expect("equal dimensions")
}

/// Excited-state Hamiltonian: the orbital singlet leaves only the 2x2 spin
/// Zeeman block.
pub fn assemble_excited(params: &DefectParameters, field: &FieldConfig) -> HermitianMatrix {
    h_zeeman_spin(params, field, 2).expect("dim 2 is valid")
}
