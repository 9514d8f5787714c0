//! Small dense complex Hermitian matrices and their eigendecomposition.
//!
//! The defect Hamiltonians are 2x2 and 4x4, so a cyclic complex Jacobi
//! iteration is used: it is branch-free to implement, unconditionally stable
//! for Hermitian input, and converges to machine precision in a handful of
//! sweeps at these sizes.

use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance used to decide whether a matrix is Hermitian.
pub const HERMITICITY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix dimension {0} is not supported (expected 2 or 4)")]
    UnsupportedDimension(usize),
    #[error("entry count {got} does not match dimension {dim} (expected {})", dim * dim)]
    EntryCount { dim: usize, got: usize },
    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:.3e} exceeds {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("matrix entries must be finite")]
    NonFinite,
}

/// Dense complex matrix constrained to be Hermitian, entries in GHz.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Zero matrix of the given dimension (2 or 4).
    pub fn zeros(dim: usize) -> Result<Self, LinalgError> {
        if dim != 2 && dim != 4 {
            return Err(LinalgError::UnsupportedDimension(dim));
        }
        Ok(Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        })
    }

    /// Build from row-major entries, verifying Hermiticity to
    /// [`HERMITICITY_REL_TOL`] relative to the Frobenius norm.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        if dim != 2 && dim != 4 {
            return Err(LinalgError::UnsupportedDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(LinalgError::EntryCount {
                dim,
                got: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let m = Self { dim, data: entries };
        let scale = m.frobenius_norm();
        let dev = m.hermiticity_deviation();
        let tol = HERMITICITY_REL_TOL * scale.max(1e-300);
        if dev > tol {
            return Err(LinalgError::NotHermitian {
                deviation: dev,
                tol,
            });
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    /// Set `A[i][j] = value` and `A[j][i] = conj(value)` in one step.
    pub fn set_pair(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value.conj();
        if i == j {
            // keep the diagonal exactly real
            self.data[i * self.dim + i] = Complex64::new(value.re, 0.0);
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute deviation from `A = A^H`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Sum of two matrices of equal dimension.
    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::UnsupportedDimension(other.dim));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            dim: self.dim,
            data,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }
}

/// Eigenvalues (ascending, GHz) and orthonormal eigenvectors of a Hermitian
/// matrix. `vectors[k]` is the eigenvector belonging to `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

impl EigenSystem {
    /// `max_k ||H v_k - E_k v_k|| / ||H||_F`, the relative eigen-residual.
    pub fn relative_residual(&self, h: &HermitianMatrix) -> f64 {
        let scale = h.frobenius_norm().max(1e-300);
        let n = h.dim();
        let mut worst: f64 = 0.0;
        for (value, vector) in self.values.iter().zip(&self.vectors) {
            let mut res: f64 = 0.0;
            for i in 0..n {
                let mut hv = Complex64::ZERO;
                for j in 0..n {
                    hv += h.get(i, j) * vector[j];
                }
                res += (hv - value * vector[i]).norm_sqr();
            }
            worst = worst.max(res.sqrt());
        }
        worst / scale
    }

    /// Largest deviation of `V^H V` from the identity.
    pub fn orthonormality_deviation(&self) -> f64 {
        let n = self.vectors.len();
        let mut dev: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let dot: Complex64 = self.vectors[a]
                    .iter()
                    .zip(&self.vectors[b])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((dot - expected).norm());
            }
        }
        dev
    }
}

/// Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order with matching orthonormal
/// eigenvectors. Rejects input whose Hermiticity deviation exceeds the
/// construction tolerance (possible after repeated in-place arithmetic).
pub fn eigensolve(h: &HermitianMatrix) -> Result<EigenSystem, LinalgError> {
    let scale = h.frobenius_norm();
    let dev = h.hermiticity_deviation();
    if dev > HERMITICITY_REL_TOL * scale.max(1e-300) {
        return Err(LinalgError::NotHermitian {
            deviation: dev,
            tol: HERMITICITY_REL_TOL * scale.max(1e-300),
        });
    }

    let n = h.dim();
    let mut a: Vec<Complex64> = h.entries().to_vec();
    let mut v: Vec<Complex64> = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::ONE;
    }

    let idx = |i: usize, j: usize| i * n + j;
    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[idx(p, q)].norm_sqr();
            }
        }
        s.sqrt()
    };

    let stop = 1e-15 * scale.max(1e-300);
    for _sweep in 0..50 {
        if off_norm(&a) <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                let r = apq.norm();
                if r <= stop / (n as f64) {
                    continue;
                }
                let app = a[idx(p, p)].re;
                let aqq = a[idx(q, q)].re;
                // Rotation angle for the phase-stripped real 2x2 block.
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let phase = apq / r; // e^{i arg(apq)}
                let s_phase = phase * s;

                // Columns: B = A U with U[p][p]=c, U[p][q]=s e^{i phi},
                // U[q][p]=-s e^{-i phi}, U[q][q]=c.
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s_phase.conj() * akq;
                    a[idx(k, q)] = s_phase * akp + c * akq;
                }
                // Rows: A' = U^H B.
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s_phase * aqk;
                    a[idx(q, k)] = s_phase.conj() * apk + c * aqk;
                }
                // Accumulate eigenvectors: V = V U.
                for k in 0..n {
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = c * vkp - s_phase.conj() * vkq;
                    v[idx(k, q)] = s_phase * vkp + c * vkq;
                }
                // Enforce the algebraic zero.
                a[idx(p, q)] = Complex64::ZERO;
                a[idx(q, p)] = Complex64::ZERO;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[idx(i, i)].re.total_cmp(&a[idx(j, j)].re));

    let values = order.iter().map(|&k| a[idx(k, k)].re).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| v[idx(i, k)]).collect())
        .collect();
    Ok(EigenSystem { values, vectors })
}

/// Group ascending eigenvalues into degenerate clusters using an absolute
/// tolerance (1e-6 GHz unless stated otherwise).
pub fn degenerate_groups(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &value) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(group) if (value - values[group[0]]).abs() <= tol => group.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
}
