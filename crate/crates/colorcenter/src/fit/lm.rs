//! Damped least-squares (Levenberg-Marquardt) with numeric Jacobians.
//!
//! The problem is supplied as a residual closure r(p); the engine minimizes
//! chi2 = sum r_i^2. Jacobians are central finite differences, the normal
//! equations carry Marquardt scaling (mu * diag(JtJ)), and the parameter
//! covariance comes from the (pseudo-)inverse of JtJ at the optimum.

use num_complex::Complex64;

use crate::linalg::{eigensolve, HermitianMatrix};

/// Engine tuning knobs. The defaults match the analysis chain: at most 200
/// iterations and a relative step tolerance of 1e-10.
#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the accepted step satisfies |dp| <= tol * (|p| + tol).
    /// Convergence means this criterion fired (or no improving step was
    /// left) on a full-rank problem; exhausting max_iterations does not
    /// count.
    pub step_tolerance: f64,
    pub damping_init: f64,
    pub damping_scale: f64,
    /// Condition-number threshold on JtJ above which the fit is flagged
    /// degenerate.
    pub degeneracy_condition: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-10,
            damping_init: 1e-3,
            damping_scale: 10.0,
            degeneracy_condition: 1e12,
        }
    }
}

/// Raw engine output; fitters wrap this into a `FitResult`.
#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub chi_square: f64,
    pub iterations: usize,
    /// The iteration reached a stationary point (step tolerance or no
    /// improving step left) and the problem is not rank-deficient.
    pub converged: bool,
    pub degenerate: bool,
    /// max_j |J_j^T r| / (|J_j| |r|) at the optimum; 0 for an exact fit.
    pub gradient_cosine: f64,
    /// Diagonal of (JtJ)^-1; infinity along rank-deficient directions.
    pub covariance_diagonal: Vec<f64>,
}

fn chi2(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Central-difference Jacobian, column-major: jac[j][i] = dr_i/dp_j.
fn numeric_jacobian<F>(residuals: &mut F, params: &[f64], n_res: usize) -> Vec<Vec<f64>>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let k = params.len();
    let mut jac = vec![vec![0.0; n_res]; k];
    let mut probe = params.to_vec();
    for j in 0..k {
        let h = (params[j].abs().max(1e-8)) * 1e-6;
        probe[j] = params[j] + h;
        let plus = residuals(&probe);
        probe[j] = params[j] - h;
        let minus = residuals(&probe);
        probe[j] = params[j];
        for i in 0..n_res {
            jac[j][i] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// Solve (A + mu * diag(A)) x = b by Gaussian elimination with partial
/// pivoting; A is the k x k normal matrix.
fn solve_damped(a: &[Vec<f64>], b: &[f64], mu: f64) -> Option<Vec<f64>> {
    let k = b.len();
    let max_diag = (0..k).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 {
        return None;
    }
    let mut m: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row = a[i].clone();
            // keep zero-sensitivity parameters pinned instead of singular
            row[i] += mu * a[i][i].abs().max(1e-12 * max_diag);
            row
        })
        .collect();
    let mut rhs = b.to_vec();
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= f * m[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let mut s = rhs[row];
        for c in (row + 1)..k {
            s -= m[row][c] * x[c];
        }
        x[row] = s / m[row][row];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(x)
}

/// Eigen-decomposition of the symmetric normal matrix, reusing the complex
/// Hermitian solver. Only valid for k in {2, 4}; other sizes fall back to a
/// cyclic real Jacobi here.
fn symmetric_eigenvalues(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = a.len();
    if k == 2 || k == 4 {
        let mut h = HermitianMatrix::zeros(k).expect("supported dim");
        for i in 0..k {
            for j in i..k {
                h.set_pair(i, j, Complex64::new((a[i][j] + a[j][i]) / 2.0, 0.0));
            }
        }
        if let Ok(eig) = eigensolve(&h) {
            let vectors = eig
                .vectors
                .iter()
                .map(|v| v.iter().map(|z| z.re).collect())
                .collect();
            return (eig.values, vectors);
        }
    }
    real_jacobi(a)
}

fn real_jacobi(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; k]; k];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(1e-300);
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..k {
            for q in (p + 1)..k {
                off += m[p][q] * m[p][q];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = m[p][q];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..k {
                    let (mip, miq) = (m[i][p], m[i][q]);
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for i in 0..k {
                    let (mpi, mqi) = (m[p][i], m[q][i]);
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
                for i in 0..k {
                    let (vip, viq) = (v[i][p], v[i][q]);
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let values: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..k).map(|row| v[row][col]).collect())
        .collect();
    (values, vectors)
}

/// Minimize sum r_i(p)^2 from `initial`.
///
/// The residual closure must return a vector of fixed length (>= number of
/// parameters).
pub fn least_squares<F>(mut residuals: F, initial: &[f64], options: &LmOptions) -> LmOutcome
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let k = initial.len();
    let mut params = initial.to_vec();
    let mut r = residuals(&params);
    let n_res = r.len();
    let mut best_chi2 = chi2(&r);
    let mut mu = options.damping_init;
    let mut iterations = 0;
    let mut stationary = false;

    for _ in 0..options.max_iterations {
        iterations += 1;
        let jac = numeric_jacobian(&mut residuals, &params, n_res);
        // normal matrix JtJ and gradient Jtr
        let mut jtj = vec![vec![0.0; k]; k];
        let mut jtr = vec![0.0; k];
        for a in 0..k {
            for b in a..k {
                let s: f64 = (0..n_res).map(|i| jac[a][i] * jac[b][i]).sum();
                jtj[a][b] = s;
                jtj[b][a] = s;
            }
            jtr[a] = (0..n_res).map(|i| jac[a][i] * r[i]).sum();
        }

        let mut accepted = false;
        for _ in 0..30 {
            let rhs: Vec<f64> = jtr.iter().map(|g| -g).collect();
            match solve_damped(&jtj, &rhs, mu) {
                Some(step) => {
                    let trial: Vec<f64> =
                        params.iter().zip(&step).map(|(p, s)| p + s).collect();
                    let trial_r = residuals(&trial);
                    let trial_chi2 = chi2(&trial_r);
                    if trial_chi2 < best_chi2 {
                        let small = step.iter().zip(&params).all(|(s, p)| {
                            s.abs()
                                <= options.step_tolerance
                                    * (p.abs() + options.step_tolerance)
                        });
                        params = trial;
                        r = trial_r;
                        best_chi2 = trial_chi2;
                        mu = (mu / options.damping_scale).max(1e-12);
                        accepted = true;
                        if small {
                            stationary = true;
                        }
                        break;
                    }
                    mu *= options.damping_scale;
                }
                None => mu *= options.damping_scale,
            }
            if mu > 1e14 {
                break;
            }
        }
        if !accepted {
            // no improving step even under heavy damping: a minimum at the
            // numerical resolution of the problem
            stationary = true;
        }
        if stationary {
            break;
        }
    }

    // final gradient and covariance at the optimum
    let jac = numeric_jacobian(&mut residuals, &params, n_res);
    let mut jtj = vec![vec![0.0; k]; k];
    let mut jtr = vec![0.0; k];
    for a in 0..k {
        for b in a..k {
            let s: f64 = (0..n_res).map(|i| jac[a][i] * jac[b][i]).sum();
            jtj[a][b] = s;
            jtj[b][a] = s;
        }
        jtr[a] = (0..n_res).map(|i| jac[a][i] * r[i]).sum();
    }
    let r_norm = best_chi2.sqrt();
    let gradient_cosine = if r_norm > 0.0 {
        (0..k)
            .map(|j| {
                let col = jtj[j][j].sqrt();
                if col > 0.0 {
                    jtr[j].abs() / (col * r_norm)
                } else {
                    0.0
                }
            })
            .fold(0.0f64, f64::max)
    } else {
        0.0
    };

    let (eigvals, eigvecs) = symmetric_eigenvalues(&jtj);
    let max_eig = eigvals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let min_eig = eigvals.iter().fold(f64::INFINITY, |m, &v| m.min(v.max(0.0)));
    let degenerate =
        max_eig <= 0.0 || min_eig <= 0.0 || max_eig / min_eig > options.degeneracy_condition;

    // covariance diagonal via pseudo-inverse of JtJ
    let rank_cut = max_eig * 1e-14;
    let mut covariance_diagonal = vec![0.0; k];
    for j in 0..k {
        let mut acc = 0.0;
        let mut unbounded = false;
        for (value, vector) in eigvals.iter().zip(&eigvecs) {
            let w = vector[j];
            if *value > rank_cut {
                acc += w * w / value;
            } else if w.abs() > 1e-8 {
                unbounded = true;
            }
        }
        covariance_diagonal[j] = if unbounded { f64::INFINITY } else { acc };
    }

    let converged = stationary && !degenerate;

    LmOutcome {
        params,
        chi_square: best_chi2,
        iterations,
        converged,
        degenerate,
        gradient_cosine,
        covariance_diagonal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn quadratic_bowl_converges() {
        // r = [p0 - 3, 2 (p1 + 1)]
        let outcome = least_squares(
            |p| vec![p[0] - 3.0, 2.0 * (p[1] + 1.0)],
            &[0.0, 0.0],
            &LmOptions::default(),
        );
        assert!(outcome.converged);
        assert!(!outcome.degenerate);
        assert_close(outcome.params[0], 3.0, 1e-8);
        assert_close(outcome.params[1], -1.0, 1e-8);
    }

    #[test]
    fn rosenbrock_style_nonlinear() {
        // r = [10 (p1 - p0^2), 1 - p0], minimum at (1, 1)
        let outcome = least_squares(
            |p| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]],
            &[-1.2, 1.0],
            &LmOptions::default(),
        );
        assert!(outcome.converged);
        assert_close(outcome.params[0], 1.0, 1e-6);
        assert_close(outcome.params[1], 1.0, 1e-6);
    }

    #[test]
    fn exponential_recovery() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let data: Vec<f64> = xs.iter().map(|x| 2.5 * (-x / 1.7).exp()).collect();
        let outcome = least_squares(
            |p| {
                xs.iter()
                    .zip(&data)
                    .map(|(x, y)| p[0] * (-x / p[1]).exp() - y)
                    .collect()
            },
            &[1.0, 1.0],
            &LmOptions::default(),
        );
        assert!(outcome.converged);
        assert_close(outcome.params[0], 2.5, 1e-7);
        assert_close(outcome.params[1], 1.7, 1e-7);
        assert!(outcome.chi_square < 1e-16);
    }

    #[test]
    fn flat_direction_is_flagged_degenerate() {
        // second parameter never enters the residuals
        let outcome = least_squares(
            |p| vec![p[0] - 1.0, 2.0 * (p[0] - 1.0) + 1e-14 * p[1]],
            &[0.0, 5.0],
            &LmOptions::default(),
        );
        assert!(outcome.degenerate);
        assert!(!outcome.converged);
        assert!(outcome.covariance_diagonal[1].is_infinite());
    }

    #[test]
    fn covariance_matches_linear_theory() {
        // linear model y = a + b x on a fixed design: cov = (X^T X)^-1
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let data: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x).collect();
        let outcome = least_squares(
            |p| {
                xs.iter()
                    .zip(&data)
                    .map(|(x, y)| p[0] + p[1] * x - y)
                    .collect()
            },
            &[0.0, 0.0],
            &LmOptions::default(),
        );
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let det = n * sxx - sx * sx;
        assert_close(outcome.covariance_diagonal[0], sxx / det, 1e-6);
        assert_close(outcome.covariance_diagonal[1], n / det, 1e-8);
    }
}
