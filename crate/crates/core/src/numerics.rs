//! Small dense linear algebra and a damped Newton driver shared by the solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Determinant by LU with partial pivoting.
pub fn determinant(m: DMatrix<f64>) -> f64 {
    m.lu().determinant()
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Solve a square system with row-equilibrated LU. Returns `None` when a pivot
/// is negligible relative to the largest one.
fn solve_square(mut jac: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let mut rhs = rhs.clone();
    for i in 0..jac.nrows() {
        let w = jac.row(i).amax();
        if w > 0.0 {
            jac.row_mut(i).scale_mut(1.0 / w);
            rhs[i] /= w;
        }
    }
    let lu = jac.lu();
    let u = lu.u();
    let diag: Vec<f64> = u.diagonal().iter().map(|x| x.abs()).collect();
    let big = diag.iter().cloned().fold(0.0, f64::max);
    let small = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if big == 0.0 || !(small / big > 1e-15) {
        return None;
    }
    lu.solve(&rhs)
}

/// Minimum-norm least-squares solve by SVD.
fn solve_least_squares(jac: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = jac.svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return None;
    }
    svd.solve(rhs, smax * 1e-13).ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearSolve {
    /// Square system, LU with partial pivoting.
    Square,
    /// Overdetermined consistent system (Gauss-Newton), SVD.
    LeastSquares,
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Number of step halvings tried before giving up on a direction.
    pub max_halvings: usize,
    pub solve: LinearSolve,
    /// Convergence is declared once the residual norm is below `tol * scale`.
    pub scale: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100, max_halvings: 30, solve: LinearSolve::Square, scale: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Damped Newton iteration with backtracking on the residual 2-norm.
///
/// `residual` returns `None` when the point is outside the admissible domain
/// (e.g. a non-positive distance); such trial points are rejected by the line
/// search exactly like points that fail to decrease the residual.
pub fn damped_newton<R, J>(x0: &[f64], residual: R, jacobian: J, opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    R: Fn(&[f64]) -> Option<Vec<f64>>,
    J: Fn(&[f64]) -> DMatrix<f64>,
{
    let mut x = x0.to_vec();
    let mut f =
        residual(&x).ok_or_else(|| Error::Precondition("initial point outside the admissible domain".into()))?;
    let mut fnorm = norm2(&f);
    let mut it = 0;
    let target = opts.tol * opts.scale.max(1.0);
    while fnorm >= target || !fnorm.is_finite() {
        if it >= opts.max_iter || !fnorm.is_finite() {
            return Err(Error::NonConvergence { iterations: it, residual_norm: fnorm });
        }
        it += 1;
        let jac = jacobian(&x);
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|v| -v));
        let step = match opts.solve {
            LinearSolve::Square => solve_square(jac, &rhs),
            LinearSolve::LeastSquares => solve_least_squares(jac, &rhs),
        }
        .ok_or(Error::SingularSystem { iteration: it })?;

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + alpha * d).collect();
            if let Some(ft) = residual(&trial) {
                let n = norm2(&ft);
                if n.is_finite() && n < (1.0 - 1e-4 * alpha) * fnorm {
                    accepted = Some((trial, ft, n));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((xt, ft, n)) => {
                x = xt;
                f = ft;
                fnorm = n;
            }
            None => return Err(Error::NonConvergence { iterations: it, residual_norm: fnorm }),
        }
    }
    Ok(NewtonOutcome { x, residual: f, residual_norm: fnorm, iterations: it })
}

/// Central-difference Jacobian, used where an analytic one is not worth writing.
pub fn fd_jacobian<R>(x: &[f64], residual: R, step: f64) -> DMatrix<f64>
where
    R: Fn(&[f64]) -> Vec<f64>,
{
    let f0 = residual(x);
    let mut jac = DMatrix::zeros(f0.len(), x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let h = step * x[k].abs().max(1.0);
        xp[k] = x[k] + h;
        let fp = residual(&xp);
        xp[k] = x[k] - h;
        let fm = residual(&xp);
        xp[k] = x[k];
        for (row, (a, b)) in fp.iter().zip(fm.iter()).enumerate() {
            jac[(row, k)] = (a - b) / (2.0 * h);
        }
    }
    jac
}
