//! Krylov drivers: preconditioned conjugate gradients and restarted GMRES.
//!
//! All inner products go through the fixed-shape reductions in
//! [`crate::parallel`], so a solve is bit-reproducible across thread counts
//! whenever the preconditioner is (ours are). Failure modes are reported as
//! values: breakdown and stagnation both return the partial [`SolveReport`]
//! instead of panicking or spinning.

use crate::matrix::SparseMatrix;
use crate::parallel::{det_dot, norm2};
use crate::Real;

/// Application of an (approximate) inverse: `z = M^-1 r`.
pub trait Preconditioner<T>: Sync {
    fn apply(&self, r: &[T]) -> Vec<T>;
}

/// No preconditioning: `z = r`.
pub struct IdentityPrecond;

impl<T: Real> Preconditioner<T> for IdentityPrecond {
    fn apply(&self, r: &[T]) -> Vec<T> {
        r.to_vec()
    }
}

/// Outcome of a solve. `residual_history[k]` is the relative residual
/// 2-norm after `k` iterations, so the history always has
/// `iterations + 1` entries and starts at the initial residual.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport<T> {
    pub iterations: usize,
    pub converged: bool,
    pub final_relative_residual: T,
    pub residual_history: Vec<T>,
}

impl<T: Real> SolveReport<T> {
    fn from_history(residual_history: Vec<T>, converged: bool) -> SolveReport<T> {
        let final_relative_residual = *residual_history.last().expect("history never empty");
        SolveReport {
            iterations: residual_history.len() - 1,
            converged,
            final_relative_residual,
            residual_history,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverError<T> {
    /// A quantity the recurrence divides by lost positivity (conjugate
    /// gradients on a non-SPD system, or a singular projected system in
    /// GMRES). The report covers the iterations completed before the failure.
    Breakdown { what: &'static str, report: SolveReport<T> },
    /// A full GMRES restart cycle finished without reducing the residual.
    Stagnation { report: SolveReport<T> },
}

impl<T: Real> std::fmt::Display for SolverError<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverError::Breakdown { what, report } => {
                write!(f, "breakdown after {} iterations: {what}", report.iterations)
            }
            SolverError::Stagnation { report } => write!(
                f,
                "no residual progress over a full restart cycle ({} iterations done)",
                report.iterations
            ),
        }
    }
}

impl<T: Real> std::error::Error for SolverError<T> {}

fn residual_vec<T: Real>(a: &SparseMatrix<T>, b: &[T], x: &[T]) -> Vec<T> {
    let ax = a.matvec(x);
    b.iter().zip(&ax).map(|(&bi, &axi)| bi - axi).collect()
}

fn axpy<T: Real>(y: &mut [T], alpha: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

fn check_system<T: Real>(a: &SparseMatrix<T>, b: &[T], x0: &[T]) {
    assert_eq!(a.num_rows(), a.num_cols(), "solver needs a square matrix");
    assert_eq!(b.len(), a.num_rows(), "right-hand side has the wrong length");
    assert_eq!(x0.len(), a.num_rows(), "initial guess has the wrong length");
}

/// Preconditioned conjugate gradients for SPD systems.
///
/// Stops when the relative residual 2-norm drops to `tol`, the iteration
/// budget runs out (an `Ok` report with `converged: false`), or positivity of
/// `p' A p` / `r' z` fails (a [`SolverError::Breakdown`], which is how an
/// indefinite matrix or preconditioner announces itself).
pub fn pcg<T: Real>(
    a: &SparseMatrix<T>,
    b: &[T],
    x0: &[T],
    m: &dyn Preconditioner<T>,
    tol: T,
    max_iterations: usize,
) -> Result<(Vec<T>, SolveReport<T>), SolverError<T>> {
    check_system(a, b, x0);
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        // The SPD solution of Ax = 0.
        let x = vec![T::zero(); b.len()];
        return Ok((x, SolveReport::from_history(vec![T::zero()], true)));
    }

    let mut x = x0.to_vec();
    let mut r = residual_vec(a, b, &x);
    let mut history = vec![norm2(&r) / bnorm];
    if history[0] <= tol {
        return Ok((x, SolveReport::from_history(history, true)));
    }

    let mut z = m.apply(&r);
    let mut rz = det_dot(&r, &z);
    if !(rz > T::zero() && rz.is_finite()) {
        return Err(SolverError::Breakdown {
            what: "preconditioned inner product r'z is not positive",
            report: SolveReport::from_history(history, false),
        });
    }
    let mut p = z.clone();

    for _ in 0..max_iterations {
        let ap = a.matvec(&p);
        let pap = det_dot(&p, &ap);
        if !(pap > T::zero() && pap.is_finite()) {
            return Err(SolverError::Breakdown {
                what: "curvature p'Ap is not positive",
                report: SolveReport::from_history(history, false),
            });
        }
        let alpha = rz / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let relres = norm2(&r) / bnorm;
        history.push(relres);
        if relres <= tol {
            return Ok((x, SolveReport::from_history(history, true)));
        }

        z = m.apply(&r);
        let rz_next = det_dot(&r, &z);
        if !(rz_next > T::zero() && rz_next.is_finite()) {
            return Err(SolverError::Breakdown {
                what: "preconditioned inner product r'z is not positive",
                report: SolveReport::from_history(history, false),
            });
        }
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Ok((x, SolveReport::from_history(history, false)))
}

/// Least squares `min || beta e1 - H y ||` for the `(k+1) x k` Hessenberg
/// column set, by dense Householder QR. Columns arrive as `hcols[c]` of
/// length `c + 2`. Returns the minimizer and the residual norm, or `None`
/// when a column is singular (zero norm below the eliminated rows).
fn householder_lstsq<T: Real>(hcols: &[Vec<T>], beta: T) -> Option<(Vec<T>, T)> {
    let k = hcols.len();
    let m = k + 1;
    let two = T::one() + T::one();
    // Column-major working copy, padded to full height.
    let mut r: Vec<Vec<T>> = hcols
        .iter()
        .map(|col| {
            let mut full = vec![T::zero(); m];
            full[..col.len()].copy_from_slice(col);
            full
        })
        .collect();
    let mut g = vec![T::zero(); m];
    g[0] = beta;

    let mut v = vec![T::zero(); m];
    for j in 0..k {
        let mut norm_sq = T::zero();
        for i in j..m {
            norm_sq = norm_sq + r[j][i] * r[j][i];
        }
        let norm = norm_sq.sqrt();
        if norm == T::zero() {
            return None;
        }
        let alpha = if r[j][j] >= T::zero() { -norm } else { norm };
        for i in j..m {
            v[i] = r[j][i];
        }
        v[j] = v[j] - alpha;
        let mut vtv = T::zero();
        for i in j..m {
            vtv = vtv + v[i] * v[i];
        }
        // No cancellation in v[j], so vtv >= norm^2 > 0.
        let reflect = |col: &mut Vec<T>| {
            let mut dot = T::zero();
            for i in j..m {
                dot = dot + v[i] * col[i];
            }
            let t = two * dot / vtv;
            for i in j..m {
                col[i] = col[i] - t * v[i];
            }
        };
        for col in r.iter_mut().skip(j + 1) {
            reflect(col);
        }
        reflect(&mut g);
        r[j][j] = alpha;
    }

    let mut y = vec![T::zero(); k];
    for j in (0..k).rev() {
        let mut s = g[j];
        for c in j + 1..k {
            s = s - r[c][j] * y[c];
        }
        y[j] = s / r[j][j];
    }
    Some((y, g[k].abs()))
}

/// Restarted GMRES with right preconditioning.
///
/// The preconditioned directions are stored alongside the orthonormal basis
/// (flexible variant), the Arnoldi process uses modified Gram-Schmidt with
/// deterministic dot products, and the projected least-squares problem is
/// re-solved each step by Householder QR. At every restart the true residual
/// is recomputed and replaces the last implicit estimate (same iterate,
/// sharper measurement), so reported convergence is never an artifact of the
/// recurrence. A restart cycle that completes without improving the residual
/// returns [`SolverError::Stagnation`].
pub fn gmres<T: Real>(
    a: &SparseMatrix<T>,
    b: &[T],
    x0: &[T],
    m: &dyn Preconditioner<T>,
    tol: T,
    max_iterations: usize,
    restart: usize,
) -> Result<(Vec<T>, SolveReport<T>), SolverError<T>> {
    check_system(a, b, x0);
    assert!(restart >= 1, "restart window must be at least 1");
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        let x = vec![T::zero(); b.len()];
        return Ok((x, SolveReport::from_history(vec![T::zero()], true)));
    }

    let mut x = x0.to_vec();
    let mut r = residual_vec(a, b, &x);
    let mut relres = norm2(&r) / bnorm;
    let mut history = vec![relres];
    if relres <= tol {
        return Ok((x, SolveReport::from_history(history, true)));
    }
    let mut total = 0usize;

    loop {
        let cycle_start = relres;
        let beta = norm2(&r);
        let mut basis: Vec<Vec<T>> = vec![r.iter().map(|&ri| ri / beta).collect()];
        let mut directions: Vec<Vec<T>> = Vec::new();
        let mut hcols: Vec<Vec<T>> = Vec::new();
        let mut y: Vec<T> = Vec::new();
        let mut hit_tol = false;
        let mut exhausted = false;

        while directions.len() < restart && total < max_iterations {
            let j = directions.len();
            let z = m.apply(&basis[j]);
            let mut w = a.matvec(&z);
            directions.push(z);
            let mut col = Vec::with_capacity(j + 2);
            for vi in basis.iter() {
                let hij = det_dot(&w, vi);
                axpy(&mut w, -hij, vi);
                col.push(hij);
            }
            let hnext = norm2(&w);
            col.push(hnext);
            hcols.push(col);

            let (yj, lstsq_residual) = match householder_lstsq(&hcols, beta) {
                Some(solved) => solved,
                None => {
                    return Err(SolverError::Breakdown {
                        what: "projected least-squares system is singular",
                        report: SolveReport::from_history(history, false),
                    })
                }
            };
            y = yj;
            total += 1;
            relres = lstsq_residual / bnorm;
            history.push(relres);
            if relres <= tol {
                hit_tol = true;
                break;
            }
            if hnext == T::zero() {
                // The Krylov space is exhausted; no further direction exists.
                exhausted = true;
                break;
            }
            basis.push(w.iter().map(|&wi| wi / hnext).collect());
        }

        let inner = directions.len().min(y.len());
        for (yc, zc) in y.iter().zip(directions.iter()).take(inner) {
            axpy(&mut x, *yc, zc);
        }
        // True residual at the restart point; it refines the last implicit
        // entry, which described this same iterate.
        r = residual_vec(a, b, &x);
        relres = norm2(&r) / bnorm;
        if inner > 0 {
            *history.last_mut().expect("history never empty") = relres;
        }

        if relres <= tol {
            return Ok((x, SolveReport::from_history(history, true)));
        }
        if total >= max_iterations {
            return Ok((x, SolveReport::from_history(history, false)));
        }
        if exhausted {
            return Err(SolverError::Breakdown {
                what: "Krylov space exhausted above the tolerance",
                report: SolveReport::from_history(history, false),
            });
        }
        if !hit_tol && relres >= cycle_start {
            return Err(SolverError::Stagnation {
                report: SolveReport::from_history(history, false),
            });
        }
    }
}
