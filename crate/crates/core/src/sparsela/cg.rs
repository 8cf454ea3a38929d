use super::precond::{Identity, Jacobi, Preconditioner};
use super::{axpy, dot, norm2, residual, CsrMatrix, SolveStats, SolverOptions};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Conjugate gradients for symmetric positive definite `a`, Jacobi
/// preconditioned when `opts.jacobi` is set.
///
/// Converges when `‖b − Ax‖ ≤ tol · ‖b‖` on the recomputed (true) residual.
pub fn cg_solve<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    opts: &SolverOptions<T>,
) -> Result<(Vec<T>, SolveStats)> {
    if opts.jacobi {
        cg_solve_with(a, b, x0, opts, &Jacobi::new(a))
    } else {
        cg_solve_with(a, b, x0, opts, &Identity(a.nrows()))
    }
}

/// Preconditioned conjugate gradients; `opts.jacobi` is ignored.
pub fn cg_solve_with<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    opts: &SolverOptions<T>,
    prec: &dyn Preconditioner<T>,
) -> Result<(Vec<T>, SolveStats)> {
    let n = b.len();
    super::csr::check_dim(a.nrows(), n)?;
    super::csr::check_dim(a.ncols(), n)?;
    let mut x = match x0 {
        Some(x0) => {
            super::csr::check_dim(n, x0.len())?;
            x0.to_vec()
        }
        None => vec![T::zero(); n],
    };
    let bnorm = norm2(b);
    let mut stats = SolveStats::default();
    if bnorm == T::zero() {
        return Ok((vec![T::zero(); n], stats));
    }
    let target = opts.tol * bnorm;
    let budget = opts.budget(n);
    super::csr::check_dim(n, prec.dim())?;
    let precondition = |r: &[T]| -> Vec<T> {
        let mut z = vec![T::zero(); r.len()];
        prec.apply(r, &mut z);
        z
    };

    let mut r = residual(a, &x, b);
    let mut rnorm = norm2(&r);
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];

    while rnorm > target {
        if stats.iterations >= budget {
            return Err(Error::NotConverged {
                solver: "CG",
                iterations: stats.iterations,
                residual: (rnorm / bnorm).as_f64(),
            });
        }
        a.spmv_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            return Err(Error::InvalidParameter(
                "CG encountered a non-positive curvature direction; matrix is not SPD".into(),
            ));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        stats.iterations += 1;
        rnorm = norm2(&r);
        stats.residual_history.push((rnorm / bnorm).as_f64());

        if rnorm <= target {
            // Guard against recurrence drift before declaring convergence.
            r = residual(a, &x, b);
            rnorm = norm2(&r);
            if rnorm <= target {
                break;
            }
            z = precondition(&r);
            rz = dot(&r, &z);
            p = z.clone();
            continue;
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    stats.relative_residual = (rnorm / bnorm).as_f64();
    Ok((x, stats))
}
