//! Preconditioned MINRES (Paige & Saunders) for symmetric, possibly
//! indefinite systems. The preconditioner must be SPD.

use super::precond::{Identity, Jacobi, Preconditioner};
use super::{axpy, dot, norm2, residual, CsrMatrix, SolveStats, SolverOptions};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves `a x = b`. Converges when the recomputed residual satisfies
/// `‖b − Ax‖ ≤ tol · ‖b‖`; if the Lanczos estimate says converged but the true
/// residual disagrees, the iteration restarts from the current iterate.
///
/// With `opts.jacobi` the preconditioner is `diag(|a_ii|)`.
pub fn minres_solve<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    opts: &SolverOptions<T>,
) -> Result<(Vec<T>, SolveStats)> {
    if opts.jacobi {
        minres_solve_with(a, b, x0, opts, &Jacobi::new(a))
    } else {
        minres_solve_with(a, b, x0, opts, &Identity(a.nrows()))
    }
}

/// MINRES with an explicit SPD preconditioner; `opts.jacobi` is ignored.
pub fn minres_solve_with<T: Real>(
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
    let mut z = vec![T::zero(); n];

    loop {
        let r = residual(a, &x, b);
        let rnorm = norm2(&r);
        if rnorm <= target {
            stats.relative_residual = (rnorm / bnorm).as_f64();
            return Ok((x, stats));
        }
        if stats.iterations >= budget {
            return Err(Error::NotConverged {
                solver: "MINRES",
                iterations: stats.iterations,
                residual: (rnorm / bnorm).as_f64(),
            });
        }
        // The Lanczos estimate tracks ‖r‖ in the P⁻¹ norm; scale the
        // stopping threshold by the ratio at the start of the cycle.
        prec.apply(&r, &mut z);
        let pr = dot(&r, &z).max(T::zero()).sqrt();
        let inner_target = target * pr / rnorm;
        lanczos_cycle(a, &r, prec, inner_target, budget, &mut x, &mut stats);
    }
}

/// One MINRES run started from residual `r0`, updating `x` in place.
fn lanczos_cycle<T: Real>(
    a: &CsrMatrix<T>,
    r0: &[T],
    prec: &dyn Preconditioner<T>,
    target: T,
    budget: usize,
    x: &mut [T],
    stats: &mut SolveStats,
) {
    let n = r0.len();
    let apply_prec = |src: &[T], dst: &mut Vec<T>| {
        dst.resize(src.len(), T::zero());
        prec.apply(src, dst);
    };

    let mut r1 = r0.to_vec();
    let mut r2 = r0.to_vec();
    let mut y = Vec::with_capacity(n);
    apply_prec(&r1, &mut y);
    let beta1 = dot(&r1, &y).sqrt();
    if beta1 == T::zero() {
        return;
    }

    let mut oldb = T::zero();
    let mut beta = beta1;
    let mut dbar = T::zero();
    let mut epsln = T::zero();
    let mut phibar = beta1;
    let mut cs = -T::one();
    let mut sn = T::zero();
    let mut w = vec![T::zero(); n];
    let mut w1 = vec![T::zero(); n];
    let mut w2 = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    let mut av = vec![T::zero(); n];
    let mut first = true;

    while stats.iterations < budget {
        let s = T::one() / beta;
        for (vi, &yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        a.spmv_into(&v, &mut av);
        if !first {
            axpy(-(beta / oldb), &r1, &mut av);
        }
        first = false;
        let alfa = dot(&v, &av);
        axpy(-(alfa / beta), &r2, &mut av);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&av);
        apply_prec(&r2, &mut y);
        oldb = beta;
        beta = dot(&r2, &y).max(T::zero()).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(T::epsilon());
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;

        let denom = T::one() / gamma;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
        }
        axpy(phi, &w, x);

        stats.iterations += 1;
        stats.residual_history.push(phibar.as_f64());
        if phibar <= target || beta == T::zero() {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![3.0, -1.0, 2.0];
        let (x, _) = minres_solve(&CsrMatrix::<f64>::identity(3), &b, None, &SolverOptions::minres_default()).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_indefinite() {
        let a = CsrMatrix::<f64>::from_diagonal(&[1.0, -1.0]);
        let (x, _) = minres_solve(&a, &[2.0, 3.0], None, &SolverOptions::minres_default()).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!((x[1] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_handles_badly_scaled_blocks() {
        let a = CsrMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1e-4), (0, 1, 1e-3), (1, 0, 1e-3), (1, 1, -5.0), (2, 2, 1e3)],
        )
        .unwrap();
        let b = [1.0, 1.0, 1.0];
        let opts = SolverOptions {
            tol: 1e-12,
            max_iter: None,
            jacobi: true,
        };
        let (x, st) = minres_solve(&a, &b, None, &opts).unwrap();
        let r = residual(&a, &x, &b);
        assert!(norm2(&r) <= 1e-12 * norm2(&b));
        assert!(st.relative_residual <= 1e-12);
    }

    #[test]
    fn zero_rhs() {
        let a = CsrMatrix::<f64>::identity(2);
        let (x, st) = minres_solve(&a, &[0.0, 0.0], None, &SolverOptions::minres_default()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(st.iterations, 0);
    }
}
