//! Sparse matrices, block vectors and the Krylov solvers used by the
//! harmonic-form solve, the initial projection and the time stepper.

mod block;
mod cg;
mod csr;
pub mod io;
mod minres;
pub mod precond;

pub use block::BlockVector;
pub use cg::{cg_solve, cg_solve_with};
pub use csr::CsrMatrix;
pub use minres::{minres_solve, minres_solve_with};
pub use precond::{BlockDiagonal, IncompleteCholesky, Jacobi, Preconditioner, SymmetricGaussSeidel};

use crate::scalar::Real;

/// Convergence controls shared by [`cg_solve`] and [`minres_solve`].
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    /// Target relative residual `‖b − Ax‖ / ‖b‖`.
    pub tol: T,
    /// Iteration budget; `None` means `10 · n`.
    pub max_iter: Option<usize>,
    /// Diagonal (Jacobi) preconditioning, using `|a_ii|` for MINRES.
    pub jacobi: bool,
}

impl<T: Real> SolverOptions<T> {
    pub fn cg_default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: None,
            jacobi: false,
        }
    }

    pub fn minres_default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: None,
            jacobi: false,
        }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub(crate) fn budget(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final true relative residual `‖b − Ax‖ / ‖b‖`.
    pub relative_residual: f64,
    /// Residual estimate after each iteration (solver-specific norm).
    pub residual_history: Vec<f64>,
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn residual<T: Real>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> Vec<T> {
    let mut r = vec![T::zero(); b.len()];
    a.spmv_into(x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

