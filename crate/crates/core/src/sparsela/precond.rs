//! Symmetric positive definite preconditioners for [`cg_solve_with`] and
//! [`minres_solve_with`].
//!
//! [`cg_solve_with`]: super::cg_solve_with
//! [`minres_solve_with`]: super::minres_solve_with

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Applies `z = P⁻¹ r` for a fixed SPD `P`.
pub trait Preconditioner<T: Real>: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, r: &[T], z: &mut [T]);
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl<T: Real> Preconditioner<T> for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

/// `P = diag(|a_ii|)`; zero diagonal entries are treated as one.
#[derive(Debug, Clone)]
pub struct Jacobi<T> {
    inv: Vec<T>,
}

impl<T: Real> Jacobi<T> {
    pub fn new(a: &CsrMatrix<T>) -> Self {
        let inv = a
            .diagonal()
            .into_iter()
            .map(|d| if d == T::zero() { T::one() } else { T::one() / d.abs() })
            .collect();
        Self { inv }
    }
}

impl<T: Real> Preconditioner<T> for Jacobi<T> {
    fn dim(&self) -> usize {
        self.inv.len()
    }

    fn apply(&self, r: &[T], z: &mut [T]) {
        for ((zi, &ri), &di) in z.iter_mut().zip(r).zip(&self.inv) {
            *zi = ri * di;
        }
    }
}

/// Zero fill-in incomplete Cholesky `P = L Lᵀ` on the sparsity pattern of
/// the lower triangle. If a pivot fails, the factorization is retried on
/// `A + α diag(A)` with growing `α`.
#[derive(Debug, Clone)]
pub struct IncompleteCholesky<T> {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// Strictly lower entries of each row, then the diagonal.
    values: Vec<T>,
    shift: T,
}

impl<T: Real> IncompleteCholesky<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                actual: a.ncols(),
            });
        }
        let mut shift = T::zero();
        for _ in 0..20 {
            if let Some(f) = Self::factor(a, shift) {
                return Ok(f);
            }
            shift = if shift == T::zero() { T::lit(1e-3) } else { shift * T::lit(4.0) };
        }
        Err(Error::InvalidParameter(
            "incomplete Cholesky failed; matrix is far from positive definite".into(),
        ))
    }

    /// Diagonal shift that was needed for a stable factorization.
    pub fn shift(&self) -> T {
        self.shift
    }

    fn factor(a: &CsrMatrix<T>, shift: T) -> Option<Self> {
        let n = a.nrows();
        let (rp, ci, va) = (a.row_ptr(), a.col_idx(), a.values());
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            let mut diag = T::zero();
            for k in rp[i]..rp[i + 1] {
                match ci[k].cmp(&i) {
                    std::cmp::Ordering::Less => {
                        col_idx.push(ci[k]);
                        values.push(va[k]);
                    }
                    std::cmp::Ordering::Equal => diag = va[k],
                    std::cmp::Ordering::Greater => {}
                }
            }
            col_idx.push(i);
            values.push(diag * (T::one() + shift));
            row_ptr.push(col_idx.len());
        }

        for i in 0..n {
            let dpos = row_ptr[i + 1] - 1;
            for kk in row_ptr[i]..=dpos {
                let j = col_idx[kk];
                let jdiag = row_ptr[j + 1] - 1;
                let mut s = values[kk];
                let (mut p, mut q) = (row_ptr[i], row_ptr[j]);
                while p < kk && q < jdiag {
                    match col_idx[p].cmp(&col_idx[q]) {
                        std::cmp::Ordering::Equal => {
                            s -= values[p] * values[q];
                            p += 1;
                            q += 1;
                        }
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                    }
                }
                if j == i {
                    if !(s > T::zero()) || !s.is_finite() {
                        return None;
                    }
                    values[kk] = s.sqrt();
                } else {
                    values[kk] = s / values[jdiag];
                }
            }
        }
        Some(Self {
            row_ptr,
            col_idx,
            values,
            shift,
        })
    }
}

impl<T: Real> Preconditioner<T> for IncompleteCholesky<T> {
    fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn apply(&self, r: &[T], z: &mut [T]) {
        let n = self.dim();
        let (rp, ci, v) = (&self.row_ptr, &self.col_idx, &self.values);
        for i in 0..n {
            let d = rp[i + 1] - 1;
            let mut s = r[i];
            for k in rp[i]..d {
                s -= v[k] * z[ci[k]];
            }
            z[i] = s / v[d];
        }
        for i in (0..n).rev() {
            let d = rp[i + 1] - 1;
            z[i] /= v[d];
            let zi = z[i];
            for k in rp[i]..d {
                z[ci[k]] -= v[k] * zi;
            }
        }
    }
}

/// Symmetric Gauss–Seidel `P = (D + L) D⁻¹ (D + U)`; SPD whenever `A` is
/// SPD, with no breakdown.
#[derive(Debug, Clone)]
pub struct SymmetricGaussSeidel<T: Real> {
    a: CsrMatrix<T>,
    diag: Vec<T>,
}

impl<T: Real> SymmetricGaussSeidel<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self> {
        let diag = a.diagonal();
        if let Some(i) = diag.iter().position(|&d| !(d > T::zero())) {
            return Err(Error::InvalidParameter(format!(
                "symmetric Gauss-Seidel needs a positive diagonal; row {i} fails"
            )));
        }
        Ok(Self { a: a.clone(), diag })
    }
}

impl<T: Real> Preconditioner<T> for SymmetricGaussSeidel<T> {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, r: &[T], z: &mut [T]) {
        let n = self.dim();
        let (rp, ci, v) = (self.a.row_ptr(), self.a.col_idx(), self.a.values());
        for i in 0..n {
            let mut s = r[i];
            for k in rp[i]..rp[i + 1] {
                if ci[k] < i {
                    s -= v[k] * z[ci[k]];
                }
            }
            z[i] = s / self.diag[i];
        }
        for i in 0..n {
            z[i] *= self.diag[i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in rp[i]..rp[i + 1] {
                if ci[k] > i {
                    s -= v[k] * z[ci[k]];
                }
            }
            z[i] = s / self.diag[i];
        }
    }
}

/// Block-diagonal combination of preconditioners over consecutive index
/// ranges.
pub struct BlockDiagonal<T: Real> {
    blocks: Vec<Box<dyn Preconditioner<T>>>,
}

impl<T: Real> BlockDiagonal<T> {
    pub fn new(blocks: Vec<Box<dyn Preconditioner<T>>>) -> Self {
        Self { blocks }
    }
}

impl<T: Real> std::fmt::Debug for BlockDiagonal<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let dims: Vec<usize> = self.blocks.iter().map(|b| b.dim()).collect();
        f.debug_struct("BlockDiagonal").field("dims", &dims).finish()
    }
}

impl<T: Real> Preconditioner<T> for BlockDiagonal<T> {
    fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }

    fn apply(&self, r: &[T], z: &mut [T]) {
        let mut off = 0;
        for b in &self.blocks {
            let n = b.dim();
            b.apply(&r[off..off + n], &mut z[off..off + n]);
            off += n;
        }
    }
}
