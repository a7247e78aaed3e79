//! Sparse linear solvers with an enforced residual contract.
//!
//! Time-independent operators are factored once ([`Factorization`]) and reused
//! every step. Direct solves run a Cholesky factorization when the matrix is
//! symmetric (LU otherwise) followed by iterative refinement until the relative
//! residual meets the contract. The iterative kind is a Jacobi-preconditioned
//! conjugate gradient. Nonsymmetric per-step systems are handled by [`bicgstab`]
//! preconditioned with the factorization of their time-independent part.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;

use super::sparse::{dot, norm2, CsrMatrix};
use super::FemError;

/// Relative residual every linear solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-10;

const MAX_REFINEMENTS: usize = 8;
const CG_MAX_ITER: usize = 20_000;

/// How to prepare a reusable solver for a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Sparse Cholesky (LU for nonsymmetric matrices) with iterative refinement.
    Direct,
    /// Jacobi-preconditioned conjugate gradient; the matrix must be symmetric
    /// positive definite.
    IterativeCg,
}

enum Backend {
    Llt(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
    Jacobi { inv_diag: Vec<f64> },
}

/// A prepared solver holding the matrix and, for the direct kind, its
/// factorization. Preparing once and solving per step keeps factorization
/// counts observable: the expensive work happens only in [`Factorization::new`].
pub struct Factorization {
    mat: CsrMatrix,
    backend: Backend,
}

fn to_faer(mat: &CsrMatrix) -> Result<SparseColMat<usize, f64>, FemError> {
    let mut triplets = Vec::with_capacity(mat.nnz());
    for i in 0..mat.n {
        let (cols, vals) = mat.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            triplets.push(Triplet::new(i, j, v));
        }
    }
    SparseColMat::try_new_from_triplets(mat.n, mat.n, &triplets)
        .map_err(|e| FemError::FactorizationFailed(format!("matrix conversion: {e:?}")))
}

impl Factorization {
    pub fn new(mat: &CsrMatrix, kind: SolverKind) -> Result<Self, FemError> {
        let backend = match kind {
            SolverKind::Direct => {
                let fm = to_faer(mat)?;
                if mat.asymmetry() == 0.0 {
                    match SymbolicLlt::try_new(fm.symbolic(), Side::Lower)
                        .ok()
                        .and_then(|sym| Llt::try_new_with_symbolic(sym, fm.as_ref(), Side::Lower).ok())
                    {
                        Some(llt) => Backend::Llt(llt),
                        // not positive definite: fall back to LU
                        None => Backend::Lu(lu_of(&fm)?),
                    }
                } else {
                    Backend::Lu(lu_of(&fm)?)
                }
            }
            SolverKind::IterativeCg => {
                let diag = mat.diagonal();
                if diag.iter().any(|&d| d <= 0.0) {
                    return Err(FemError::FactorizationFailed(
                        "conjugate gradient needs a positive diagonal".into(),
                    ));
                }
                Backend::Jacobi {
                    inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
                }
            }
        };
        Ok(Factorization {
            mat: mat.clone(),
            backend,
        })
    }

    pub fn n(&self) -> usize {
        self.mat.n
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.mat
    }

    /// One application of the prepared inverse (or preconditioner), without any
    /// residual control. This is the preconditioner hook for [`bicgstab`].
    pub fn apply_inverse(&self, b: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Llt(f) => {
                let bm = Mat::from_fn(b.len(), 1, |i, _| b[i]);
                let x = f.solve(bm.as_ref());
                (0..b.len()).map(|i| x[(i, 0)]).collect()
            }
            Backend::Lu(f) => {
                let bm = Mat::from_fn(b.len(), 1, |i, _| b[i]);
                let x = f.solve(bm.as_ref());
                (0..b.len()).map(|i| x[(i, 0)]).collect()
            }
            Backend::Jacobi { inv_diag } => {
                b.iter().zip(inv_diag).map(|(b, d)| b * d).collect()
            }
        }
    }

    /// Solves to the default residual contract.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, FemError> {
        self.solve_tol(b, RESIDUAL_TOL)
    }

    /// Solves `A x = b` until `‖b - A x‖ ≤ tol·‖b‖`.
    pub fn solve_tol(&self, b: &[f64], tol: f64) -> Result<Vec<f64>, FemError> {
        assert_eq!(b.len(), self.mat.n, "right-hand side size mismatch");
        let b_norm = norm2(b);
        if b_norm == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        match &self.backend {
            Backend::Jacobi { inv_diag } => pcg(&self.mat, inv_diag, b, b_norm, tol),
            _ => self.refine(b, b_norm, tol),
        }
    }

    fn refine(&self, b: &[f64], b_norm: f64, tol: f64) -> Result<Vec<f64>, FemError> {
        let mut x = self.apply_inverse(b);
        let mut r = vec![0.0; b.len()];
        let mut achieved = f64::INFINITY;
        for _ in 0..MAX_REFINEMENTS {
            self.mat.matvec_into(&x, &mut r);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
            achieved = norm2(&r) / b_norm;
            if achieved <= tol {
                return Ok(x);
            }
            let dx = self.apply_inverse(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
        }
        Err(FemError::ResidualTooLarge {
            achieved,
            required: tol,
        })
    }
}

fn lu_of(fm: &SparseColMat<usize, f64>) -> Result<Lu<usize, f64>, FemError> {
    let sym = SymbolicLu::try_new(fm.symbolic())
        .map_err(|e| FemError::FactorizationFailed(format!("symbolic LU: {e:?}")))?;
    Lu::try_new_with_symbolic(sym, fm.as_ref())
        .map_err(|e| FemError::FactorizationFailed(format!("numeric LU: {e:?}")))
}

fn pcg(
    mat: &CsrMatrix,
    inv_diag: &[f64],
    b: &[f64],
    b_norm: f64,
    tol: f64,
) -> Result<Vec<f64>, FemError> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for _ in 0..CG_MAX_ITER {
        if norm2(&r) <= tol * b_norm {
            return Ok(x);
        }
        mat.matvec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            break;
        }
        let alpha = rz / pq;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri -= alpha * qi);
        z.iter_mut()
            .zip(r.iter().zip(inv_diag))
            .for_each(|(zi, (ri, di))| *zi = ri * di);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(FemError::NotConverged {
        max_iter: CG_MAX_ITER,
        residual: norm2(&r) / b_norm,
    })
}

/// Preconditioned BiCGStab for nonsymmetric systems.
///
/// `apply_a` computes `y = A x`; `precond` applies an approximate inverse of `A`
/// (typically the factorization of the time-independent part of the operator).
/// Starts from `x0` when given. Convergence is accepted only after the true
/// residual `‖b - A x‖ ≤ tol·‖b‖` is confirmed; returns the solution and the
/// iteration count.
pub fn bicgstab(
    apply_a: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize), FemError> {
    let n = b.len();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    apply_a(&x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let r_shadow = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut t = vec![0.0; n];

    let true_residual = |x: &[f64], buf: &mut Vec<f64>| -> f64 {
        apply_a(x, buf);
        buf.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        norm2(buf) / b_norm
    };

    let mut last = norm2(&r) / b_norm;
    for it in 0..max_iter {
        if norm2(&r) <= tol * b_norm {
            let mut buf = vec![0.0; n];
            last = true_residual(&x, &mut buf);
            if last <= tol {
                return Ok((x, it));
            }
            r = buf;
        }
        let rho_new = dot(&r_shadow, &r);
        if rho_new.abs() < f64::MIN_POSITIVE {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p.iter_mut()
            .zip(r.iter().zip(&v))
            .for_each(|(pi, (ri, vi))| *pi = ri + beta * (*pi - omega * vi));
        let p_hat = precond(&p);
        apply_a(&p_hat, &mut v);
        let rv = dot(&r_shadow, &v);
        if rv.abs() < f64::MIN_POSITIVE {
            break;
        }
        alpha = rho / rv;
        // s = r - alpha v (reuse r)
        r.iter_mut().zip(&v).for_each(|(ri, vi)| *ri -= alpha * vi);
        let s_hat = precond(&r);
        apply_a(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            x.iter_mut()
                .zip(&p_hat)
                .for_each(|(xi, pi)| *xi += alpha * pi);
            let mut buf = vec![0.0; n];
            last = true_residual(&x, &mut buf);
            if last <= tol {
                return Ok((x, it + 1));
            }
            break;
        }
        omega = dot(&t, &r) / tt;
        x.iter_mut()
            .zip(p_hat.iter().zip(&s_hat))
            .for_each(|(xi, (pi, si))| *xi += alpha * pi + omega * si);
        r.iter_mut().zip(&t).for_each(|(ri, ti)| *ri -= omega * ti);
        last = norm2(&r) / b_norm;
        if omega == 0.0 {
            break;
        }
    }
    if last <= tol {
        return Ok((x, max_iter));
    }
    Err(FemError::NotConverged {
        max_iter,
        residual: last,
    })
}
