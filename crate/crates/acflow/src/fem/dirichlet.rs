//! Dirichlet boundary conditions by symmetric row/column elimination.
//!
//! A constrained system keeps its original size: constrained rows and columns are
//! zeroed and the eliminated columns are returned separately, so the right-hand
//! side can be corrected (`rhs -= coupling·g`) and the boundary values written in
//! place. Time-independent operators are constrained once and factored once;
//! per-step contributions are constrained with a zero diagonal and added on top.

use super::space::FeSpace;
use super::sparse::CsrMatrix;

/// A fixed set of constrained degrees of freedom in a linear system.
#[derive(Debug, Clone)]
pub struct DirichletConstraint {
    mask: Vec<bool>,
    dofs: Vec<usize>,
}

impl DirichletConstraint {
    /// Constrains the given system indices (deduplicated, order-independent).
    pub fn new(n_system: usize, dofs: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = vec![false; n_system];
        for d in dofs {
            mask[d] = true;
        }
        let dofs = (0..n_system).filter(|&i| mask[i]).collect();
        DirichletConstraint { mask, dofs }
    }

    /// Constrains every boundary node of a scalar space.
    pub fn scalar_boundary(space: &FeSpace) -> Self {
        Self::new(space.n_dofs(), space.boundary_dofs().iter().copied())
    }

    /// Constrains both components of every boundary node of a vector space.
    pub fn vector_boundary(space: &FeSpace) -> Self {
        let n = space.n_dofs();
        Self::new(
            2 * n,
            space
                .boundary_dofs()
                .iter()
                .flat_map(|&d| [d, d + n]),
        )
    }

    /// No constraints at all (pure Neumann systems).
    pub fn none(n_system: usize) -> Self {
        Self::new(n_system, std::iter::empty())
    }

    pub fn n_system(&self) -> usize {
        self.mask.len()
    }

    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.mask[i]
    }
}

/// Zeroes constrained rows and columns of `mat`.
///
/// Returns the constrained matrix and the coupling matrix holding the eliminated
/// columns of the free rows, used by [`set_constrained_rhs`]. With `unit_diag`
/// the constrained diagonal is set to one (the form to factor); without it the
/// diagonal stays zero, so per-step matrices can be added to an already
/// constrained operator.
pub fn constrain_matrix(
    mat: &CsrMatrix,
    constraint: &DirichletConstraint,
    unit_diag: bool,
) -> (CsrMatrix, CsrMatrix) {
    assert_eq!(mat.n, constraint.n_system(), "constraint size mismatch");
    let mut kept = Vec::with_capacity(mat.nnz());
    let mut coupling = Vec::new();
    for i in 0..mat.n {
        if constraint.is_constrained(i) {
            if unit_diag {
                kept.push((i, i, 1.0));
            }
            continue;
        }
        let (cols, vals) = mat.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if constraint.is_constrained(j) {
                coupling.push((i, j, v));
            } else {
                kept.push((i, j, v));
            }
        }
    }
    (
        CsrMatrix::from_triplets(mat.n, &kept),
        CsrMatrix::from_triplets(mat.n, &coupling),
    )
}

/// Applies boundary values to a right-hand side: `rhs -= coupling·g`, then
/// `rhs[d] = g[d]` on every constrained dof. `g` is a full-length vector whose
/// entries only matter at constrained positions.
pub fn set_constrained_rhs(
    rhs: &mut [f64],
    coupling: &CsrMatrix,
    constraint: &DirichletConstraint,
    g: &[f64],
) {
    assert_eq!(rhs.len(), constraint.n_system());
    assert_eq!(g.len(), constraint.n_system());
    for i in 0..coupling.n {
        let (cols, vals) = coupling.row(i);
        let acc: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * g[j]).sum();
        rhs[i] -= acc;
    }
    for &d in constraint.dofs() {
        rhs[d] = g[d];
    }
}

/// One-shot elimination for a system solved once: constrains the matrix and
/// fixes up the right-hand side in place. Returns the constrained matrix.
pub fn apply_dirichlet(
    mat: &CsrMatrix,
    rhs: &mut [f64],
    constraint: &DirichletConstraint,
    g: &[f64],
) -> CsrMatrix {
    let (constrained, coupling) = constrain_matrix(mat, constraint, true);
    set_constrained_rhs(rhs, &coupling, constraint, g);
    constrained
}
