//! Galerkin assembly of the bilinear and linear forms used by the scheme.
//!
//! Every form is integrated with the fixed degree-5 rule. Assembly walks cells,
//! quadrature points, and local nodes in a fixed order and accumulates through a
//! stable triplet sort, so repeated assembly of the same form is bitwise identical.

use std::sync::Arc;

use super::field::{ScalarField, VectorField};
use super::quadrature::{degree5, QuadRule};
use super::space::{grad_lambda, p2_grad_coeffs, p2_values};
use super::sparse::CsrMatrix;
use super::{FeSpace, FemError};

/// A cell-wise scalar coefficient.
#[derive(Debug, Clone, Copy)]
pub enum Coefficient<'a> {
    Constant(f64),
    PerCell(&'a [f64]),
}

impl Coefficient<'_> {
    fn at(&self, cell: usize) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::PerCell(v) => v[cell],
        }
    }
}

/// Bilinear forms on a scalar space.
pub enum ScalarForm<'a> {
    /// `(u, v)`
    Mass,
    /// `(w·u, v)` with an FE weight
    WeightedMass(&'a ScalarField),
    /// `(w·∇u, ∇v)` with a cell-wise weight
    Diffusion(Coefficient<'a>),
    /// `(b·∇u, v)`
    Convection(&'a VectorField),
}

/// Bilinear forms on a vector (2-component) space.
pub enum VectorForm<'a> {
    /// `(u, v)`
    Mass,
    /// `(ε(u), ε(v))` with the symmetric gradient `ε(u) = (∇u + ∇uᵀ)/2`
    StiffnessEps,
    /// `(div u, div v)`
    GradDiv,
    /// `((b·∇)u, v)`
    Convection(&'a VectorField),
}

/// Geometry and basis data of one cell at the quadrature points.
struct CellCtx {
    n_nodes: usize,
    /// physical coordinates of the quadrature points
    x: [[f64; 2]; 7],
    /// quadrature weights scaled by the cell area
    w: [f64; 7],
    /// basis values `[q][node]`
    n: [[f64; 6]; 7],
    /// basis gradients `[q][node]`
    dn: [[[f64; 2]; 6]; 7],
}

fn cell_ctx(space: &FeSpace, cell: usize, rule: &QuadRule) -> CellCtx {
    let coords = space.mesh().triangle_coords(cell);
    let (g, area) = grad_lambda(&coords);
    let p2 = space.degree() == 2;
    let n_nodes = space.nodes_per_cell();
    let mut ctx = CellCtx {
        n_nodes,
        x: [[0.0; 2]; 7],
        w: [0.0; 7],
        n: [[0.0; 6]; 7],
        dn: [[[0.0; 2]; 6]; 7],
    };
    for (q, (&l, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        ctx.w[q] = w * area;
        for k in 0..3 {
            ctx.x[q][0] += l[k] * coords[k][0];
            ctx.x[q][1] += l[k] * coords[k][1];
        }
        if p2 {
            ctx.n[q][..6].copy_from_slice(&p2_values(l));
            let coeffs = p2_grad_coeffs(l);
            for i in 0..6 {
                for k in 0..3 {
                    ctx.dn[q][i][0] += coeffs[i][k] * g[k][0];
                    ctx.dn[q][i][1] += coeffs[i][k] * g[k][1];
                }
            }
        } else {
            ctx.n[q][..3].copy_from_slice(&l);
            for i in 0..3 {
                ctx.dn[q][i] = g[i];
            }
        }
    }
    ctx
}

impl CellCtx {
    fn eval_scalar(&self, q: usize, dofs: &[usize], vals: &[f64]) -> f64 {
        (0..self.n_nodes).map(|i| self.n[q][i] * vals[dofs[i]]).sum()
    }

    fn eval_scalar_grad(&self, q: usize, dofs: &[usize], vals: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for i in 0..self.n_nodes {
            g[0] += self.dn[q][i][0] * vals[dofs[i]];
            g[1] += self.dn[q][i][1] * vals[dofs[i]];
        }
        g
    }

    fn eval_vector(&self, q: usize, dofs: &[usize], vals: &[f64], n: usize) -> [f64; 2] {
        let mut v = [0.0; 2];
        for i in 0..self.n_nodes {
            v[0] += self.n[q][i] * vals[dofs[i]];
            v[1] += self.n[q][i] * vals[dofs[i] + n];
        }
        v
    }

    /// Jacobian `j[a][b] = ∂_b u_a` of a vector field at quadrature point `q`.
    fn eval_vector_jac(&self, q: usize, dofs: &[usize], vals: &[f64], n: usize) -> [[f64; 2]; 2] {
        let mut j = [[0.0; 2]; 2];
        for i in 0..self.n_nodes {
            let [dx, dy] = self.dn[q][i];
            j[0][0] += dx * vals[dofs[i]];
            j[0][1] += dy * vals[dofs[i]];
            j[1][0] += dx * vals[dofs[i] + n];
            j[1][1] += dy * vals[dofs[i] + n];
        }
        j
    }
}

fn check_same_space(space: &Arc<FeSpace>, other: &Arc<FeSpace>, what: &str) -> Result<(), FemError> {
    if !FeSpace::same_space(space, other) {
        return Err(FemError::SpaceMismatch(format!(
            "{what} lives on a different space"
        )));
    }
    Ok(())
}

/// Assembles a scalar bilinear form into an `n_dofs × n_dofs` matrix.
pub fn assemble_scalar(space: &Arc<FeSpace>, form: ScalarForm) -> Result<CsrMatrix, FemError> {
    match &form {
        ScalarForm::WeightedMass(w) => check_same_space(space, w.space(), "weight field")?,
        ScalarForm::Convection(b) => check_same_space(space, b.space(), "convection velocity")?,
        _ => {}
    }
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let n = space.n_dofs();
    let n_cells = space.mesh().n_triangles();
    let mut triplets = Vec::with_capacity(n_cells * nn * nn);
    let mut local = vec![0.0; nn * nn];

    for cell in 0..n_cells {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        local.iter_mut().for_each(|v| *v = 0.0);
        for q in 0..7 {
            let w = ctx.w[q];
            match &form {
                ScalarForm::Mass | ScalarForm::WeightedMass(_) => {
                    let scale = match &form {
                        ScalarForm::WeightedMass(field) => {
                            w * ctx.eval_scalar(q, dofs, &field.values)
                        }
                        _ => w,
                    };
                    for i in 0..nn {
                        for j in 0..nn {
                            local[i * nn + j] += scale * ctx.n[q][i] * ctx.n[q][j];
                        }
                    }
                }
                ScalarForm::Diffusion(coef) => {
                    let scale = w * coef.at(cell);
                    for i in 0..nn {
                        for j in 0..nn {
                            local[i * nn + j] += scale
                                * (ctx.dn[q][i][0] * ctx.dn[q][j][0]
                                    + ctx.dn[q][i][1] * ctx.dn[q][j][1]);
                        }
                    }
                }
                ScalarForm::Convection(b) => {
                    let bq = ctx.eval_vector(q, dofs, &b.values, n);
                    for i in 0..nn {
                        for j in 0..nn {
                            let adv = bq[0] * ctx.dn[q][j][0] + bq[1] * ctx.dn[q][j][1];
                            local[i * nn + j] += w * adv * ctx.n[q][i];
                        }
                    }
                }
            }
        }
        for i in 0..nn {
            for j in 0..nn {
                triplets.push((dofs[i], dofs[j], local[i * nn + j]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(space.n_dofs(), &triplets))
}

/// Assembles a vector bilinear form into a `2n × 2n` matrix in blocked layout.
pub fn assemble_vector(space: &Arc<FeSpace>, form: VectorForm) -> Result<CsrMatrix, FemError> {
    if let VectorForm::Convection(b) = &form {
        check_same_space(space, b.space(), "convection velocity")?;
    }
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let n = space.n_dofs();
    let n_cells = space.mesh().n_triangles();
    // xx, xy, yx, yy blocks of the local matrix
    let mut xx = vec![0.0; nn * nn];
    let mut xy = vec![0.0; nn * nn];
    let mut yx = vec![0.0; nn * nn];
    let mut yy = vec![0.0; nn * nn];
    let block_triplets = match form {
        VectorForm::Mass | VectorForm::Convection(_) => 2,
        _ => 4,
    };
    let mut triplets = Vec::with_capacity(n_cells * nn * nn * block_triplets);

    for cell in 0..n_cells {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for v in [&mut xx, &mut xy, &mut yx, &mut yy] {
            v.iter_mut().for_each(|e| *e = 0.0);
        }
        for q in 0..7 {
            let w = ctx.w[q];
            match &form {
                VectorForm::Mass => {
                    for i in 0..nn {
                        for j in 0..nn {
                            xx[i * nn + j] += w * ctx.n[q][i] * ctx.n[q][j];
                        }
                    }
                }
                VectorForm::StiffnessEps => {
                    for i in 0..nn {
                        let [dxi, dyi] = ctx.dn[q][i];
                        for j in 0..nn {
                            let [dxj, dyj] = ctx.dn[q][j];
                            xx[i * nn + j] += w * (dxj * dxi + 0.5 * dyj * dyi);
                            xy[i * nn + j] += w * 0.5 * dxj * dyi;
                            yx[i * nn + j] += w * 0.5 * dyj * dxi;
                            yy[i * nn + j] += w * (dyj * dyi + 0.5 * dxj * dxi);
                        }
                    }
                }
                VectorForm::GradDiv => {
                    for i in 0..nn {
                        let [dxi, dyi] = ctx.dn[q][i];
                        for j in 0..nn {
                            let [dxj, dyj] = ctx.dn[q][j];
                            xx[i * nn + j] += w * dxj * dxi;
                            xy[i * nn + j] += w * dyj * dxi;
                            yx[i * nn + j] += w * dxj * dyi;
                            yy[i * nn + j] += w * dyj * dyi;
                        }
                    }
                }
                VectorForm::Convection(b) => {
                    let bq = ctx.eval_vector(q, dofs, &b.values, n);
                    for i in 0..nn {
                        for j in 0..nn {
                            let adv = bq[0] * ctx.dn[q][j][0] + bq[1] * ctx.dn[q][j][1];
                            xx[i * nn + j] += w * adv * ctx.n[q][i];
                        }
                    }
                }
            }
        }
        let diag_only = matches!(form, VectorForm::Mass | VectorForm::Convection(_));
        for i in 0..nn {
            for j in 0..nn {
                triplets.push((dofs[i], dofs[j], xx[i * nn + j]));
                if !diag_only {
                    triplets.push((dofs[i], dofs[j] + n, xy[i * nn + j]));
                    triplets.push((dofs[i] + n, dofs[j], yx[i * nn + j]));
                }
                // The y-y block of Mass/Convection equals the x-x block.
                let vyy = if diag_only { xx[i * nn + j] } else { yy[i * nn + j] };
                triplets.push((dofs[i] + n, dofs[j] + n, vyy));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(2 * n, &triplets))
}

/// `rhs_i = ∫ f ψ_i`
pub fn source_scalar_rhs(space: &Arc<FeSpace>, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let mut rhs = vec![0.0; space.n_dofs()];
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let fv = f(ctx.x[q]) * ctx.w[q];
            for i in 0..nn {
                rhs[dofs[i]] += fv * ctx.n[q][i];
            }
        }
    }
    rhs
}

/// `rhs_i = ∫ f·v_i` in blocked layout.
pub fn source_vector_rhs(space: &Arc<FeSpace>, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let n = space.n_dofs();
    let mut rhs = vec![0.0; 2 * n];
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let fv = f(ctx.x[q]);
            for i in 0..nn {
                let b = ctx.n[q][i] * ctx.w[q];
                rhs[dofs[i]] += fv[0] * b;
                rhs[dofs[i] + n] += fv[1] * b;
            }
        }
    }
    rhs
}

/// `rhs_i = ∫ η ε(u):ε(v_i)`
pub fn eta_eps_rhs(
    space: &Arc<FeSpace>,
    eta: &ScalarField,
    u: &VectorField,
) -> Result<Vec<f64>, FemError> {
    check_same_space(space, eta.space(), "viscosity field")?;
    check_same_space(space, u.space(), "velocity field")?;
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let n = space.n_dofs();
    let mut rhs = vec![0.0; 2 * n];
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let eta_q = ctx.eval_scalar(q, dofs, &eta.values);
            let j = ctx.eval_vector_jac(q, dofs, &u.values, n);
            let e11 = j[0][0];
            let e22 = j[1][1];
            let e12 = 0.5 * (j[0][1] + j[1][0]);
            let w = ctx.w[q] * eta_q;
            for i in 0..nn {
                let [dxi, dyi] = ctx.dn[q][i];
                rhs[dofs[i]] += w * (e11 * dxi + e12 * dyi);
                rhs[dofs[i] + n] += w * (e22 * dyi + e12 * dxi);
            }
        }
    }
    Ok(rhs)
}

/// `rhs_i = ∫ ∇p·v_i` with `p` on the P1 space of the same mesh.
pub fn grad_p_rhs(space: &Arc<FeSpace>, p: &ScalarField) -> Result<Vec<f64>, FemError> {
    if !Arc::ptr_eq(space.mesh(), p.space().mesh()) {
        return Err(FemError::SpaceMismatch(
            "pressure lives on a different mesh".into(),
        ));
    }
    if p.space().degree() != 1 {
        return Err(FemError::SpaceMismatch("pressure space must be P1".into()));
    }
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let n = space.n_dofs();
    let mut rhs = vec![0.0; 2 * n];
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        let pdofs = p.space().cell_dofs(cell);
        let coords = space.mesh().triangle_coords(cell);
        let (g, _) = grad_lambda(&coords);
        let mut gp = [0.0; 2];
        for k in 0..3 {
            gp[0] += p.values[pdofs[k]] * g[k][0];
            gp[1] += p.values[pdofs[k]] * g[k][1];
        }
        for q in 0..7 {
            for i in 0..nn {
                let b = ctx.n[q][i] * ctx.w[q];
                rhs[dofs[i]] += gp[0] * b;
                rhs[dofs[i] + n] += gp[1] * b;
            }
        }
    }
    Ok(rhs)
}

/// `rhs_i = ∫ (div u)(div v_i)`
pub fn div_div_rhs(space: &Arc<FeSpace>, u: &VectorField) -> Result<Vec<f64>, FemError> {
    check_same_space(space, u.space(), "velocity field")?;
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let n = space.n_dofs();
    let mut rhs = vec![0.0; 2 * n];
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let j = ctx.eval_vector_jac(q, dofs, &u.values, n);
            let div = (j[0][0] + j[1][1]) * ctx.w[q];
            for i in 0..nn {
                rhs[dofs[i]] += div * ctx.dn[q][i][0];
                rhs[dofs[i] + n] += div * ctx.dn[q][i][1];
            }
        }
    }
    Ok(rhs)
}

/// `rhs_i = ∫ ((b·∇)m)·v_i`
pub fn advect_vector_rhs(
    space: &Arc<FeSpace>,
    b: &VectorField,
    m: &VectorField,
) -> Result<Vec<f64>, FemError> {
    check_same_space(space, b.space(), "advection velocity")?;
    check_same_space(space, m.space(), "advected field")?;
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let n = space.n_dofs();
    let mut rhs = vec![0.0; 2 * n];
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let bq = ctx.eval_vector(q, dofs, &b.values, n);
            let j = ctx.eval_vector_jac(q, dofs, &m.values, n);
            let adv = [
                bq[0] * j[0][0] + bq[1] * j[0][1],
                bq[0] * j[1][0] + bq[1] * j[1][1],
            ];
            for i in 0..nn {
                let w = ctx.n[q][i] * ctx.w[q];
                rhs[dofs[i]] += adv[0] * w;
                rhs[dofs[i] + n] += adv[1] * w;
            }
        }
    }
    Ok(rhs)
}

/// `rhs_i = ∫ (u·∇φ) ψ_i`
pub fn advect_scalar_rhs(
    space: &Arc<FeSpace>,
    u: &VectorField,
    phi: &ScalarField,
) -> Result<Vec<f64>, FemError> {
    check_same_space(space, u.space(), "advection velocity")?;
    check_same_space(space, phi.space(), "advected field")?;
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let n = space.n_dofs();
    let mut rhs = vec![0.0; n];
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let uq = ctx.eval_vector(q, dofs, &u.values, n);
            let g = ctx.eval_scalar_grad(q, dofs, &phi.values);
            let adv = (uq[0] * g[0] + uq[1] * g[1]) * ctx.w[q];
            for i in 0..nn {
                rhs[dofs[i]] += adv * ctx.n[q][i];
            }
        }
    }
    Ok(rhs)
}

/// `rhs_i = ∫ (div u) ψ_i` with `ψ_i` on a scalar space over the same mesh as `u`
/// (the degrees may differ).
pub fn div_source_rhs(space: &Arc<FeSpace>, u: &VectorField) -> Result<Vec<f64>, FemError> {
    if !Arc::ptr_eq(space.mesh(), u.space().mesh()) {
        return Err(FemError::SpaceMismatch(
            "velocity lives on a different mesh".into(),
        ));
    }
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let nu = u.space().n_dofs();
    let mut rhs = vec![0.0; space.n_dofs()];
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let uctx = cell_ctx(u.space(), cell, &rule);
        let dofs = space.cell_dofs(cell);
        let udofs = u.space().cell_dofs(cell);
        for q in 0..7 {
            let j = uctx.eval_vector_jac(q, udofs, &u.values, nu);
            let div = (j[0][0] + j[1][1]) * ctx.w[q];
            for i in 0..nn {
                rhs[dofs[i]] += div * ctx.n[q][i];
            }
        }
    }
    Ok(rhs)
}

/// `rhs_i = ∫ F·∇ψ_i` where the flux `F` is evaluated per quadrature point from the
/// cell index, physical location, and the local value and gradient of `phi`.
pub fn flux_grad_rhs(
    space: &Arc<FeSpace>,
    phi: &ScalarField,
    flux: impl Fn(usize, [f64; 2], f64, [f64; 2]) -> [f64; 2],
) -> Result<Vec<f64>, FemError> {
    check_same_space(space, phi.space(), "flux field")?;
    let rule = degree5();
    let nn = space.nodes_per_cell();
    let mut rhs = vec![0.0; space.n_dofs()];
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let val = ctx.eval_scalar(q, dofs, &phi.values);
            let grad = ctx.eval_scalar_grad(q, dofs, &phi.values);
            let f = flux(cell, ctx.x[q], val, grad);
            for i in 0..nn {
                rhs[dofs[i]] += ctx.w[q] * (f[0] * ctx.dn[q][i][0] + f[1] * ctx.dn[q][i][1]);
            }
        }
    }
    Ok(rhs)
}

/// Integrates `g(x, value, gradient)` of a scalar field over the mesh.
pub fn integrate_scalar(
    field: &ScalarField,
    g: impl Fn([f64; 2], f64, [f64; 2]) -> f64,
) -> f64 {
    let space = field.space();
    let rule = degree5();
    let mut acc = 0.0;
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let val = ctx.eval_scalar(q, dofs, &field.values);
            let grad = ctx.eval_scalar_grad(q, dofs, &field.values);
            acc += ctx.w[q] * g(ctx.x[q], val, grad);
        }
    }
    acc
}

/// Integrates `g(x, value, jacobian)` of a vector field over the mesh.
pub fn integrate_vector(
    field: &VectorField,
    g: impl Fn([f64; 2], [f64; 2], [[f64; 2]; 2]) -> f64,
) -> f64 {
    let space = field.space();
    let rule = degree5();
    let n = space.n_dofs();
    let mut acc = 0.0;
    for cell in 0..space.mesh().n_triangles() {
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let val = ctx.eval_vector(q, dofs, &field.values, n);
            let jac = ctx.eval_vector_jac(q, dofs, &field.values, n);
            acc += ctx.w[q] * g(ctx.x[q], val, jac);
        }
    }
    acc
}

/// Integrates `g(x, weight, value, jacobian)` with the scalar weight and the
/// vector field evaluated at the same quadrature points. The two fields may
/// use different degrees but must share the mesh.
pub fn integrate_weighted_vector(
    weight: &ScalarField,
    field: &VectorField,
    g: impl Fn([f64; 2], f64, [f64; 2], [[f64; 2]; 2]) -> f64,
) -> Result<f64, FemError> {
    if !Arc::ptr_eq(weight.space().mesh(), field.space().mesh()) {
        return Err(FemError::SpaceMismatch(
            "weight lives on a different mesh".into(),
        ));
    }
    let space = field.space();
    let rule = degree5();
    let n = space.n_dofs();
    let mut acc = 0.0;
    for cell in 0..space.mesh().n_triangles() {
        let wctx = cell_ctx(weight.space(), cell, &rule);
        let wdofs = weight.space().cell_dofs(cell);
        let ctx = cell_ctx(space, cell, &rule);
        let dofs = space.cell_dofs(cell);
        for q in 0..7 {
            let w = wctx.eval_scalar(q, wdofs, &weight.values);
            let val = ctx.eval_vector(q, dofs, &field.values, n);
            let jac = ctx.eval_vector_jac(q, dofs, &field.values, n);
            acc += ctx.w[q] * g(ctx.x[q], w, val, jac);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, Shape};

    fn unit_square(h: f64) -> Arc<FeSpace> {
        let mesh = Arc::new(
            generate_mesh(
                &Shape::Rectangle {
                    x: [0.0, 1.0],
                    y: [0.0, 1.0],
                },
                h,
            )
            .unwrap(),
        );
        Arc::new(FeSpace::new(mesh, 1).unwrap())
    }

    #[test]
    fn mass_entries_sum_to_area() {
        let space = unit_square(1.0);
        let m = assemble_scalar(&space, ScalarForm::Mass).unwrap();
        let total: f64 = m.values.iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn source_one_sums_to_area_and_x_to_half() {
        let space = unit_square(0.5);
        let ones = source_scalar_rhs(&space, |_| 1.0);
        assert!((ones.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        let xs = source_scalar_rhs(&space, |x| x[0]);
        assert!((xs.iter().sum::<f64>() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn weighted_mass_with_constant_two_is_twice_mass() {
        let space = unit_square(0.5);
        let w = ScalarField::interpolate(space.clone(), |_| 2.0);
        let m = assemble_scalar(&space, ScalarForm::Mass).unwrap();
        let wm = assemble_scalar(&space, ScalarForm::WeightedMass(&w)).unwrap();
        for (a, b) in m.values.iter().zip(&wm.values) {
            assert!((2.0 * a - b).abs() <= 1e-13 * b.abs().max(1e-300));
        }
    }
}
