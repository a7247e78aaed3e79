//! Finite-element functions: nodal coefficient vectors bound to a space.

use std::sync::Arc;

use super::space::{grad_lambda, p2_grad_coeffs, p2_values};
use super::{FeSpace, FemError};

/// Barycentric coordinates of `point` in cell `cell`, or `None` if outside
/// (with a small tolerance so points on edges belong to both neighbors).
fn barycentric_in(space: &FeSpace, cell: usize, point: [f64; 2]) -> Option<[f64; 3]> {
    let coords = space.mesh().triangle_coords(cell);
    let (g, _) = grad_lambda(&coords);
    let mut l = [0.0; 3];
    for k in 0..3 {
        // λ_k is affine with gradient g[k] and value 1 at corner k.
        let d = [point[0] - coords[k][0], point[1] - coords[k][1]];
        l[k] = 1.0 + g[k][0] * d[0] + g[k][1] * d[1];
    }
    if l.iter().all(|&v| v >= -1e-12) {
        Some(l)
    } else {
        None
    }
}

fn locate(space: &FeSpace, point: [f64; 2]) -> Result<(usize, [f64; 3]), FemError> {
    for cell in 0..space.mesh().n_triangles() {
        if let Some(l) = barycentric_in(space, cell, point) {
            return Ok((cell, l));
        }
    }
    Err(FemError::PointNotFound(point[0], point[1]))
}

fn basis_values(space: &FeSpace, l: [f64; 3]) -> Vec<f64> {
    if space.degree() == 1 {
        l.to_vec()
    } else {
        p2_values(l).to_vec()
    }
}

/// A scalar FE function.
#[derive(Debug, Clone)]
pub struct ScalarField {
    space: Arc<FeSpace>,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        ScalarField {
            space,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(space: Arc<FeSpace>, values: Vec<f64>) -> Result<Self, FemError> {
        if values.len() != space.n_dofs() {
            return Err(FemError::SpaceMismatch(format!(
                "coefficient length {} does not match {} dofs",
                values.len(),
                space.n_dofs()
            )));
        }
        Ok(ScalarField { space, values })
    }

    /// Nodal interpolation: sets each dof to `f` at the dof location.
    pub fn interpolate(space: Arc<FeSpace>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = space.dof_coords().iter().map(|&x| f(x)).collect();
        ScalarField { space, values }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    /// Point evaluation through the element-local basis expansion.
    pub fn evaluate(&self, point: [f64; 2]) -> Result<f64, FemError> {
        let (cell, l) = locate(&self.space, point)?;
        let basis = basis_values(&self.space, l);
        let dofs = self.space.cell_dofs(cell);
        Ok(basis
            .iter()
            .zip(dofs)
            .map(|(n, &d)| n * self.values[d])
            .sum())
    }

    /// Gradient at a point (piecewise polynomial; one-sided on element edges).
    pub fn evaluate_grad(&self, point: [f64; 2]) -> Result<[f64; 2], FemError> {
        let (cell, l) = locate(&self.space, point)?;
        let coords = self.space.mesh().triangle_coords(cell);
        let (g, _) = grad_lambda(&coords);
        let dofs = self.space.cell_dofs(cell);
        let mut grad = [0.0; 2];
        if self.space.degree() == 1 {
            for (k, &d) in dofs.iter().enumerate() {
                grad[0] += self.values[d] * g[k][0];
                grad[1] += self.values[d] * g[k][1];
            }
        } else {
            let coeffs = p2_grad_coeffs(l);
            for (i, &d) in dofs.iter().enumerate() {
                for k in 0..3 {
                    grad[0] += self.values[d] * coeffs[i][k] * g[k][0];
                    grad[1] += self.values[d] * coeffs[i][k] * g[k][1];
                }
            }
        }
        Ok(grad)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
    }
}

/// A vector FE function with blocked layout: x-components at `0..n`, y-components at
/// `n..2n` where `n = space.n_dofs()`.
#[derive(Debug, Clone)]
pub struct VectorField {
    space: Arc<FeSpace>,
    pub values: Vec<f64>,
}

impl VectorField {
    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        VectorField {
            space,
            values: vec![0.0; 2 * n],
        }
    }

    pub fn from_values(space: Arc<FeSpace>, values: Vec<f64>) -> Result<Self, FemError> {
        if values.len() != 2 * space.n_dofs() {
            return Err(FemError::SpaceMismatch(format!(
                "coefficient length {} does not match 2×{} dofs",
                values.len(),
                space.n_dofs()
            )));
        }
        Ok(VectorField { space, values })
    }

    pub fn interpolate(space: Arc<FeSpace>, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let n = space.n_dofs();
        let mut values = vec![0.0; 2 * n];
        for (i, &x) in space.dof_coords().iter().enumerate() {
            let v = f(x);
            values[i] = v[0];
            values[i + n] = v[1];
        }
        VectorField { space, values }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn component(&self, comp: usize, dof: usize) -> f64 {
        self.values[comp * self.space.n_dofs() + dof]
    }

    pub fn evaluate(&self, point: [f64; 2]) -> Result<[f64; 2], FemError> {
        let (cell, l) = locate(&self.space, point)?;
        let basis = basis_values(&self.space, l);
        let dofs = self.space.cell_dofs(cell);
        let n = self.space.n_dofs();
        let mut out = [0.0; 2];
        for (b, &d) in basis.iter().zip(dofs) {
            out[0] += b * self.values[d];
            out[1] += b * self.values[d + n];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, Shape};

    fn square_space(degree: usize) -> Arc<FeSpace> {
        let mesh = Arc::new(
            generate_mesh(
                &Shape::Rectangle {
                    x: [0.0, 1.0],
                    y: [0.0, 1.0],
                },
                0.5,
            )
            .unwrap(),
        );
        Arc::new(FeSpace::new(mesh, degree).unwrap())
    }

    #[test]
    fn constant_interpolates_exactly() {
        let f = ScalarField::interpolate(square_space(2), |_| 7.0);
        assert!((f.evaluate([0.31, 0.67]).unwrap() - 7.0).abs() < 1e-14);
    }

    #[test]
    fn p2_reproduces_quadratics() {
        let f = ScalarField::interpolate(square_space(2), |x| x[0] * x[0]);
        assert!((f.evaluate([0.3, 0.4]).unwrap() - 0.09).abs() < 1e-14);
        let g = f.evaluate_grad([0.3, 0.4]).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-12 && g[1].abs() < 1e-12);
    }

    #[test]
    fn outside_point_is_reported() {
        let f = ScalarField::zeros(square_space(1));
        assert!(matches!(
            f.evaluate([2.0, 2.0]),
            Err(FemError::PointNotFound(_, _))
        ));
    }
}
