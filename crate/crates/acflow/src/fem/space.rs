//! Lagrange P1/P2 spaces: global dof numbering, dof coordinates, boundary dofs.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::FemError;
use crate::mesh::Mesh;

/// A continuous Lagrange space of degree 1 or 2 on a triangle mesh.
///
/// P1 dofs are the mesh vertices. P2 dofs are the vertices followed by one dof per
/// edge (numbered in order of first appearance while scanning triangles), located at
/// the edge midpoints. Local cell order is `[v0, v1, v2, e01, e12, e20]`.
#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    n_dofs: usize,
    cell_dofs: Vec<usize>,
    dof_coords: Vec<[f64; 2]>,
    boundary_by_tag: BTreeMap<u32, Vec<usize>>,
    boundary_all: Vec<usize>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Self, FemError> {
        if degree != 1 && degree != 2 {
            return Err(FemError::InvalidParameter(format!(
                "unsupported polynomial degree {degree} (only 1 and 2)"
            )));
        }
        let nv = mesh.n_vertices();
        let stride = if degree == 1 { 3 } else { 6 };
        let mut cell_dofs = Vec::with_capacity(stride * mesh.n_triangles());
        let mut dof_coords: Vec<[f64; 2]> = mesh.vertices.clone();
        let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();

        for tri in &mesh.triangles {
            cell_dofs.extend_from_slice(tri);
            if degree == 2 {
                for [a, b] in [[tri[0], tri[1]], [tri[1], tri[2]], [tri[2], tri[0]]] {
                    let key = if a <= b { [a, b] } else { [b, a] };
                    let next_id = nv + edge_ids.len();
                    let id = *edge_ids.entry(key).or_insert(next_id);
                    if id == next_id && id == dof_coords.len() {
                        let [pa, pb] = [mesh.vertices[a], mesh.vertices[b]];
                        dof_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                    }
                    cell_dofs.push(id);
                }
            }
        }
        let n_dofs = dof_coords.len();

        let mut boundary_by_tag: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for be in &mesh.boundary_edges {
            let [a, b] = be.vertices;
            let entry = boundary_by_tag.entry(be.tag).or_default();
            entry.push(a);
            entry.push(b);
            if degree == 2 {
                let key = if a <= b { [a, b] } else { [b, a] };
                entry.push(edge_ids[&key]);
            }
        }
        let mut boundary_all = Vec::new();
        for dofs in boundary_by_tag.values_mut() {
            dofs.sort_unstable();
            dofs.dedup();
            boundary_all.extend_from_slice(dofs);
        }
        boundary_all.sort_unstable();
        boundary_all.dedup();

        Ok(FeSpace {
            mesh,
            degree,
            n_dofs,
            cell_dofs,
            dof_coords,
            boundary_by_tag,
            boundary_all,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn nodes_per_cell(&self) -> usize {
        if self.degree == 1 {
            3
        } else {
            6
        }
    }

    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        let stride = self.nodes_per_cell();
        &self.cell_dofs[cell * stride..(cell + 1) * stride]
    }

    /// Coordinates of every global dof (vertices, then P2 edge midpoints).
    pub fn dof_coords(&self) -> &[[f64; 2]] {
        &self.dof_coords
    }

    /// All boundary dofs, sorted and deduplicated.
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_all
    }

    /// Boundary dofs of one tagged boundary part.
    pub fn boundary_dofs_tagged(&self, tag: u32) -> &[usize] {
        self.boundary_by_tag
            .get(&tag)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Checks that two fields'/operators' spaces are the same object.
    pub fn same_space(a: &Arc<FeSpace>, b: &Arc<FeSpace>) -> bool {
        Arc::ptr_eq(a, b) || (a.degree == b.degree && Arc::ptr_eq(&a.mesh, &b.mesh))
    }
}

/// Barycentric gradients and area of a triangle given its corner coordinates.
pub(crate) fn grad_lambda(coords: &[[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let [a, b, c] = *coords;
    let two_area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let g = [
        [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area],
        [(c[1] - a[1]) / two_area, (a[0] - c[0]) / two_area],
        [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area],
    ];
    (g, 0.5 * two_area)
}

/// P2 basis values at a barycentric point, local order `[v0, v1, v2, e01, e12, e20]`.
pub(crate) fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Coefficients `c` with `∇N_i = Σ_k c[i][k]·∇λ_k` for the P2 basis.
pub(crate) fn p2_grad_coeffs(l: [f64; 3]) -> [[f64; 3]; 6] {
    [
        [4.0 * l[0] - 1.0, 0.0, 0.0],
        [0.0, 4.0 * l[1] - 1.0, 0.0],
        [0.0, 0.0, 4.0 * l[2] - 1.0],
        [4.0 * l[1], 4.0 * l[0], 0.0],
        [0.0, 4.0 * l[2], 4.0 * l[1]],
        [4.0 * l[2], 0.0, 4.0 * l[0]],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, Shape};

    #[test]
    fn dof_counts_match_entities() {
        let mesh = Arc::new(generate_mesh(&Shape::Disk { radius: 1.0 }, 0.4).unwrap());
        let p1 = FeSpace::new(mesh.clone(), 1).unwrap();
        assert_eq!(p1.n_dofs(), mesh.n_vertices());
        let p2 = FeSpace::new(mesh.clone(), 2).unwrap();
        // Euler: edges = (3·cells + boundary)/2.
        let nb = mesh.boundary_edges.len();
        let n_edges = (3 * mesh.n_triangles() + nb) / 2;
        assert_eq!(p2.n_dofs(), mesh.n_vertices() + n_edges);
    }

    #[test]
    fn p2_basis_partition_of_unity() {
        let l = [0.3, 0.5, 0.2];
        let sum: f64 = p2_values(l).iter().sum();
        assert!((sum - 1.0).abs() < 1e-14);
        let coeffs = p2_grad_coeffs(l);
        for k in 0..3 {
            // Σ_i ∇N_i = 3·Σ_k ∇λ_k = 0 because the λ-gradients themselves sum to zero.
            let s: f64 = (0..6).map(|i| coeffs[i][k]).sum();
            assert!((s - 3.0).abs() < 1e-14);
        }
    }
}
