//! Conforming triangular meshes of the unit disk and axis-aligned rectangles.
//!
//! Meshes carry their boundary edges (tagged) and per-triangle size metadata
//! (`h_local` = longest edge). Generation is fully deterministic: disks are built
//! from concentric rings (ring `k` carries `6k` vertices, all boundary vertices
//! placed exactly on the circle), rectangles from a structured grid split into two
//! triangles per cell. A plain-text file format (`ACMESH 1`) round-trips meshes
//! exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh generation failed: {0}")]
    GenerationFailed(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid mesh: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A boundary edge `(v[0], v[1])` with an integer tag identifying its boundary part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: u32,
}

/// Domain shapes the generator understands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk { radius: f64 },
    Rectangle { x: [f64; 2], y: [f64; 2] },
}

/// A conforming triangle mesh with counterclockwise cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Longest edge of each triangle.
    pub h_local: Vec<f64>,
    /// `max` of `h_local`.
    pub h_global: f64,
}

impl Mesh {
    /// Builds a mesh from raw connectivity, validating orientation, edge manifoldness,
    /// and that `boundary_edges` is exactly the topological boundary.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self, MeshError> {
        let nv = vertices.len();
        if nv < 3 || triangles.is_empty() {
            return Err(MeshError::Validation(
                "mesh needs at least 3 vertices and 1 triangle".into(),
            ));
        }
        for (k, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::Validation(format!(
                        "triangle {k} references nonexistent vertex {v}"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] {
                return Err(MeshError::Validation(format!(
                    "triangle {k} has repeated vertices"
                )));
            }
            let area = signed_area(&vertices, tri);
            if area <= 0.0 {
                return Err(MeshError::Validation(format!(
                    "triangle {k} has nonpositive signed area {area}"
                )));
            }
        }

        let mut edge_count: HashMap<[usize; 2], u8> = HashMap::new();
        for tri in &triangles {
            for e in triangle_edges(tri) {
                let key = sorted_edge(e);
                let count = edge_count.entry(key).or_insert(0);
                *count += 1;
                if *count > 2 {
                    return Err(MeshError::Validation(format!(
                        "edge ({}, {}) is shared by more than two triangles",
                        key[0], key[1]
                    )));
                }
            }
        }

        let mut tagged: HashMap<[usize; 2], u32> = HashMap::new();
        for be in &boundary_edges {
            let key = sorted_edge(be.vertices);
            match edge_count.get(&key) {
                None => {
                    return Err(MeshError::Validation(format!(
                        "boundary edge ({}, {}) is not an edge of any triangle",
                        key[0], key[1]
                    )))
                }
                Some(2) => {
                    return Err(MeshError::Validation(format!(
                        "boundary edge ({}, {}) is interior (shared by two triangles)",
                        key[0], key[1]
                    )))
                }
                Some(_) => {}
            }
            if tagged.insert(key, be.tag).is_some() {
                return Err(MeshError::Validation(format!(
                    "duplicated boundary edge ({}, {})",
                    key[0], key[1]
                )));
            }
        }
        for (key, count) in &edge_count {
            if *count == 1 && !tagged.contains_key(key) {
                return Err(MeshError::Validation(format!(
                    "edge ({}, {}) lies on the boundary but is not listed in the boundary section",
                    key[0], key[1]
                )));
            }
        }

        let h_local: Vec<f64> = triangles
            .iter()
            .map(|tri| {
                triangle_edges(tri)
                    .into_iter()
                    .map(|[a, b]| distance(vertices[a], vertices[b]))
                    .fold(0.0, f64::max)
            })
            .collect();
        let h_global = h_local.iter().copied().fold(0.0, f64::max);

        Ok(Mesh {
            vertices,
            triangles,
            boundary_edges,
            h_local,
            h_global,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Area of triangle `k` (positive by the orientation invariant).
    pub fn triangle_area(&self, k: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[k])
    }

    /// Sum of all triangle areas.
    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|k| self.triangle_area(k)).sum()
    }

    /// Corner coordinates of triangle `k`.
    pub fn triangle_coords(&self, k: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[k];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }
}

fn signed_area(vertices: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    let [a, b, c] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn triangle_edges(tri: &[usize; 3]) -> [[usize; 2]; 3] {
    [[tri[0], tri[1]], [tri[1], tri[2]], [tri[2], tri[0]]]
}

fn sorted_edge(e: [usize; 2]) -> [usize; 2] {
    if e[0] <= e[1] {
        e
    } else {
        [e[1], e[0]]
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Generates a mesh of the given shape with `h_global ≤ 1.5·h_target`.
///
/// Disk boundary tag is 1; rectangle sides are tagged 1 (bottom), 2 (right),
/// 3 (top), 4 (left). Generation is deterministic.
pub fn generate_mesh(shape: &Shape, h_target: f64) -> Result<Mesh, MeshError> {
    if !(h_target > 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "h_target must be positive, got {h_target}"
        )));
    }
    match *shape {
        Shape::Disk { radius } => {
            if !(radius > 0.0) {
                return Err(MeshError::InvalidParameter(format!(
                    "disk radius must be positive, got {radius}"
                )));
            }
            generate_disk(radius, h_target)
        }
        Shape::Rectangle { x, y } => {
            if !(x[1] > x[0]) || !(y[1] > y[0]) {
                return Err(MeshError::InvalidParameter(format!(
                    "degenerate rectangle [{}, {}] x [{}, {}]",
                    x[0], x[1], y[0], y[1]
                )));
            }
            generate_rectangle(x, y, h_target)
        }
    }
}

/// Concentric-ring disk triangulation: ring `k` of `K` holds `6k` vertices at radius
/// `k·radius/K`; each of the six sectors of the annulus between rings `k-1` and `k` is
/// filled with a strip of `2k-1` triangles, for `6K²` triangles in total. The longest
/// edges come out at ≈ `1.21·radius/K·1.2 ≤ 1.5·h_target` for `K = ceil(1.2·radius/h)`.
fn generate_disk(radius: f64, h_target: f64) -> Result<Mesh, MeshError> {
    let rings = ((1.2 * radius / h_target).ceil() as usize).max(1);

    // Vertex layout: center at 0, ring k occupying 1 + 3k(k-1) .. 1 + 3k(k+1).
    let ring_start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    let mut vertices = Vec::with_capacity(1 + 3 * rings * (rings + 1));
    vertices.push([0.0, 0.0]);
    for k in 1..=rings {
        let r = radius * k as f64 / rings as f64;
        let n = 6 * k;
        for j in 0..n {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            vertices.push([r * theta.cos(), r * theta.sin()]);
        }
    }

    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for k in 1..=rings {
        let inner = |j: usize| {
            if k == 1 {
                0
            } else {
                ring_start(k - 1) + j % (6 * (k - 1))
            }
        };
        let outer = |j: usize| ring_start(k) + j % (6 * k);
        for s in 0..6 {
            let i0 = s * (k - 1);
            let o0 = s * k;
            for j in 0..k - 1 {
                triangles.push([outer(o0 + j), outer(o0 + j + 1), inner(i0 + j)]);
                triangles.push([outer(o0 + j + 1), inner(i0 + j + 1), inner(i0 + j)]);
            }
            triangles.push([outer(o0 + k - 1), outer(o0 + k), inner(i0 + k - 1)]);
        }
    }

    let n_outer = 6 * rings;
    let first_outer = ring_start(rings);
    let boundary_edges = (0..n_outer)
        .map(|j| BoundaryEdge {
            vertices: [first_outer + j, first_outer + (j + 1) % n_outer],
            tag: 1,
        })
        .collect();

    Mesh::new(vertices, triangles, boundary_edges)
        .map_err(|e| MeshError::GenerationFailed(e.to_string()))
}

fn generate_rectangle(x: [f64; 2], y: [f64; 2], h_target: f64) -> Result<Mesh, MeshError> {
    let nx = (((x[1] - x[0]) / h_target).ceil() as usize).max(1);
    let ny = (((y[1] - y[0]) / h_target).ceil() as usize).max(1);
    let dx = (x[1] - x[0]) / nx as f64;
    let dy = (y[1] - y[0]) / ny as f64;

    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let px = if i == nx { x[1] } else { x[0] + i as f64 * dx };
            let py = if j == ny { y[1] } else { y[0] + j as f64 * dy };
            vertices.push([px, py]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }

    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge {
            vertices: [vid(i, 0), vid(i + 1, 0)],
            tag: 1,
        });
        boundary_edges.push(BoundaryEdge {
            vertices: [vid(i, ny), vid(i + 1, ny)],
            tag: 3,
        });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge {
            vertices: [vid(nx, j), vid(nx, j + 1)],
            tag: 2,
        });
        boundary_edges.push(BoundaryEdge {
            vertices: [vid(0, j), vid(0, j + 1)],
            tag: 4,
        });
    }

    Mesh::new(vertices, triangles, boundary_edges)
        .map_err(|e| MeshError::GenerationFailed(e.to_string()))
}

/// Serializes a mesh in the `ACMESH 1` plain-text format.
///
/// Floats are written with Rust's shortest round-trip formatting, so
/// `save_mesh` → `load_mesh` reproduces coordinates exactly.
pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut out = String::new();
    out.push_str("ACMESH 1\n");
    let _ = writeln!(out, "VERTICES {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {}", v[0], v[1]);
    }
    let _ = writeln!(out, "TRIANGLES {}", mesh.triangles.len());
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "BOUNDARY {}", mesh.boundary_edges.len());
    for be in &mesh.boundary_edges {
        let _ = writeln!(out, "{} {} {}", be.vertices[0], be.vertices[1], be.tag);
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a mesh from the `ACMESH 1` format, validating connectivity on load.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    // Line numbers are 1-based and count every line, comments and blanks included.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| MeshError::Parse {
                line: text.lines().count() + 1,
                message: format!("unexpected end of file, expected {what}"),
            })
    };

    let (line, header) = next("header")?;
    if header != "ACMESH 1" {
        return Err(MeshError::Parse {
            line,
            message: format!("expected header 'ACMESH 1', got '{header}'"),
        });
    }

    fn section_count(line: usize, l: &str, name: &str) -> Result<usize, MeshError> {
        let mut it = l.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(n), Some(count), None) if n == name => {
                count.parse().map_err(|_| MeshError::Parse {
                    line,
                    message: format!("invalid {name} count '{count}'"),
                })
            }
            _ => Err(MeshError::Parse {
                line,
                message: format!("expected '{name} <count>', got '{l}'"),
            }),
        }
    }

    let (line, l) = next("VERTICES section")?;
    let nv = section_count(line, l, "VERTICES")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = next("vertex line")?;
        let coords: Vec<f64> = l
            .split_whitespace()
            .map(|w| {
                w.parse().map_err(|_| MeshError::Parse {
                    line,
                    message: format!("invalid coordinate '{w}'"),
                })
            })
            .collect::<Result<_, _>>()?;
        if coords.len() != 2 {
            return Err(MeshError::Parse {
                line,
                message: format!("expected 'x y', got '{l}'"),
            });
        }
        vertices.push([coords[0], coords[1]]);
    }

    let (line, l) = next("TRIANGLES section")?;
    let nt = section_count(line, l, "TRIANGLES")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, l) = next("triangle line")?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|w| {
                w.parse().map_err(|_| MeshError::Parse {
                    line,
                    message: format!("invalid vertex index '{w}'"),
                })
            })
            .collect::<Result<_, _>>()?;
        if idx.len() != 3 {
            return Err(MeshError::Parse {
                line,
                message: format!("expected 'i j k', got '{l}'"),
            });
        }
        triangles.push([idx[0], idx[1], idx[2]]);
    }

    let (line, l) = next("BOUNDARY section")?;
    let nb = section_count(line, l, "BOUNDARY")?;
    let mut boundary_edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, l) = next("boundary line")?;
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(MeshError::Parse {
                line,
                message: format!("expected 'i j tag', got '{l}'"),
            });
        }
        let parse_idx = |w: &str| -> Result<usize, MeshError> {
            w.parse().map_err(|_| MeshError::Parse {
                line,
                message: format!("invalid vertex index '{w}'"),
            })
        };
        let tag: u32 = fields[2].parse().map_err(|_| MeshError::Parse {
            line,
            message: format!("invalid boundary tag '{}'", fields[2]),
        })?;
        boundary_edges.push(BoundaryEdge {
            vertices: [parse_idx(fields[0])?, parse_idx(fields[1])?],
            tag,
        });
    }

    if let Some((line, l)) = lines.next() {
        return Err(MeshError::Parse {
            line,
            message: format!("trailing content '{l}'"),
        });
    }

    Mesh::new(vertices, triangles, boundary_edges)
}
