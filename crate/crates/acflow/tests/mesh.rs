use std::f64::consts::PI;

use acflow::mesh::{generate_mesh, load_mesh, save_mesh, BoundaryEdge, Mesh, MeshError, Shape};
use proptest::prelude::*;

fn disk(h: f64) -> Mesh {
    generate_mesh(&Shape::Disk { radius: 1.0 }, h).unwrap()
}

/// The disk generator places ring `k` at radius `k/K`, so the mesh tiles the
/// regular `6K`-gon inscribed in the circle; the triangle areas must sum to the
/// polygon area exactly (up to roundoff).
#[test]
fn disk_mesh_tiles_the_inscribed_polygon() {
    for &h in &[0.3, 0.1, 0.05] {
        let mesh = disk(h);
        let rings = ((1.2 / h).ceil() as usize).max(1);
        let n = 6 * rings;
        let polygon = 0.5 * n as f64 * (2.0 * PI / n as f64).sin();
        let area = mesh.area();
        assert!(
            ((area - polygon) / polygon).abs() <= 1e-12,
            "h={h}: mesh area {area} vs inscribed {n}-gon area {polygon}"
        );
    }
}

/// The area missing against the true disk is the polygonal boundary deficit,
/// which is O(h²): halving h must shrink it by ≈ 4.
#[test]
fn disk_area_deficit_shrinks_at_second_order() {
    let deficit = |h: f64| PI - disk(h).area();
    let ratio = deficit(0.1) / deficit(0.05);
    assert!(
        (3.9..=4.1).contains(&ratio),
        "deficit ratio {ratio} not ≈ 4"
    );
}

#[test]
fn disk_boundary_vertices_sit_on_the_circle() {
    let mesh = disk(0.15);
    for be in &mesh.boundary_edges {
        assert_eq!(be.tag, 1);
        for &v in &be.vertices {
            let [x, y] = mesh.vertices[v];
            let r = (x * x + y * y).sqrt();
            assert!((r - 1.0).abs() <= 1e-14, "boundary vertex at radius {r}");
        }
    }
}

#[test]
fn rectangle_mesh_has_exact_area_and_uniform_cells() {
    let shape = Shape::Rectangle {
        x: [0.0, 2.0],
        y: [-1.0, 0.5],
    };
    let mesh = generate_mesh(&shape, 0.25).unwrap();
    let exact = 2.0 * 1.5;
    assert!(((mesh.area() - exact) / exact).abs() <= 1e-12);
    let h0 = mesh.h_local[0];
    assert!(mesh.h_local.iter().all(|&h| (h - h0).abs() <= 1e-14 * h0));
    assert!(mesh.h_global <= 1.5 * 0.25);
}

#[test]
fn rectangle_sides_carry_their_tags() {
    let shape = Shape::Rectangle {
        x: [0.0, 1.0],
        y: [0.0, 1.0],
    };
    let mesh = generate_mesh(&shape, 0.21).unwrap();
    let count = |tag: u32| {
        mesh.boundary_edges
            .iter()
            .filter(|be| be.tag == tag)
            .count()
    };
    let nx = (1.0f64 / 0.21).ceil() as usize;
    assert_eq!(count(1), nx, "bottom");
    assert_eq!(count(3), nx, "top");
    assert_eq!(count(2), nx, "right");
    assert_eq!(count(4), nx, "left");
    for be in &mesh.boundary_edges {
        let mid_y = 0.5 * (mesh.vertices[be.vertices[0]][1] + mesh.vertices[be.vertices[1]][1]);
        match be.tag {
            1 => assert_eq!(mid_y, 0.0),
            3 => assert_eq!(mid_y, 1.0),
            _ => {}
        }
    }
}

#[test]
fn generation_is_deterministic() {
    let shape = Shape::Disk { radius: 0.8 };
    assert_eq!(
        generate_mesh(&shape, 0.09).unwrap(),
        generate_mesh(&shape, 0.09).unwrap()
    );
}

#[test]
fn save_load_roundtrip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.acmesh");
    let mesh = disk(0.2);
    save_mesh(&mesh, &path).unwrap();
    assert_eq!(load_mesh(&path).unwrap(), mesh);
}

fn unit_triangle() -> (Vec<[f64; 2]>, Vec<BoundaryEdge>) {
    let vertices = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let edges = [[0, 1], [1, 2], [2, 0]]
        .into_iter()
        .map(|vertices| BoundaryEdge { vertices, tag: 1 })
        .collect();
    (vertices, edges)
}

#[test]
fn validation_rejects_clockwise_triangles() {
    let (vertices, edges) = unit_triangle();
    let err = Mesh::new(vertices, vec![[0, 2, 1]], edges).unwrap_err();
    assert!(matches!(err, MeshError::Validation(_)), "{err}");
}

#[test]
fn validation_rejects_missing_boundary_edges() {
    let (vertices, mut edges) = unit_triangle();
    edges.pop();
    let err = Mesh::new(vertices, vec![[0, 1, 2]], edges).unwrap_err();
    assert!(err.to_string().contains("not listed"), "{err}");
}

#[test]
fn validation_rejects_phantom_boundary_edges() {
    let (vertices, mut edges) = unit_triangle();
    edges.push(BoundaryEdge {
        vertices: [0, 3],
        tag: 1,
    });
    let err = Mesh::new(
        [vertices, vec![[1.0, 1.0]]].concat(),
        vec![[0, 1, 2]],
        edges,
    )
    .unwrap_err();
    assert!(err.to_string().contains("not an edge"), "{err}");
}

#[test]
fn validation_rejects_out_of_range_vertices() {
    let (vertices, edges) = unit_triangle();
    let err = Mesh::new(vertices, vec![[0, 1, 7]], edges).unwrap_err();
    assert!(err.to_string().contains("nonexistent"), "{err}");
}

#[test]
fn generator_rejects_degenerate_shapes() {
    assert!(generate_mesh(&Shape::Disk { radius: -1.0 }, 0.1).is_err());
    assert!(generate_mesh(
        &Shape::Rectangle {
            x: [1.0, 0.0],
            y: [0.0, 1.0]
        },
        0.1
    )
    .is_err());
    assert!(generate_mesh(&Shape::Disk { radius: 1.0 }, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generated_disks_respect_the_target_size(
        radius in 0.5f64..2.0,
        ratio in 0.08f64..0.5,
    ) {
        let h_target = ratio * radius;
        let mesh = generate_mesh(&Shape::Disk { radius }, h_target).unwrap();
        prop_assert!(mesh.h_global <= 1.5 * h_target);
        prop_assert!(mesh.area() < PI * radius * radius);
        prop_assert!(mesh.h_local.iter().all(|&h| h > 0.0));
    }

    #[test]
    fn generated_rectangles_have_exact_area(
        w in 0.2f64..3.0,
        hgt in 0.2f64..3.0,
        ratio in 0.05f64..0.6,
    ) {
        let shape = Shape::Rectangle { x: [0.0, w], y: [0.0, hgt] };
        let h_target = ratio * w.min(hgt);
        let mesh = generate_mesh(&shape, h_target).unwrap();
        let exact = w * hgt;
        prop_assert!(((mesh.area() - exact) / exact).abs() <= 1e-12);
        prop_assert!(mesh.h_global <= 1.5 * h_target);
    }
}
