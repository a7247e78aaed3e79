use std::sync::Arc;

use acflow::fem::{
    apply_dirichlet, assemble_scalar, assemble_vector, degree5, integrate_scalar,
    source_scalar_rhs, Coefficient, DirichletConstraint, Factorization, FeSpace, ScalarField,
    ScalarForm, SolverKind, VectorField, VectorForm,
};
use acflow::mesh::{generate_mesh, Shape};
use proptest::prelude::*;

fn disk_space(h: f64, degree: usize) -> Arc<FeSpace> {
    let mesh = Arc::new(generate_mesh(&Shape::Disk { radius: 1.0 }, h).unwrap());
    Arc::new(FeSpace::new(mesh, degree).unwrap())
}

fn square_space(h: f64, degree: usize) -> Arc<FeSpace> {
    let shape = Shape::Rectangle {
        x: [0.0, 1.0],
        y: [0.0, 1.0],
    };
    let mesh = Arc::new(generate_mesh(&shape, h).unwrap());
    Arc::new(FeSpace::new(mesh, degree).unwrap())
}

/// `∫_T λ₀^i λ₁^j λ₂^k = 2·area·i!·j!·k!/(i+j+k+2)!` on any triangle; the rule
/// must reproduce it for every monomial of total degree ≤ 5.
fn barycentric_integral(area: f64, powers: [u32; 3]) -> f64 {
    let factorial = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let total = powers[0] + powers[1] + powers[2];
    2.0 * area * powers.map(factorial).iter().product::<f64>() / factorial(total + 2)
}

#[test]
fn quadrature_is_exact_to_degree_five() {
    let rule = degree5();
    let area = 0.5;
    for i in 0..=5u32 {
        for j in 0..=5 - i {
            for k in 0..=5 - i - j {
                let exact = barycentric_integral(area, [i, j, k]);
                let quad: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| {
                        w * area
                            * p[0].powi(i as i32)
                            * p[1].powi(j as i32)
                            * p[2].powi(k as i32)
                    })
                    .sum();
                assert!(
                    (quad - exact).abs() <= 1e-13 * exact.max(1e-3),
                    "λ^({i},{j},{k}): quadrature {quad} vs exact {exact}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The same exactness must survive the push-forward to arbitrary physical
    /// triangles: integrating x²y³-style monomials of the *barycentric* functions
    /// over a random triangle.
    #[test]
    fn quadrature_exactness_is_affine_invariant(
        coords in prop::array::uniform6(-2.0f64..2.0),
        powers in (0u32..=5, 0u32..=5).prop_filter("degree ≤ 5", |(i, j)| i + j <= 5),
    ) {
        let [x0, y0, x1, y1, x2, y2] = coords;
        let area2 = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
        prop_assume!(area2.abs() > 0.1);
        let area = 0.5 * area2.abs();
        let (i, j) = powers;
        let exact = barycentric_integral(area, [i, j, 0]);
        let rule = degree5();
        let quad: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * area * p[0].powi(i as i32) * p[1].powi(j as i32))
            .sum();
        prop_assert!((quad - exact).abs() <= 1e-13 * exact.max(1e-3));
    }
}

/// Row sums of the mass matrix are `∫ψ_i`; summing them gives the domain area
/// because the basis is a partition of unity.
#[test]
fn mass_matrix_rows_sum_to_the_domain_area() {
    for degree in [1, 2] {
        let space = disk_space(0.2, degree);
        let mass = assemble_scalar(&space, ScalarForm::Mass).unwrap();
        let ones = vec![1.0; space.n_dofs()];
        let total: f64 = mass.matvec(&ones).iter().sum();
        let area = space.mesh().area();
        assert!(
            ((total - area) / area).abs() <= 1e-12,
            "P{degree}: Σ M_ij = {total} vs area {area}"
        );
    }
}

/// Constants are in the kernel of the scalar diffusion operator.
#[test]
fn diffusion_annihilates_constants() {
    let space = disk_space(0.2, 2);
    let stiff = assemble_scalar(&space, ScalarForm::Diffusion(Coefficient::Constant(1.0))).unwrap();
    let ones = vec![1.0; space.n_dofs()];
    let max = stiff.matvec(&ones).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max <= 1e-12, "‖K·1‖∞ = {max}");
}

/// Rigid motions (translations and the rotation (−y, x)) have zero strain rate,
/// so the ε-stiffness must annihilate them.
#[test]
fn strain_stiffness_annihilates_rigid_motions() {
    let space = disk_space(0.2, 2);
    let stiff = assemble_vector(&space, VectorForm::StiffnessEps).unwrap();
    for (name, motion) in [
        ("x-translation", [1.0, 0.0, 0.0]),
        ("y-translation", [0.0, 1.0, 0.0]),
        ("rotation", [0.0, 0.0, 1.0]),
    ] {
        let field = VectorField::interpolate(space.clone(), |[x, y]| {
            [
                motion[0] - motion[2] * y,
                motion[1] + motion[2] * x,
            ]
        });
        let max = stiff
            .matvec(&field.values)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max <= 1e-12, "{name}: ‖K_ε·u‖∞ = {max}");
    }
}

/// Divergence-free fields are in the kernel of the grad-div operator.
#[test]
fn grad_div_annihilates_divergence_free_fields() {
    let space = disk_space(0.2, 2);
    let gd = assemble_vector(&space, VectorForm::GradDiv).unwrap();
    let field = VectorField::interpolate(space.clone(), |[x, y]| [y * y, x * x]);
    let max = gd
        .matvec(&field.values)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max <= 1e-11, "‖K_div·u‖∞ = {max}");
}

/// P2 interpolation is exact on quadratics and the L² error functional sees it.
#[test]
fn quadratic_fields_are_reproduced_exactly() {
    let space = disk_space(0.25, 2);
    let f = |[x, y]: [f64; 2]| 1.0 + 2.0 * x - y + 0.5 * x * x - x * y + 2.0 * y * y;
    let field = ScalarField::interpolate(space.clone(), f);
    let err2 = integrate_scalar(&field, |x, v, _grad| (v - f(x)).powi(2));
    assert!(err2 <= 1e-26, "∫(I_h f − f)² = {err2}");
}

/// End-to-end Poisson solve with a manufactured quadratic: assembly, Dirichlet
/// elimination, and the direct solver must reproduce it to solver precision.
#[test]
fn poisson_solve_reproduces_a_quadratic() {
    let space = disk_space(0.2, 2);
    let exact = |[x, y]: [f64; 2]| x * x + 2.0 * y * y - 0.5 * x * y;
    let stiff = assemble_scalar(&space, ScalarForm::Diffusion(Coefficient::Constant(1.0))).unwrap();
    // (∇u, ∇ψ) = (f, ψ) with f = −Δ(exact) = −6
    let mut rhs = source_scalar_rhs(&space, &|_| -6.0);
    let constraint = DirichletConstraint::scalar_boundary(&space);
    let g: Vec<f64> = space.dof_coords().iter().map(|&x| exact(x)).collect();
    let mat = apply_dirichlet(&stiff, &mut rhs, &constraint, &g);
    let solver = Factorization::new(&mat, SolverKind::Direct).unwrap();
    let u = solver.solve(&rhs).unwrap();
    let max_err = u
        .iter()
        .zip(space.dof_coords())
        .map(|(&ui, &x)| (ui - exact(x)).abs())
        .fold(0.0f64, f64::max);
    assert!(max_err <= 1e-9, "nodal error {max_err}");
}

/// The direct and conjugate-gradient solvers obey the same residual contract.
#[test]
fn direct_and_iterative_solvers_agree() {
    let space = square_space(0.2, 1);
    let mass = assemble_scalar(&space, ScalarForm::Mass).unwrap();
    let stiff = assemble_scalar(&space, ScalarForm::Diffusion(Coefficient::Constant(0.3))).unwrap();
    let sys = acflow::fem::CsrMatrix::linear_combination(&[(1.0, &mass), (1.0, &stiff)]);
    let b: Vec<f64> = (0..sys.n).map(|i| (i as f64 * 0.37).sin()).collect();
    let direct = Factorization::new(&sys, SolverKind::Direct).unwrap();
    let cg = Factorization::new(&sys, SolverKind::IterativeCg).unwrap();
    let xd = direct.solve(&b).unwrap();
    let xc = cg.solve(&b).unwrap();
    let scale = xd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_diff = xd
        .iter()
        .zip(&xc)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(max_diff <= 1e-7 * scale, "direct vs CG: {max_diff}");
}

/// Interpolating then evaluating through the blocked vector layout keeps the
/// components straight.
#[test]
fn vector_layout_keeps_components_separate() {
    let space = square_space(0.3, 2);
    let field = VectorField::interpolate(space.clone(), |[x, y]| [x, 10.0 * y]);
    let n = space.n_dofs();
    for (i, &[x, y]) in space.dof_coords().iter().enumerate() {
        assert!((field.values[i] - x).abs() <= 1e-14);
        assert!((field.values[n + i] - 10.0 * y).abs() <= 1e-13);
    }
}
