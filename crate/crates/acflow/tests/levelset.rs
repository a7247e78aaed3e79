use std::f64::consts::PI;
use std::sync::Arc;

use acflow::fem::{integrate_scalar, FeSpace, ScalarField, VectorField};
use acflow::levelset::{
    reconstruct_materials, EtaLaw, LevelSetError, LevelSetParams, LevelSetStepper, MaterialLaw,
    PhiBc,
};
use acflow::mesh::{generate_mesh, Shape};
use acflow::mms::{case_by_name, source_levelset};
use proptest::prelude::*;

fn p2_disk(radius: f64, h: f64) -> Arc<FeSpace> {
    let mesh = Arc::new(generate_mesh(&Shape::Disk { radius }, h).unwrap());
    Arc::new(FeSpace::new(mesh, 2).unwrap())
}

fn p2_square(h: f64) -> Arc<FeSpace> {
    let shape = Shape::Rectangle {
        x: [0.0, 1.0],
        y: [0.0, 1.0],
    };
    let mesh = Arc::new(generate_mesh(&shape, h).unwrap());
    Arc::new(FeSpace::new(mesh, 2).unwrap())
}

fn total_integral(phi: &ScalarField) -> f64 {
    integrate_scalar(phi, |_, v, _| v)
}

/// Rigid rotation of a sharp disc indicator for one full revolution: the disc
/// comes back to its starting position, so the field can be compared directly
/// against its own initial data.
struct Revolution {
    phi0: ScalarField,
    phi: ScalarField,
    worst_overshoot: f64,
}

fn rotate_sharp_disc(h: f64, disc_radius: f64, steps_per_unit_h: f64) -> Revolution {
    let space = p2_disk(1.0, h);
    let params = LevelSetParams {
        c_comp: 1.0,
        ..LevelSetParams::default()
    };
    let steps = (2.0 * PI * steps_per_unit_h / h).ceil() as usize;
    let tau = 2.0 * PI / steps as f64;
    let mut stepper = LevelSetStepper::new(space.clone(), params, tau, PhiBc::Natural).unwrap();

    let phi0 = ScalarField::interpolate(space.clone(), |[x, y]| {
        let r2 = (x - 0.5) * (x - 0.5) + y * y;
        if r2 < disc_radius * disc_radius {
            1.0
        } else {
            0.0
        }
    });
    let u = VectorField::interpolate(space.clone(), |[x, y]| [-y, x]);

    let mut phi = phi0.clone();
    let mut worst_overshoot = 0.0f64;
    for _ in 0..steps {
        phi = stepper
            .step_levelset_semi_implicit(&phi, &u, None, None)
            .unwrap();
        let over = phi.values.iter().fold(0.0f64, |m, &v| m.max(v - 1.0));
        let under = phi.values.iter().fold(0.0f64, |m, &v| m.max(-v));
        worst_overshoot = worst_overshoot.max(over + under);
    }
    Revolution {
        phi0,
        phi,
        worst_overshoot,
    }
}

fn l1_difference(a: &ScalarField, b: &ScalarField) -> f64 {
    let diff = ScalarField::from_values(
        a.space().clone(),
        a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
    )
    .unwrap();
    integrate_scalar(&diff, |_, v, _| v.abs())
}

#[test]
fn rotated_sharp_disc_overshoot_stays_bounded() {
    let run = rotate_sharp_disc(0.1, 0.2, 2.0);
    assert!(
        run.worst_overshoot <= 0.05,
        "worst overshoot {} exceeds the frozen 0.05 bound",
        run.worst_overshoot
    );
    let drift = (total_integral(&run.phi) - total_integral(&run.phi0)).abs();
    assert!(drift <= 1e-12, "total integral drifted by {drift:e}");
}

#[test]
fn rotated_sharp_disc_returns_to_its_initial_data() {
    let coarse = rotate_sharp_disc(0.2, 0.3, 4.0);
    let fine = rotate_sharp_disc(0.1, 0.3, 4.0);
    let err_coarse = l1_difference(&coarse.phi, &coarse.phi0);
    let err_fine = l1_difference(&fine.phi, &fine.phi0);
    assert!(
        err_coarse <= 0.40,
        "h=0.2 return error {err_coarse} above frozen bound"
    );
    assert!(
        err_fine <= 0.27,
        "h=0.1 return error {err_fine} above frozen bound"
    );
    assert!(
        err_fine < err_coarse,
        "return error must shrink under refinement: {err_coarse} -> {err_fine}"
    );
}

#[test]
fn pure_diffusion_conserves_the_total_integral() {
    let space = p2_square(0.2);
    let mut stepper = LevelSetStepper::new(
        space.clone(),
        LevelSetParams::default(),
        0.05,
        PhiBc::Natural,
    )
    .unwrap();
    let mut phi = ScalarField::interpolate(space.clone(), |[x, _]| x);
    let u = VectorField::interpolate(space.clone(), |_| [0.0, 0.0]);
    let mass0 = total_integral(&phi);
    for _ in 0..20 {
        phi = stepper
            .step_levelset_semi_implicit(&phi, &u, None, None)
            .unwrap();
    }
    let spread = phi.values.iter().fold(0.0f64, |m, &v| m.max((v - 0.5).abs()));
    assert!(spread < 0.5, "diffusion should pull φ = x toward its mean");
    assert!((total_integral(&phi) - mass0).abs() <= 1e-10);
}

#[test]
fn one_step_variants_differ_at_second_order() {
    let case = case_by_name("disk_linear_eta_10").unwrap();
    let space = p2_disk(1.0, 0.1);
    let phi0 = ScalarField::interpolate(space.clone(), |x| case.exact_phi(x, 0.0));
    let u0 = VectorField::interpolate(space.clone(), |x| case.exact_u(x, 0.0));
    let step_gap = |tau: f64| {
        let params = LevelSetParams::default();
        let mut semi =
            LevelSetStepper::new(space.clone(), params, tau, PhiBc::DirichletExact).unwrap();
        let mut explicit =
            LevelSetStepper::new(space.clone(), params, tau, PhiBc::DirichletExact).unwrap();
        let bc: Vec<f64> = space
            .dof_coords()
            .iter()
            .map(|&x| case.exact_phi(x, tau))
            .collect();
        let source_new = |x: [f64; 2]| source_levelset(&case, x, tau);
        let source_old = |x: [f64; 2]| source_levelset(&case, x, 0.0);
        let a = semi
            .step_levelset_semi_implicit(&phi0, &u0, Some(&source_new), Some(&bc))
            .unwrap();
        let b = explicit
            .step_levelset_explicit(&phi0, &u0, Some(&source_old), Some(&bc))
            .unwrap();
        let diff = ScalarField::from_values(
            space.clone(),
            a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
        )
        .unwrap();
        integrate_scalar(&diff, |_, v, _| v * v).sqrt()
    };
    let ratio = step_gap(0.02) / step_gap(0.01);
    assert!(
        (3.4..=4.6).contains(&ratio),
        "halving τ should shrink the variant gap ~4×, got {ratio}"
    );
}

#[test]
fn explicit_operator_is_factored_once_and_never_drifts() {
    let space = p2_disk(1.0, 0.3);
    let params = LevelSetParams {
        c_comp: 1.0,
        ..LevelSetParams::default()
    };
    let mut stepper = LevelSetStepper::new(space.clone(), params, 0.05, PhiBc::Natural).unwrap();
    let mut phi = ScalarField::interpolate(space.clone(), |[x, y]| {
        0.5 + 0.4 * (PI * x).sin() * (PI * y).cos()
    });
    for k in 0..20 {
        let t = k as f64 * 0.05;
        let u = VectorField::interpolate(space.clone(), |[x, y]| {
            [-y * t.cos(), x * (1.0 + 0.3 * t.sin())]
        });
        phi = stepper
            .step_levelset_explicit(&phi, &u, None, None)
            .unwrap();
    }
    assert_eq!(stepper.factorization_events(), 1);
    let factored = stepper
        .factored_implicit_operator()
        .expect("stepper has stepped")
        .clone();
    assert_eq!(stepper.assemble_implicit_operator(), factored);
}

#[test]
fn materials_track_the_level_set_nodally() {
    let space = p2_square(0.5);
    let law = MaterialLaw::new(1.0, 100.0, EtaLaw::Reciprocal).unwrap();

    let zero = ScalarField::interpolate(space.clone(), |_| 0.0);
    let (rho, eta) = reconstruct_materials(&zero, &law).unwrap();
    assert!(rho.values.iter().all(|&r| r == 1.0));
    assert!(eta.values.iter().all(|&e| e == 1.0));

    let one = ScalarField::interpolate(space.clone(), |_| 1.0);
    let (rho, eta) = reconstruct_materials(&one, &law).unwrap();
    assert!(rho.values.iter().all(|&r| r == 100.0));
    assert!(eta.values.iter().all(|&e| e == 0.01));

    let ramp = ScalarField::interpolate(space.clone(), |[x, _]| x);
    let (rho, _) = reconstruct_materials(&ramp, &law).unwrap();
    for (&phi_i, &rho_i) in ramp.values.iter().zip(&rho.values) {
        assert!((rho_i - (1.0 + 99.0 * phi_i)).abs() <= 1e-13);
    }
}

#[test]
fn overshooting_the_reciprocal_law_is_an_error() {
    let space = p2_square(0.5);
    let law = MaterialLaw::new(1.0, 100.0, EtaLaw::Reciprocal).unwrap();
    let negative = ScalarField::interpolate(space.clone(), |_| -0.05);
    let err = reconstruct_materials(&negative, &law).unwrap_err();
    assert!(matches!(err, LevelSetError::MaterialLaw(_)));
}

#[test]
fn non_finite_inputs_are_rejected() {
    let space = p2_square(0.5);
    let mut stepper = LevelSetStepper::new(
        space.clone(),
        LevelSetParams::default(),
        0.1,
        PhiBc::Natural,
    )
    .unwrap();
    let u = VectorField::interpolate(space.clone(), |_| [1.0, 0.0]);

    let mut poisoned = vec![0.0; space.n_dofs()];
    poisoned[0] = f64::NAN;
    let phi = ScalarField::from_values(space.clone(), poisoned).unwrap();
    let err = stepper
        .step_levelset_semi_implicit(&phi, &u, None, None)
        .unwrap_err();
    assert!(matches!(err, LevelSetError::InvalidState(_)));

    let clean = ScalarField::interpolate(space.clone(), |_| 0.5);
    let mut bad_u = vec![0.0; 2 * space.n_dofs()];
    bad_u[3] = f64::INFINITY;
    let u_bad = VectorField::from_values(space.clone(), bad_u).unwrap();
    let err = stepper
        .step_levelset_explicit(&clean, &u_bad, None, None)
        .unwrap_err();
    assert!(matches!(err, LevelSetError::InvalidState(_)));
}

#[test]
fn boundary_values_must_match_the_boundary_condition() {
    let space = p2_square(0.5);
    let phi = ScalarField::interpolate(space.clone(), |_| 0.5);
    let u = VectorField::interpolate(space.clone(), |_| [0.0, 0.0]);
    let g = vec![0.5; space.n_dofs()];

    let mut natural = LevelSetStepper::new(
        space.clone(),
        LevelSetParams::default(),
        0.1,
        PhiBc::Natural,
    )
    .unwrap();
    let err = natural
        .step_levelset_semi_implicit(&phi, &u, None, Some(&g))
        .unwrap_err();
    assert!(matches!(err, LevelSetError::InvalidParameter(_)));

    let mut dirichlet = LevelSetStepper::new(
        space.clone(),
        LevelSetParams::default(),
        0.1,
        PhiBc::DirichletExact,
    )
    .unwrap();
    let err = dirichlet
        .step_levelset_semi_implicit(&phi, &u, None, None)
        .unwrap_err();
    assert!(matches!(err, LevelSetError::InvalidParameter(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// With the compression flux off the step is affine in `(φⁿ, f_φ)`: stepping
    /// a convex(-ish) combination equals the combination of the stepped parts.
    #[test]
    fn transport_step_is_affine_in_state_and_source(alpha in -0.5f64..1.5) {
        let space = p2_square(0.34);
        let u = VectorField::interpolate(space.clone(), |[x, y]| {
            [-(PI * y).sin(), (PI * x).sin()]
        });
        let fa = |[x, y]: [f64; 2]| x * x - y;
        let fb = |[x, y]: [f64; 2]| (PI * x).cos() * (PI * y).sin();
        let phi_a = ScalarField::interpolate(space.clone(), |[x, y]| 0.5 + 0.3 * x * y);
        let phi_b = ScalarField::interpolate(space.clone(), |[x, y]| (x - y).tanh());

        let step = |phi: &ScalarField, f: &dyn Fn([f64; 2]) -> f64| {
            let mut stepper = LevelSetStepper::new(
                space.clone(),
                LevelSetParams::default(),
                0.05,
                PhiBc::Natural,
            )
            .unwrap();
            stepper
                .step_levelset_semi_implicit(phi, &u, Some(f), None)
                .unwrap()
        };

        let mixed_phi = ScalarField::from_values(
            space.clone(),
            phi_a
                .values
                .iter()
                .zip(&phi_b.values)
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect(),
        )
        .unwrap();
        let mixed_source = |x: [f64; 2]| alpha * fa(x) + (1.0 - alpha) * fb(x);

        let stepped_mix = step(&mixed_phi, &mixed_source);
        let out_a = step(&phi_a, &fa);
        let out_b = step(&phi_b, &fb);

        let scale = stepped_mix.values.iter().fold(1.0f64, |m, &v| m.max(v.abs()));
        let worst = stepped_mix
            .values
            .iter()
            .zip(out_a.values.iter().zip(&out_b.values))
            .map(|(&mix, (&a, &b))| (mix - (alpha * a + (1.0 - alpha) * b)).abs())
            .fold(0.0f64, f64::max);
        prop_assert!(worst <= 1e-7 * scale, "affinity violated by {worst:e}");
    }
}
