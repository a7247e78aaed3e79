//! Error norms against exact solutions, convergence rates, and runtime
//! monitors: divergence norm, level-set overshoot, density bounds, and the
//! stability energy of the scheme.
//!
//! All norms integrate with the degree-5 rule on the discrete (polygonal)
//! domain; derivatives come from the finite-element expansion at quadrature
//! points.

use thiserror::Error;

use crate::fem::{
    integrate_scalar, integrate_vector, integrate_weighted_vector, FemError, ScalarField,
    VectorField,
};
use crate::mms::ManufacturedCase;
use crate::scheme::{FlowState, SchemeParams};

/// A reference norm below this floor switches relative errors to absolute.
pub const RELATIVE_NORM_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Fem(#[from] FemError),
}

/// Which norm an error is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    L1,
    L2,
}

/// An error value, relative by default; `absolute` marks the fallback taken
/// when the reference norm vanishes.
#[derive(Debug, Clone, Copy)]
pub struct ErrorValue {
    pub value: f64,
    pub absolute: bool,
}

fn finish(err: f64, reference: f64, norm: ErrorNorm) -> ErrorValue {
    let (err, reference) = match norm {
        ErrorNorm::L1 => (err, reference),
        ErrorNorm::L2 => (err.sqrt(), reference.sqrt()),
    };
    if reference < RELATIVE_NORM_FLOOR {
        ErrorValue {
            value: err,
            absolute: true,
        }
    } else {
        ErrorValue {
            value: err / reference,
            absolute: false,
        }
    }
}

/// `‖field − exact(·, t)‖ / ‖exact(·, t)‖` by element quadrature.
pub fn relative_error_scalar(
    field: &ScalarField,
    exact: impl Fn([f64; 2], f64) -> f64,
    t: f64,
    norm: ErrorNorm,
) -> ErrorValue {
    let contribution = |x: [f64; 2], val: f64| {
        let e = exact(x, t);
        let d = val - e;
        match norm {
            ErrorNorm::L1 => (d.abs(), e.abs()),
            ErrorNorm::L2 => (d * d, e * e),
        }
    };
    let err = integrate_scalar(field, |x, val, _| contribution(x, val).0);
    let reference = integrate_scalar(field, |x, val, _| contribution(x, val).1);
    finish(err, reference, norm)
}

/// Vector counterpart of [`relative_error_scalar`]; the L¹ integrand is the
/// Euclidean norm of the pointwise difference.
pub fn relative_error_vector(
    field: &VectorField,
    exact: impl Fn([f64; 2], f64) -> [f64; 2],
    t: f64,
    norm: ErrorNorm,
) -> ErrorValue {
    let contribution = |x: [f64; 2], val: [f64; 2]| {
        let e = exact(x, t);
        let d = [val[0] - e[0], val[1] - e[1]];
        let d2 = d[0] * d[0] + d[1] * d[1];
        let e2 = e[0] * e[0] + e[1] * e[1];
        match norm {
            ErrorNorm::L1 => (d2.sqrt(), e2.sqrt()),
            ErrorNorm::L2 => (d2, e2),
        }
    };
    let err = integrate_vector(field, |x, val, _| contribution(x, val).0);
    let reference = integrate_vector(field, |x, val, _| contribution(x, val).1);
    finish(err, reference, norm)
}

/// `rate_k = log(e_{k−1}/e_k) / log(h_{k−1}/h_k)` for each refinement.
pub fn convergence_rate(errors: &[f64], h_values: &[f64]) -> Result<Vec<f64>, DiagnosticsError> {
    if errors.len() != h_values.len() || errors.len() < 2 {
        return Err(DiagnosticsError::InvalidParameter(format!(
            "need equally many errors and resolutions (at least two), got {} and {}",
            errors.len(),
            h_values.len()
        )));
    }
    if let Some(v) = errors.iter().chain(h_values).find(|v| !(**v > 0.0)) {
        return Err(DiagnosticsError::InvalidParameter(format!(
            "errors and resolutions must be positive, got {v}"
        )));
    }
    errors
        .windows(2)
        .zip(h_values.windows(2))
        .map(|(e, h)| {
            if h[0] == h[1] {
                return Err(DiagnosticsError::InvalidParameter(
                    "repeated resolution makes the rate undefined".into(),
                ));
            }
            Ok((e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        })
        .collect()
}

/// The four terms of the stability energy, as reported.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBreakdown {
    /// `‖√ρ u‖²`
    pub kinetic: f64,
    /// `2τν̄‖√ρ ε(u)‖²`
    pub viscous: f64,
    /// `τλ̄‖√ρ div u‖²`
    pub grad_div: f64,
    /// `(τ/λ_eff)‖p‖²`
    pub pressure: f64,
    pub total: f64,
}

/// `Eⁿ = ‖√ρⁿuⁿ‖² + 2τν̄‖√ρⁿε(uⁿ)‖² + τλ̄‖√ρⁿ div uⁿ‖² + (τ/λ_eff)‖pⁿ‖²`
pub fn energy(state: &FlowState, params: &SchemeParams) -> Result<EnergyBreakdown, DiagnosticsError> {
    let kinetic = integrate_weighted_vector(&state.rho, &state.u, |_, r, v, _| {
        r * (v[0] * v[0] + v[1] * v[1])
    })?;
    let eps_sq = integrate_weighted_vector(&state.rho, &state.u, |_, r, _, j| {
        let e12 = 0.5 * (j[0][1] + j[1][0]);
        r * (j[0][0] * j[0][0] + j[1][1] * j[1][1] + 2.0 * e12 * e12)
    })?;
    let div_sq = integrate_weighted_vector(&state.rho, &state.u, |_, r, _, j| {
        let d = j[0][0] + j[1][1];
        r * d * d
    })?;
    let p_sq = integrate_scalar(&state.p, |_, v, _| v * v);

    let viscous = 2.0 * params.tau * params.nu_bar * eps_sq;
    let grad_div = params.tau * params.lambda_bar * div_sq;
    let pressure = params.tau / params.lambda_eff * p_sq;
    Ok(EnergyBreakdown {
        kinetic,
        viscous,
        grad_div,
        pressure,
        total: kinetic + viscous + grad_div + pressure,
    })
}

/// Pointwise health of a state: divergence norm, level-set overshoot beyond
/// `[0, 1]`, and the nodal density range.
#[derive(Debug, Clone, Copy)]
pub struct Monitors {
    pub div_norm: f64,
    pub overshoot: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

pub fn monitors(state: &FlowState) -> Monitors {
    let div_sq = integrate_vector(&state.u, |_, _, j| {
        let d = j[0][0] + j[1][1];
        d * d
    });
    let (phi_min, phi_max) = state.phi.min_max();
    let (rho_min, rho_max) = state.rho.min_max();
    Monitors {
        div_norm: div_sq.sqrt(),
        overshoot: (phi_max - 1.0).max(0.0) + (-phi_min).max(0.0),
        rho_min,
        rho_max,
    }
}

/// Everything measured about one state against its exact solution.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    pub t: f64,
    /// Relative L² velocity error.
    pub err_u: ErrorValue,
    /// Relative L² pressure error.
    pub err_p: ErrorValue,
    /// Relative L² density error.
    pub err_rho: ErrorValue,
    /// Relative L² level-set error.
    pub err_phi: ErrorValue,
    /// Relative L¹ level-set error.
    pub err_phi_l1: ErrorValue,
    pub monitors: Monitors,
    pub energy: EnergyBreakdown,
}

/// Measures `state` against the exact fields of `case` at `state.t`.
pub fn error_report(
    state: &FlowState,
    case: &ManufacturedCase,
    params: &SchemeParams,
) -> Result<ErrorReport, DiagnosticsError> {
    let t = state.t;
    Ok(ErrorReport {
        t,
        err_u: relative_error_vector(&state.u, |x, t| case.exact_u(x, t), t, ErrorNorm::L2),
        err_p: relative_error_scalar(&state.p, |x, t| case.exact_p(x, t), t, ErrorNorm::L2),
        err_rho: relative_error_scalar(&state.rho, |x, t| case.exact_rho(x, t), t, ErrorNorm::L2),
        err_phi: relative_error_scalar(&state.phi, |x, t| case.exact_phi(x, t), t, ErrorNorm::L2),
        err_phi_l1: relative_error_scalar(&state.phi, |x, t| case.exact_phi(x, t), t, ErrorNorm::L1),
        monitors: monitors(state),
        energy: energy(state, params)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::fem::FeSpace;
    use crate::mesh::{generate_mesh, Shape};

    fn p2_square(h: f64) -> Arc<FeSpace> {
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
        Arc::new(FeSpace::new(mesh, 2).unwrap())
    }

    #[test]
    fn interpolated_quadratic_has_no_error() {
        let space = p2_square(0.25);
        let f = |[x, y]: [f64; 2], _: f64| 1.0 + x * y + y * y;
        let field = ScalarField::interpolate(space, |x| f(x, 0.0));
        let err = relative_error_scalar(&field, f, 0.0, ErrorNorm::L2);
        assert!(!err.absolute);
        assert!(err.value <= 1e-12, "error {:e}", err.value);
    }

    #[test]
    fn constant_offset_against_unit_reference_is_the_offset() {
        let space = p2_square(0.25);
        let field = ScalarField::interpolate(space, |_| 1.25);
        let err = relative_error_scalar(&field, |_, _| 1.0, 0.0, ErrorNorm::L2);
        assert!((err.value - 0.25).abs() <= 1e-12);
        let err1 = relative_error_scalar(&field, |_, _| 1.0, 0.0, ErrorNorm::L1);
        assert!((err1.value - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn zero_reference_is_flagged_absolute() {
        let space = p2_square(0.5);
        let field = ScalarField::interpolate(space, |[x, _]| x);
        let err = relative_error_scalar(&field, |_, _| 0.0, 0.0, ErrorNorm::L2);
        assert!(err.absolute);
        assert!(err.value > 0.1);
    }

    #[test]
    fn rates_recover_geometric_sequences() {
        let rates = convergence_rate(&[4e-2, 2e-2, 5e-3], &[0.1, 0.05, 0.025]).unwrap();
        assert!((rates[0] - 1.0).abs() <= 1e-13);
        assert!((rates[1] - 2.0).abs() <= 1e-13);
        assert!(convergence_rate(&[1e-2], &[0.1]).is_err());
        assert!(convergence_rate(&[1e-2, -1e-2], &[0.1, 0.05]).is_err());
    }

    #[test]
    fn rigid_rotation_is_divergence_free() {
        let space = p2_square(0.25);
        let u = VectorField::interpolate(space.clone(), |[x, y]| [-y, x]);
        let phi = ScalarField::interpolate(space.clone(), |_| 0.5);
        let rho = ScalarField::interpolate(space.clone(), |_| 1.0);
        let eta = rho.clone();
        let p1 = Arc::new(FeSpace::new(space.mesh().clone(), 1).unwrap());
        let p = ScalarField::interpolate(p1, |_| 0.0);
        let m = u.clone();
        let state = FlowState::new(0.0, phi, rho, eta, m, u, p).unwrap();
        let mon = monitors(&state);
        assert!(mon.div_norm <= 1e-12, "div norm {:e}", mon.div_norm);
        assert_eq!(mon.overshoot, 0.0);
        assert_eq!((mon.rho_min, mon.rho_max), (1.0, 1.0));
    }

    #[test]
    fn energy_of_rest_state_with_unit_pressure() {
        let space = p2_square(0.25);
        let phi = ScalarField::interpolate(space.clone(), |_| 0.5);
        let rho = ScalarField::interpolate(space.clone(), |_| 1.0);
        let eta = rho.clone();
        let u = VectorField::zeros(space.clone());
        let m = VectorField::zeros(space.clone());
        let p1 = Arc::new(FeSpace::new(space.mesh().clone(), 1).unwrap());
        let p = ScalarField::interpolate(p1, |_| 1.0);
        let state = FlowState::new(0.0, phi, rho, eta, m, u, p).unwrap();
        let params = crate::scheme::init_parameters(
            &state.rho,
            &state.eta,
            0.05,
            1.0,
            crate::scheme::Variant::SemiImplicit,
        )
        .unwrap();
        let e = energy(&state, &params).unwrap();
        assert_eq!(e.kinetic, 0.0);
        assert_eq!(e.viscous, 0.0);
        assert_eq!(e.grad_div, 0.0);
        // Unit pressure on the unit square: E = τ/λ_eff.
        assert!((e.pressure - params.tau / params.lambda_eff).abs() <= 1e-13);
        assert_eq!(
            e.total,
            e.kinetic + e.viscous + e.grad_div + e.pressure
        );
    }
}
