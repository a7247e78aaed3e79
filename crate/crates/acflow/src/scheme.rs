//! Artificial-compressibility time stepping with momentum as the primary
//! unknown.
//!
//! Writing the flow equations for `m = ρu` and bounding the kinematic
//! viscosity by a constant `ν̄ ≥ max η/ρ` leaves an implicit momentum operator
//! `M/τ + 2ν̄(ε(·), ε(·)) + γ(div ·, div ·)` that never changes during a run,
//! so it is factored once. The variable density and viscosity enter through
//! right-hand-side corrections around the prediction `m* = ρⁿ⁺¹uⁿ`, velocity
//! is recovered nodally as `u = m/ρ`, and the pressure follows from an L²
//! projection of the velocity divergence instead of a Poisson solve:
//! `pⁿ⁺¹ = pⁿ − λ_eff Π(div uⁿ⁺¹)`.
//!
//! [`Simulation`] chains the stages — level-set transport, material
//! reconstruction, momentum solve, velocity recovery, pressure update — and
//! [`Simulation::for_case`] wires a manufactured solution into initial data,
//! sources, and boundary values for convergence studies.

use std::sync::Arc;

use thiserror::Error;

use crate::fem::{
    advect_vector_rhs, assemble_scalar, assemble_vector, bicgstab, constrain_matrix,
    div_source_rhs, eta_eps_rhs, grad_p_rhs, set_constrained_rhs, source_vector_rhs, CsrMatrix,
    DirichletConstraint, Factorization, FeSpace, FemError, ScalarField, ScalarForm, SolverKind,
    VectorField, VectorForm, RESIDUAL_TOL,
};
use crate::levelset::{
    reconstruct_materials, LevelSetError, LevelSetParams, LevelSetStepper, MaterialLaw, PhiBc,
};
use crate::mesh::generate_mesh;
use crate::mms::{source_levelset, source_momentum, ManufacturedCase};

/// Residual contract of the pressure-projection mass solves.
pub const PRESSURE_RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("velocity recovery: density dof {dof} is {value:e}, not positive")]
    DivisionByNonpositiveDensity { dof: usize, value: f64 },
    #[error("step {step}, {stage} stage: {source}")]
    Stage {
        step: usize,
        stage: &'static str,
        source: Box<SchemeError>,
    },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    LevelSet(#[from] LevelSetError),
}

fn stage_err(step: usize, stage: &'static str) -> impl Fn(SchemeError) -> SchemeError {
    move |e| SchemeError::Stage {
        step,
        stage,
        source: Box::new(e),
    }
}

/// How the convection and transport terms are treated in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Convection at the new time level; one extra assembly and an iterative
    /// solve per step.
    SemiImplicit,
    /// Convection from the previous step on the right-hand side; every
    /// implicit operator is factored exactly once per run.
    Explicit,
}

/// Coefficient of the implicit grad-div term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradDivCoef {
    /// `λ̄ = 1.1 λ_eff/ρ_under`, the stability-side choice.
    LambdaBar,
    /// `λ_eff` itself, matching the pressure update exactly.
    LambdaEff,
}

/// Whether the explicit variant keeps the symmetric-gradient factor 2 on the
/// split viscous pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplicitViscousForm {
    /// `2ν̄` implicit against `2η` explicit (same pair as the semi-implicit
    /// variant).
    SymmetricPair,
    /// `ν̄` against `η`, without the factor 2.
    SingleCoefficient,
}

/// Run-constant coefficients of the scheme.
#[derive(Debug, Clone, Copy)]
pub struct SchemeParams {
    pub tau: f64,
    pub lambda_user: f64,
    /// `max(1, ν̄ ρ_under) · λ_user`; the pressure-update coefficient.
    pub lambda_eff: f64,
    /// `1.1 · max over dofs of η(ρ⁰)/ρ⁰`
    pub nu_bar: f64,
    /// `min over dofs of ρ⁰`
    pub rho_under: f64,
    /// `1.1 · λ_eff/ρ_under`
    pub lambda_bar: f64,
    pub variant: Variant,
    pub grad_div_implicit_coef: GradDivCoef,
    pub explicit_viscous_form: ExplicitViscousForm,
}

impl SchemeParams {
    /// Factor applied to both `ν̄` in the implicit operator and `η` in the
    /// explicit correction.
    pub fn viscous_factor(&self) -> f64 {
        match (self.variant, self.explicit_viscous_form) {
            (Variant::Explicit, ExplicitViscousForm::SingleCoefficient) => 1.0,
            _ => 2.0,
        }
    }

    /// `γ`, the coefficient of the implicit grad-div term.
    pub fn grad_div_coefficient(&self) -> f64 {
        match self.grad_div_implicit_coef {
            GradDivCoef::LambdaBar => self.lambda_bar,
            GradDivCoef::LambdaEff => self.lambda_eff,
        }
    }
}

/// Derives the run-constant coefficients from the initial materials.
///
/// The grad-div and viscous-form choices default to [`GradDivCoef::LambdaBar`]
/// and [`ExplicitViscousForm::SymmetricPair`]; override the fields afterwards
/// to select the alternatives.
pub fn init_parameters(
    rho0: &ScalarField,
    eta0: &ScalarField,
    tau: f64,
    lambda_user: f64,
    variant: Variant,
) -> Result<SchemeParams, SchemeError> {
    if !FeSpace::same_space(rho0.space(), eta0.space()) {
        return Err(SchemeError::InvalidParameter(
            "density and viscosity live on different spaces".into(),
        ));
    }
    if !(tau > 0.0) {
        return Err(SchemeError::InvalidParameter(format!(
            "time step must be positive, got {tau}"
        )));
    }
    if !(lambda_user > 0.0) {
        return Err(SchemeError::InvalidParameter(format!(
            "lambda_user must be positive, got {lambda_user}"
        )));
    }
    let mut ratio_max = f64::NEG_INFINITY;
    let mut rho_under = f64::INFINITY;
    for (i, (&r, &e)) in rho0.values.iter().zip(&eta0.values).enumerate() {
        if !r.is_finite() || !e.is_finite() || r <= 0.0 || e <= 0.0 {
            return Err(SchemeError::InvalidState(format!(
                "initial materials must be positive and finite; dof {i} has rho {r}, eta {e}"
            )));
        }
        ratio_max = ratio_max.max(e / r);
        rho_under = rho_under.min(r);
    }
    let nu_bar = 1.1 * ratio_max;
    let lambda_eff = f64::max(1.0, nu_bar * rho_under) * lambda_user;
    let lambda_bar = 1.1 * lambda_eff / rho_under;
    Ok(SchemeParams {
        tau,
        lambda_user,
        lambda_eff,
        nu_bar,
        rho_under,
        lambda_bar,
        variant,
        grad_div_implicit_coef: GradDivCoef::LambdaBar,
        explicit_viscous_form: ExplicitViscousForm::SymmetricPair,
    })
}

/// All unknowns of one time level. `phi`, `rho`, `eta`, `m`, `u` share one
/// velocity-degree space; `p` lives on the P1 space of the same mesh.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub phi: ScalarField,
    pub rho: ScalarField,
    pub eta: ScalarField,
    pub m: VectorField,
    pub u: VectorField,
    pub p: ScalarField,
}

impl FlowState {
    pub fn new(
        t: f64,
        phi: ScalarField,
        rho: ScalarField,
        eta: ScalarField,
        m: VectorField,
        u: VectorField,
        p: ScalarField,
    ) -> Result<Self, SchemeError> {
        let space = m.space();
        let shared = [phi.space(), rho.space(), eta.space(), u.space()];
        if shared.iter().any(|s| !FeSpace::same_space(space, s)) {
            return Err(SchemeError::InvalidParameter(
                "state fields live on different spaces".into(),
            ));
        }
        if p.space().degree() != 1 || !Arc::ptr_eq(p.space().mesh(), space.mesh()) {
            return Err(SchemeError::InvalidParameter(
                "pressure must live on the P1 space of the same mesh".into(),
            ));
        }
        let finite = phi
            .values
            .iter()
            .chain(&rho.values)
            .chain(&eta.values)
            .chain(&m.values)
            .chain(&u.values)
            .chain(&p.values)
            .all(|v| v.is_finite());
        if !t.is_finite() || !finite {
            return Err(SchemeError::InvalidState(
                "non-finite value in flow state".into(),
            ));
        }
        if let Some((i, &r)) = rho.values.iter().enumerate().find(|(_, &r)| r <= 0.0) {
            return Err(SchemeError::InvalidState(format!(
                "density dof {i} is {r}, not positive"
            )));
        }
        Ok(FlowState {
            t,
            phi,
            rho,
            eta,
            m,
            u,
            p,
        })
    }
}

/// Nodal velocity recovery `u_i = m_i/ρ_i`, component by component.
pub fn recover_velocity(m: &VectorField, rho: &ScalarField) -> Result<VectorField, SchemeError> {
    if !FeSpace::same_space(m.space(), rho.space()) {
        return Err(SchemeError::InvalidParameter(
            "momentum and density live on different spaces".into(),
        ));
    }
    let n = rho.values.len();
    let mut values = vec![0.0; 2 * n];
    for (i, &r) in rho.values.iter().enumerate() {
        if !(r > 0.0) {
            return Err(SchemeError::DivisionByNonpositiveDensity { dof: i, value: r });
        }
        values[i] = m.values[i] / r;
        values[i + n] = m.values[i + n] / r;
    }
    Ok(VectorField::from_values(m.space().clone(), values)?)
}

/// Advances the momentum one `τ` at a time on a fixed space.
///
/// The time-independent block `M/τ + c_ν ν̄(ε(·), ε(·)) + γ(div ·, div ·)` is
/// assembled and constrained at construction and factored once on first use:
/// the explicit variant solves with it directly, the semi-implicit variant
/// uses it to precondition the convection-augmented system.
pub struct MomentumStepper {
    space: Arc<FeSpace>,
    params: SchemeParams,
    constraint: DirichletConstraint,
    mass_over_tau: CsrMatrix,
    stiffness_eps: CsrMatrix,
    grad_div: CsrMatrix,
    /// Time-independent implicit block, unconstrained.
    base: CsrMatrix,
    base_constrained: CsrMatrix,
    base_coupling: CsrMatrix,
    factored: Option<Factorization>,
    factorization_events: usize,
}

impl MomentumStepper {
    pub fn new(space: Arc<FeSpace>, params: SchemeParams) -> Result<Self, SchemeError> {
        let mass = assemble_vector(&space, VectorForm::Mass)?;
        let stiffness_eps = assemble_vector(&space, VectorForm::StiffnessEps)?;
        let grad_div = assemble_vector(&space, VectorForm::GradDiv)?;
        let mass_over_tau = CsrMatrix::linear_combination(&[(1.0 / params.tau, &mass)]);
        let base = CsrMatrix::linear_combination(&[
            (1.0, &mass_over_tau),
            (params.viscous_factor() * params.nu_bar, &stiffness_eps),
            (params.grad_div_coefficient(), &grad_div),
        ]);
        let constraint = DirichletConstraint::vector_boundary(&space);
        let (base_constrained, base_coupling) = constrain_matrix(&base, &constraint, true);
        Ok(MomentumStepper {
            space,
            params,
            constraint,
            mass_over_tau,
            stiffness_eps,
            grad_div,
            base,
            base_constrained,
            base_coupling,
            factored: None,
            factorization_events: 0,
        })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// Number of matrix factorizations performed so far.
    pub fn factorization_events(&self) -> usize {
        self.factorization_events
    }

    /// Fresh assembly of the constrained time-independent block, for
    /// comparison against the factored copy.
    pub fn assemble_implicit_operator(&self) -> CsrMatrix {
        constrain_matrix(&self.base, &self.constraint, true).0
    }

    /// The factored implicit block, if a step has run.
    pub fn factored_implicit_operator(&self) -> Option<&CsrMatrix> {
        self.factored.as_ref().map(|f| f.matrix())
    }

    fn ensure_factored(&mut self) -> Result<(), SchemeError> {
        if self.factored.is_none() {
            let fact = Factorization::new(&self.base_constrained, SolverKind::Direct)?;
            self.factorization_events += 1;
            self.factored = Some(fact);
        }
        Ok(())
    }

    fn check_inputs(&self, state: &FlowState, g: &[f64]) -> Result<(), SchemeError> {
        if !FeSpace::same_space(&self.space, state.m.space()) {
            return Err(SchemeError::InvalidParameter(
                "momentum step state lives on a different space".into(),
            ));
        }
        if g.len() != 2 * self.space.n_dofs() {
            return Err(SchemeError::InvalidParameter(format!(
                "boundary vector length {} does not match 2×{} dofs",
                g.len(),
                self.space.n_dofs()
            )));
        }
        Ok(())
    }

    /// Right-hand side shared by both variants:
    /// `M/τ·mⁿ + (c_ν ν̄ K_ε + γ K_div)·m* − c_ν(ηⁿ⁺¹ε(uⁿ), ε(v))
    ///  − (∇pⁿ, v) − λ_eff(div uⁿ, div v) + (fⁿ⁺¹, v)` with `m* = ρⁿ⁺¹uⁿ`.
    fn common_rhs(
        &self,
        state: &FlowState,
        source: Option<&dyn Fn([f64; 2]) -> [f64; 2]>,
    ) -> Result<Vec<f64>, SchemeError> {
        let n = self.space.n_dofs();
        let mut m_star = vec![0.0; 2 * n];
        for (i, &r) in state.rho.values.iter().enumerate() {
            m_star[i] = r * state.u.values[i];
            m_star[i + n] = r * state.u.values[i + n];
        }

        let mut rhs = self.mass_over_tau.matvec(&state.m.values);
        let c_nu = self.params.viscous_factor() * self.params.nu_bar;
        let gamma = self.params.grad_div_coefficient();
        let eps_star = self.stiffness_eps.matvec(&m_star);
        let div_star = self.grad_div.matvec(&m_star);
        let div_u = self.grad_div.matvec(&state.u.values);
        let eta_eps = eta_eps_rhs(&self.space, &state.eta, &state.u)?;
        let grad_p = grad_p_rhs(&self.space, &state.p)?;
        let c_eta = self.params.viscous_factor();
        let lambda = self.params.lambda_eff;
        for i in 0..2 * n {
            rhs[i] += c_nu * eps_star[i] + gamma * div_star[i]
                - c_eta * eta_eps[i]
                - grad_p[i]
                - lambda * div_u[i];
        }
        if let Some(f) = source {
            let src = source_vector_rhs(&self.space, f);
            rhs.iter_mut().zip(&src).for_each(|(r, s)| *r += s);
        }
        Ok(rhs)
    }

    /// One step with implicit convection `((uⁿ·∇)mⁿ⁺¹, v)`. The system matrix
    /// depends on `uⁿ` and is rebuilt every step; it is solved by BiCGStab
    /// preconditioned with the factored time-independent block, falling back
    /// to a direct solve.
    ///
    /// `state` holds the step-`n` fields except that `rho` and `eta` are
    /// already transported to step `n+1`; `g` carries the boundary momentum at
    /// the new time level.
    pub fn step_momentum_semi_implicit(
        &mut self,
        state: &FlowState,
        source: Option<&dyn Fn([f64; 2]) -> [f64; 2]>,
        g: &[f64],
    ) -> Result<VectorField, SchemeError> {
        self.check_inputs(state, g)?;
        let convection = assemble_vector(&self.space, VectorForm::Convection(&state.u))?;
        let system = CsrMatrix::linear_combination(&[(1.0, &self.base), (1.0, &convection)]);
        let (system_c, coupling) = constrain_matrix(&system, &self.constraint, true);

        let mut rhs = self.common_rhs(state, source)?;
        set_constrained_rhs(&mut rhs, &coupling, &self.constraint, g);

        self.ensure_factored()?;
        let precond = self.factored.as_ref().expect("factored above");
        let solved = bicgstab(
            |x, y| system_c.matvec_into(x, y),
            |r| precond.apply_inverse(r),
            &rhs,
            Some(&state.m.values),
            RESIDUAL_TOL,
            200,
        );
        let values = match solved {
            Ok((x, _)) => x,
            Err(FemError::NotConverged { .. }) => {
                let direct = Factorization::new(&system_c, SolverKind::Direct)?;
                self.factorization_events += 1;
                direct.solve(&rhs)?
            }
            Err(e) => return Err(e.into()),
        };
        Ok(VectorField::from_values(self.space.clone(), values)?)
    }

    /// One step with the convection `((uⁿ·∇)mⁿ, v)` moved to the right-hand
    /// side, so the factored time-independent block is the whole system.
    ///
    /// Same contract on `state` and `g` as the semi-implicit step.
    pub fn step_momentum_explicit(
        &mut self,
        state: &FlowState,
        source: Option<&dyn Fn([f64; 2]) -> [f64; 2]>,
        g: &[f64],
    ) -> Result<VectorField, SchemeError> {
        self.check_inputs(state, g)?;
        let mut rhs = self.common_rhs(state, source)?;
        let transport = advect_vector_rhs(&self.space, &state.u, &state.m)?;
        rhs.iter_mut().zip(&transport).for_each(|(r, t)| *r -= t);
        set_constrained_rhs(&mut rhs, &self.base_coupling, &self.constraint, g);

        self.ensure_factored()?;
        let values = self.factored.as_ref().expect("factored above").solve(&rhs)?;
        Ok(VectorField::from_values(self.space.clone(), values)?)
    }
}

/// Pressure update by L² projection onto the P1 space.
///
/// The pressure mass matrix is factored at construction and every projection
/// is solved to [`PRESSURE_RESIDUAL_TOL`], so the update
/// `pⁿ⁺¹ = pⁿ − λ_eff Π(div uⁿ⁺¹)` holds to solver precision.
pub struct PressureUpdater {
    space: Arc<FeSpace>,
    mass: Factorization,
}

impl PressureUpdater {
    pub fn new(space: Arc<FeSpace>) -> Result<Self, SchemeError> {
        if space.degree() != 1 {
            return Err(SchemeError::InvalidParameter(format!(
                "pressure space must be P1, got degree {}",
                space.degree()
            )));
        }
        let mass = assemble_scalar(&space, ScalarForm::Mass)?;
        let mass = Factorization::new(&mass, SolverKind::Direct)?;
        Ok(PressureUpdater { space, mass })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    /// `Π(div u)`: the L² projection of the velocity divergence.
    pub fn project_div(&self, u: &VectorField) -> Result<ScalarField, SchemeError> {
        if !Arc::ptr_eq(self.space.mesh(), u.space().mesh()) {
            return Err(SchemeError::InvalidParameter(
                "velocity lives on a different mesh".into(),
            ));
        }
        let rhs = div_source_rhs(&self.space, u)?;
        let values = self.mass.solve_tol(&rhs, PRESSURE_RESIDUAL_TOL)?;
        Ok(ScalarField::from_values(self.space.clone(), values)?)
    }

    /// `pⁿ⁺¹ = pⁿ − λ_eff Π(div uⁿ⁺¹)`
    pub fn update_pressure(
        &self,
        p: &ScalarField,
        u: &VectorField,
        lambda_eff: f64,
    ) -> Result<ScalarField, SchemeError> {
        if !FeSpace::same_space(&self.space, p.space()) {
            return Err(SchemeError::InvalidParameter(
                "pressure lives on a different space".into(),
            ));
        }
        let proj = self.project_div(u)?;
        let values = p
            .values
            .iter()
            .zip(&proj.values)
            .map(|(&pv, &d)| pv - lambda_eff * d)
            .collect();
        Ok(ScalarField::from_values(self.space.clone(), values)?)
    }
}

/// Time-dependent vector data `(x, t) ↦ [f64; 2]`.
pub type VectorFn = dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync;
/// Time-dependent scalar data `(x, t) ↦ f64`.
pub type ScalarFn = dyn Fn([f64; 2], f64) -> f64 + Send + Sync;

/// Sources and boundary data of a run. Absent sources are zero and an absent
/// momentum boundary closure means homogeneous Dirichlet values.
#[derive(Default, Clone)]
pub struct ProblemData {
    pub momentum_source: Option<Arc<VectorFn>>,
    pub levelset_source: Option<Arc<ScalarFn>>,
    pub momentum_bc: Option<Arc<VectorFn>>,
    /// Required exactly when the level set uses Dirichlet conditions.
    pub phi_bc_values: Option<Arc<ScalarFn>>,
}

/// One complete run: the three steppers plus the current state.
///
/// [`Simulation::advance`] performs one time step in the fixed stage order
/// level set → materials → momentum → velocity → pressure; any failure is
/// wrapped with the step index and stage name. Momentum boundary data and
/// sources are evaluated at the new time level; the level-set source follows
/// the variant (new time level when implicit, old when explicit).
pub struct Simulation {
    v_space: Arc<FeSpace>,
    params: SchemeParams,
    law: MaterialLaw,
    phi_bc: PhiBc,
    data: ProblemData,
    levelset: LevelSetStepper,
    momentum: MomentumStepper,
    pressure: PressureUpdater,
    state: FlowState,
    step_index: usize,
}

impl Simulation {
    pub fn new(
        state: FlowState,
        params: SchemeParams,
        law: MaterialLaw,
        levelset_params: LevelSetParams,
        phi_bc: PhiBc,
        data: ProblemData,
    ) -> Result<Self, SchemeError> {
        match phi_bc {
            PhiBc::DirichletExact if data.phi_bc_values.is_none() => {
                return Err(SchemeError::InvalidParameter(
                    "Dirichlet level-set conditions need boundary values".into(),
                ));
            }
            PhiBc::Natural if data.phi_bc_values.is_some() => {
                return Err(SchemeError::InvalidParameter(
                    "boundary values supplied for natural level-set conditions".into(),
                ));
            }
            _ => {}
        }
        let v_space = state.m.space().clone();
        let p_space = state.p.space().clone();
        let levelset = LevelSetStepper::new(v_space.clone(), levelset_params, params.tau, phi_bc)?;
        let momentum = MomentumStepper::new(v_space.clone(), params)?;
        let pressure = PressureUpdater::new(p_space)?;
        Ok(Simulation {
            v_space,
            params,
            law,
            phi_bc,
            data,
            levelset,
            momentum,
            pressure,
            state,
            step_index: 0,
        })
    }

    /// Builds a run of `case`: a fresh mesh at resolution `h`, exact initial
    /// data interpolated at `t = 0`, manufactured sources, and exact boundary
    /// values.
    pub fn for_case(case: &ManufacturedCase, opts: &CaseOptions) -> Result<Self, SchemeError> {
        let mesh = generate_mesh(&case.shape, opts.h)
            .map_err(|e| SchemeError::InvalidParameter(e.to_string()))?;
        let mesh = Arc::new(mesh);
        let v_space = Arc::new(FeSpace::new(mesh.clone(), 2)?);
        let p_space = Arc::new(FeSpace::new(mesh, 1)?);

        let phi0 = ScalarField::interpolate(v_space.clone(), |x| case.exact_phi(x, 0.0));
        let (rho0, eta0) = reconstruct_materials(&phi0, &case.law)?;
        let m0 = VectorField::interpolate(v_space.clone(), |x| case.exact_m(x, 0.0));
        let u0 = recover_velocity(&m0, &rho0)?;
        let p0 = ScalarField::interpolate(p_space, |x| case.exact_p(x, 0.0));

        let mut params = init_parameters(&rho0, &eta0, opts.tau, opts.lambda_user, opts.variant)?;
        params.grad_div_implicit_coef = opts.grad_div_implicit_coef;
        params.explicit_viscous_form = opts.explicit_viscous_form;
        let state = FlowState::new(0.0, phi0, rho0, eta0, m0, u0, p0)?;

        let data = ProblemData {
            momentum_source: Some({
                let c = case.clone();
                Arc::new(move |x, t| source_momentum(&c, x, t)) as Arc<VectorFn>
            }),
            levelset_source: Some({
                let c = case.clone();
                Arc::new(move |x, t| source_levelset(&c, x, t)) as Arc<ScalarFn>
            }),
            momentum_bc: Some({
                let c = case.clone();
                Arc::new(move |x, t| c.exact_m(x, t)) as Arc<VectorFn>
            }),
            phi_bc_values: match opts.phi_bc {
                PhiBc::DirichletExact => Some({
                    let c = case.clone();
                    Arc::new(move |x, t| c.exact_phi(x, t)) as Arc<ScalarFn>
                }),
                PhiBc::Natural => None,
            },
        };
        Simulation::new(state, params, case.law.clone(), opts.levelset, opts.phi_bc, data)
    }

    pub fn state(&self) -> &FlowState {
        &self.state
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn law(&self) -> &MaterialLaw {
        &self.law
    }

    /// Number of completed steps.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn levelset_stepper(&self) -> &LevelSetStepper {
        &self.levelset
    }

    pub fn momentum_stepper(&self) -> &MomentumStepper {
        &self.momentum
    }

    pub fn pressure_updater(&self) -> &PressureUpdater {
        &self.pressure
    }

    /// Total factorizations across the level-set and momentum steppers.
    pub fn factorization_events(&self) -> usize {
        self.levelset.factorization_events() + self.momentum.factorization_events()
    }

    /// One time step; returns the state at `t + τ`.
    pub fn advance(&mut self) -> Result<&FlowState, SchemeError> {
        let step = self.step_index + 1;
        let t_new = self.state.t + self.params.tau;

        let phi_source_time = match self.params.variant {
            Variant::SemiImplicit => t_new,
            Variant::Explicit => self.state.t,
        };
        let phi_source_holder;
        let phi_source: Option<&dyn Fn([f64; 2]) -> f64> = match &self.data.levelset_source {
            Some(f) => {
                let f = f.clone();
                phi_source_holder = move |x| f(x, phi_source_time);
                Some(&phi_source_holder)
            }
            None => None,
        };
        let phi_bc_values: Option<Vec<f64>> = match (self.phi_bc, &self.data.phi_bc_values) {
            (PhiBc::DirichletExact, Some(f)) => {
                Some(ScalarField::interpolate(self.v_space.clone(), |x| f(x, t_new)).values)
            }
            _ => None,
        };
        let phi_new = match self.params.variant {
            Variant::SemiImplicit => self.levelset.step_levelset_semi_implicit(
                &self.state.phi,
                &self.state.u,
                phi_source,
                phi_bc_values.as_deref(),
            ),
            Variant::Explicit => self.levelset.step_levelset_explicit(
                &self.state.phi,
                &self.state.u,
                phi_source,
                phi_bc_values.as_deref(),
            ),
        }
        .map_err(SchemeError::from)
        .map_err(stage_err(step, "level-set"))?;

        let (rho_new, eta_new) = reconstruct_materials(&phi_new, &self.law)
            .map_err(SchemeError::from)
            .map_err(stage_err(step, "materials"))?;

        let mid = FlowState {
            t: self.state.t,
            phi: phi_new,
            rho: rho_new,
            eta: eta_new,
            m: self.state.m.clone(),
            u: self.state.u.clone(),
            p: self.state.p.clone(),
        };
        let m_source_holder;
        let m_source: Option<&dyn Fn([f64; 2]) -> [f64; 2]> = match &self.data.momentum_source {
            Some(f) => {
                let f = f.clone();
                m_source_holder = move |x| f(x, t_new);
                Some(&m_source_holder)
            }
            None => None,
        };
        let g = match &self.data.momentum_bc {
            Some(f) => VectorField::interpolate(self.v_space.clone(), |x| f(x, t_new)).values,
            None => vec![0.0; 2 * self.v_space.n_dofs()],
        };
        let m_new = match self.params.variant {
            Variant::SemiImplicit => self.momentum.step_momentum_semi_implicit(&mid, m_source, &g),
            Variant::Explicit => self.momentum.step_momentum_explicit(&mid, m_source, &g),
        }
        .map_err(stage_err(step, "momentum"))?;

        let u_new = recover_velocity(&m_new, &mid.rho).map_err(stage_err(step, "velocity"))?;

        let p_new = self
            .pressure
            .update_pressure(&self.state.p, &u_new, self.params.lambda_eff)
            .map_err(stage_err(step, "pressure"))?;

        self.state = FlowState::new(t_new, mid.phi, mid.rho, mid.eta, m_new, u_new, p_new)
            .map_err(stage_err(step, "commit"))?;
        self.step_index = step;
        Ok(&self.state)
    }
}

/// Discretization choices of a manufactured-solution run.
#[derive(Debug, Clone, Copy)]
pub struct CaseOptions {
    pub h: f64,
    pub tau: f64,
    pub lambda_user: f64,
    pub variant: Variant,
    pub grad_div_implicit_coef: GradDivCoef,
    pub explicit_viscous_form: ExplicitViscousForm,
    pub levelset: LevelSetParams,
    pub phi_bc: PhiBc,
}

impl CaseOptions {
    /// Semi-implicit defaults: `λ_user = 1`, grad-div at `λ̄`, the symmetric
    /// viscous pair, default level-set stabilization, Dirichlet level-set
    /// data.
    pub fn new(h: f64, tau: f64) -> Self {
        CaseOptions {
            h,
            tau,
            lambda_user: 1.0,
            variant: Variant::SemiImplicit,
            grad_div_implicit_coef: GradDivCoef::LambdaBar,
            explicit_viscous_form: ExplicitViscousForm::SymmetricPair,
            levelset: LevelSetParams::default(),
            phi_bc: PhiBc::DirichletExact,
        }
    }
}
