//! Manufactured solutions: exact fields with analytic derivatives, synthesized
//! source terms for the momentum and level-set equations, and a finite-difference
//! oracle that cross-checks every analytic source against derivative-free
//! stencils on the exact closures.
//!
//! The momentum source evaluates the strong non-conservative residual
//! `f = ρ∂ₜu + ρ(u·∇)u − 2∇·(η ε(u)) + ∇p` with
//! `∇·(2η ε(u))ᵢ = 2(∂ₓη εᵢ₁ + ∂ᵧη εᵢ₂) + η(Δuᵢ + ∂ᵢ div u)`;
//! the level-set source is the transport residual `f_φ = ∂ₜφ + u·∇φ`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::levelset::{EtaLaw, MaterialLaw};
use crate::mesh::Shape;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Smooth,
    Discontinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CaseKind {
    /// Unit-disk swirl: `u = (3/4 + (sin t)/4)·w` with
    /// `w = (−sin²x sin 2y, sin 2x sin²y)/2` (divergence-free),
    /// `p = sin x sin y sin t`, `φ = 1/2 + (x cos a + y sin a)/2`, `a = sin(t/2)`.
    DiskSwirl,
    /// Uniform upward flow on `[0,1]×[−1,1]`: `u = (0, 1/2)`,
    /// `p = x²y³ cos t`, and the indicator `φ = 1{y < t/2 − 1/2}` riding with
    /// the flow (interface speed equals `u_y`, so `f_φ = 0`); on the interface
    /// itself `φ` and its derivatives take the upper-side value (0).
    Slab,
    /// Everything at rest: `u = 0`, `p = 0`, `φ = 1/2`.
    Quiescent,
}

/// An exact solution with analytic derivatives and material laws attached.
///
/// Constructed through [`builtin_cases`] / [`case_by_name`] only, so every case
/// is oracle-checked by the test suite.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    kind: CaseKind,
    pub name: &'static str,
    pub shape: Shape,
    pub law: MaterialLaw,
    pub smoothness: Smoothness,
}

/// Velocity-profile pieces of the disk case at one point.
struct SwirlProfile {
    w: [f64; 2],
    jac: [[f64; 2]; 2],
    laplace: [f64; 2],
}

fn swirl_profile([x, y]: [f64; 2]) -> SwirlProfile {
    let (s2x, c2x) = (2.0 * x).sin_cos();
    let (s2y, c2y) = (2.0 * y).sin_cos();
    let sx2 = x.sin() * x.sin();
    let sy2 = y.sin() * y.sin();
    SwirlProfile {
        w: [-0.5 * sx2 * s2y, 0.5 * s2x * sy2],
        jac: [
            [-0.5 * s2x * s2y, -sx2 * c2y],
            [c2x * sy2, 0.5 * s2x * s2y],
        ],
        laplace: [
            -c2x * s2y + 2.0 * sx2 * s2y,
            -2.0 * s2x * sy2 + s2x * c2y,
        ],
    }
}

/// `g(t) = 3/4 + (1/4) sin t` and its derivative.
fn swirl_amplitude(t: f64) -> (f64, f64) {
    let (s, c) = t.sin_cos();
    (0.75 + 0.25 * s, 0.25 * c)
}

/// Interface angle of the disk level set and its derivative: `a = sin(t/2)`.
fn disk_phi_angle(t: f64) -> (f64, f64) {
    ((0.5 * t).sin(), 0.5 * (0.5 * t).cos())
}

impl ManufacturedCase {
    /// Interface height of the slab case at time `t`.
    pub fn slab_interface(t: f64) -> f64 {
        0.5 * t - 0.5
    }

    pub fn exact_u(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        match self.kind {
            CaseKind::DiskSwirl => {
                let (g, _) = swirl_amplitude(t);
                let w = swirl_profile(x).w;
                [g * w[0], g * w[1]]
            }
            CaseKind::Slab => [0.0, 0.5],
            CaseKind::Quiescent => [0.0, 0.0],
        }
    }

    pub fn exact_u_t(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        match self.kind {
            CaseKind::DiskSwirl => {
                let (_, gp) = swirl_amplitude(t);
                let w = swirl_profile(x).w;
                [gp * w[0], gp * w[1]]
            }
            _ => [0.0, 0.0],
        }
    }

    /// Jacobian `jac[a][b] = ∂_b u_a`.
    pub fn exact_u_grad(&self, x: [f64; 2], t: f64) -> [[f64; 2]; 2] {
        match self.kind {
            CaseKind::DiskSwirl => {
                let (g, _) = swirl_amplitude(t);
                let jac = swirl_profile(x).jac;
                [
                    [g * jac[0][0], g * jac[0][1]],
                    [g * jac[1][0], g * jac[1][1]],
                ]
            }
            _ => [[0.0; 2]; 2],
        }
    }

    pub fn exact_u_laplace(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        match self.kind {
            CaseKind::DiskSwirl => {
                let (g, _) = swirl_amplitude(t);
                let lap = swirl_profile(x).laplace;
                [g * lap[0], g * lap[1]]
            }
            _ => [0.0, 0.0],
        }
    }

    /// `∇(div u)` — identically zero: every built-in velocity is divergence-free.
    pub fn exact_grad_div_u(&self, _x: [f64; 2], _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }

    pub fn exact_p(&self, [x, y]: [f64; 2], t: f64) -> f64 {
        match self.kind {
            CaseKind::DiskSwirl => x.sin() * y.sin() * t.sin(),
            CaseKind::Slab => x * x * y * y * y * t.cos(),
            CaseKind::Quiescent => 0.0,
        }
    }

    pub fn exact_p_grad(&self, [x, y]: [f64; 2], t: f64) -> [f64; 2] {
        match self.kind {
            CaseKind::DiskSwirl => {
                let st = t.sin();
                [x.cos() * y.sin() * st, x.sin() * y.cos() * st]
            }
            CaseKind::Slab => {
                let ct = t.cos();
                [2.0 * x * y * y * y * ct, 3.0 * x * x * y * y * ct]
            }
            CaseKind::Quiescent => [0.0, 0.0],
        }
    }

    pub fn exact_phi(&self, [x, y]: [f64; 2], t: f64) -> f64 {
        match self.kind {
            CaseKind::DiskSwirl => {
                let (a, _) = disk_phi_angle(t);
                0.5 + 0.5 * (x * a.cos() + y * a.sin())
            }
            CaseKind::Slab => {
                if y < Self::slab_interface(t) {
                    1.0
                } else {
                    0.0
                }
            }
            CaseKind::Quiescent => 0.5,
        }
    }

    pub fn exact_phi_t(&self, [x, y]: [f64; 2], t: f64) -> f64 {
        match self.kind {
            CaseKind::DiskSwirl => {
                let (a, ap) = disk_phi_angle(t);
                0.5 * (-x * a.sin() + y * a.cos()) * ap
            }
            _ => 0.0,
        }
    }

    pub fn exact_phi_grad(&self, _x: [f64; 2], t: f64) -> [f64; 2] {
        match self.kind {
            CaseKind::DiskSwirl => {
                let (a, _) = disk_phi_angle(t);
                [0.5 * a.cos(), 0.5 * a.sin()]
            }
            _ => [0.0, 0.0],
        }
    }

    pub fn exact_rho(&self, x: [f64; 2], t: f64) -> f64 {
        self.law.density(self.exact_phi(x, t))
    }

    pub fn exact_eta(&self, x: [f64; 2], t: f64) -> f64 {
        self.law
            .viscosity(self.exact_rho(x, t))
            .expect("built-in cases keep the density positive")
    }

    /// `∇η = η'(ρ)·(ρ_max − ρ_min)·∇φ`
    pub fn exact_eta_grad(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let span = self.law.rho_max - self.law.rho_min;
        let eta_prime = match &self.law.eta {
            EtaLaw::Linear { eta1, eta2 } => {
                if span == 0.0 {
                    0.0
                } else {
                    (eta2 - eta1) / span
                }
            }
            EtaLaw::Reciprocal => {
                let rho = self.exact_rho(x, t);
                -1.0 / (rho * rho)
            }
            EtaLaw::User { .. } => unreachable!("built-in cases use closed-form laws"),
        };
        let gphi = self.exact_phi_grad(x, t);
        [eta_prime * span * gphi[0], eta_prime * span * gphi[1]]
    }

    /// Momentum `m = ρu`.
    pub fn exact_m(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let rho = self.exact_rho(x, t);
        let u = self.exact_u(x, t);
        [rho * u[0], rho * u[1]]
    }
}

/// Momentum source of a case's exact fields: the residual of the conservative
/// momentum balance `∂ₜm + ∇·(m⊗u) − 2∇·(ηε(u)) + ∇p = f`. With the
/// divergence-free exact velocities this expands to
/// `ρ∂ₜu + ρ(u·∇)u + (∂ₜρ + u·∇ρ)u − 2∇·(ηε(u)) + ∇p`, where
/// `∂ₜρ + u·∇ρ = (ρ_max − ρ_min)·f_φ`.
pub fn source_momentum(case: &ManufacturedCase, x: [f64; 2], t: f64) -> [f64; 2] {
    let rho = case.exact_rho(x, t);
    let eta = case.exact_eta(x, t);
    let u = case.exact_u(x, t);
    let ut = case.exact_u_t(x, t);
    let jac = case.exact_u_grad(x, t);
    let lap = case.exact_u_laplace(x, t);
    let gdiv = case.exact_grad_div_u(x, t);
    let geta = case.exact_eta_grad(x, t);
    let gp = case.exact_p_grad(x, t);
    let rho_residual = (case.law.rho_max - case.law.rho_min) * source_levelset(case, x, t);
    let e11 = jac[0][0];
    let e22 = jac[1][1];
    let e12 = 0.5 * (jac[0][1] + jac[1][0]);
    let conv = [
        u[0] * jac[0][0] + u[1] * jac[0][1],
        u[0] * jac[1][0] + u[1] * jac[1][1],
    ];
    [
        rho * (ut[0] + conv[0]) + rho_residual * u[0]
            - 2.0 * (geta[0] * e11 + geta[1] * e12)
            - eta * (lap[0] + gdiv[0])
            + gp[0],
        rho * (ut[1] + conv[1]) + rho_residual * u[1]
            - 2.0 * (geta[0] * e12 + geta[1] * e22)
            - eta * (lap[1] + gdiv[1])
            + gp[1],
    ]
}

/// Transport residual `f_φ = ∂ₜφ + u·∇φ` of a case's exact fields.
pub fn source_levelset(case: &ManufacturedCase, x: [f64; 2], t: f64) -> f64 {
    let u = case.exact_u(x, t);
    let gphi = case.exact_phi_grad(x, t);
    case.exact_phi_t(x, t) + u[0] * gphi[0] + u[1] * gphi[1]
}

/// The cases reproduced by the convergence studies plus a quiescent sanity case.
pub fn builtin_cases() -> Vec<ManufacturedCase> {
    let disk = Shape::Disk { radius: 1.0 };
    let heavy = |eta| MaterialLaw::new(1.0, 100.0, eta).expect("valid bounds");
    vec![
        ManufacturedCase {
            kind: CaseKind::DiskSwirl,
            name: "disk_linear_eta_10",
            shape: disk,
            law: heavy(EtaLaw::Linear {
                eta1: 1.0,
                eta2: 10.0,
            }),
            smoothness: Smoothness::Smooth,
        },
        ManufacturedCase {
            kind: CaseKind::DiskSwirl,
            name: "disk_linear_eta_inv100",
            shape: disk,
            law: heavy(EtaLaw::Linear {
                eta1: 0.01,
                eta2: 1.0,
            }),
            smoothness: Smoothness::Smooth,
        },
        ManufacturedCase {
            kind: CaseKind::DiskSwirl,
            name: "disk_reciprocal_eta",
            shape: disk,
            law: heavy(EtaLaw::Reciprocal),
            smoothness: Smoothness::Smooth,
        },
        ManufacturedCase {
            kind: CaseKind::Slab,
            name: "slab_discontinuous_2d",
            shape: Shape::Rectangle {
                x: [0.0, 1.0],
                y: [-1.0, 1.0],
            },
            law: MaterialLaw::new(
                1.0,
                2.0,
                EtaLaw::Linear {
                    eta1: 1.0,
                    eta2: 1.0,
                },
            )
            .expect("valid bounds"),
            smoothness: Smoothness::Discontinuous,
        },
        ManufacturedCase {
            kind: CaseKind::Quiescent,
            name: "quiescent",
            shape: disk,
            law: MaterialLaw::new(
                1.0,
                2.0,
                EtaLaw::Linear {
                    eta1: 1.0,
                    eta2: 1.0,
                },
            )
            .expect("valid bounds"),
            smoothness: Smoothness::Smooth,
        },
    ]
}

pub fn case_by_name(name: &str) -> Option<ManufacturedCase> {
    builtin_cases().into_iter().find(|c| c.name == name)
}

/// Worst relative deviations between analytic and finite-difference sources.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub case_name: &'static str,
    pub n_points: usize,
    pub max_dev_momentum: f64,
    pub max_dev_levelset: f64,
    pub worst_point_momentum: ([f64; 2], f64),
    pub worst_point_levelset: ([f64; 2], f64),
}

impl OracleReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_dev_momentum <= tol && self.max_dev_levelset <= tol
    }
}

const FD_STEP_FIRST: f64 = 1e-6;
const FD_STEP_SECOND: f64 = 1e-4;

fn d1(f: impl Fn(f64) -> f64, v: f64) -> f64 {
    (f(v + FD_STEP_FIRST) - f(v - FD_STEP_FIRST)) / (2.0 * FD_STEP_FIRST)
}

fn d2(f: impl Fn(f64) -> f64, v: f64) -> f64 {
    let h = FD_STEP_SECOND;
    (f(v + h) - 2.0 * f(v) + f(v - h)) / (h * h)
}

fn d_mixed(f: impl Fn([f64; 2]) -> f64, [x, y]: [f64; 2]) -> f64 {
    let h = FD_STEP_SECOND;
    (f([x + h, y + h]) - f([x + h, y - h]) - f([x - h, y + h]) + f([x - h, y - h])) / (4.0 * h * h)
}

/// Stencil evaluation of `∂ₜm + ∇·(m⊗u) − 2∇·(ηε(u)) + ∇p` straight from the
/// exact closures, with `m = ρu` differentiated as a product.
fn fd_source_momentum(case: &ManufacturedCase, x: [f64; 2], t: f64) -> [f64; 2] {
    let eta_at = |pt: [f64; 2]| {
        case.law
            .viscosity(case.law.density(case.exact_phi(pt, t)))
            .expect("positive density")
    };
    let eta = eta_at(x);
    let u_comp = |pt: [f64; 2], c: usize| case.exact_u(pt, t)[c];
    let m_comp = |pt: [f64; 2], s: f64, c: usize| {
        case.law.density(case.exact_phi(pt, s)) * case.exact_u(pt, s)[c]
    };

    // jac[a][b] = ∂_b u_a
    let mut jac = [[0.0; 2]; 2];
    let mut uxx = [0.0; 2];
    let mut uyy = [0.0; 2];
    let mut uxy = [0.0; 2];
    let mut mt = [0.0; 2];
    let mut mflux = [0.0; 2];
    for c in 0..2 {
        jac[c][0] = d1(|s| u_comp([s, x[1]], c), x[0]);
        jac[c][1] = d1(|s| u_comp([x[0], s], c), x[1]);
        uxx[c] = d2(|s| u_comp([s, x[1]], c), x[0]);
        uyy[c] = d2(|s| u_comp([x[0], s], c), x[1]);
        uxy[c] = d_mixed(|pt| u_comp(pt, c), x);
        mt[c] = d1(|s| m_comp(x, s, c), t);
        // ∇·(m⊗u) component c: ∂x(m_c u_x) + ∂y(m_c u_y)
        mflux[c] = d1(|s| m_comp([s, x[1]], t, c) * u_comp([s, x[1]], 0), x[0])
            + d1(|s| m_comp([x[0], s], t, c) * u_comp([x[0], s], 1), x[1]);
    }
    let lap = [uxx[0] + uyy[0], uxx[1] + uyy[1]];
    let gdiv = [uxx[0] + uxy[1], uxy[0] + uyy[1]];
    let geta = [
        d1(|s| eta_at([s, x[1]]), x[0]),
        d1(|s| eta_at([x[0], s]), x[1]),
    ];
    let gp = [
        d1(|s| case.exact_p([s, x[1]], t), x[0]),
        d1(|s| case.exact_p([x[0], s], t), x[1]),
    ];
    let e11 = jac[0][0];
    let e22 = jac[1][1];
    let e12 = 0.5 * (jac[0][1] + jac[1][0]);
    [
        mt[0] + mflux[0] - 2.0 * (geta[0] * e11 + geta[1] * e12) - eta * (lap[0] + gdiv[0])
            + gp[0],
        mt[1] + mflux[1] - 2.0 * (geta[0] * e12 + geta[1] * e22) - eta * (lap[1] + gdiv[1])
            + gp[1],
    ]
}

fn fd_source_levelset(case: &ManufacturedCase, x: [f64; 2], t: f64) -> f64 {
    let u = case.exact_u(x, t);
    let phi_t = d1(|s| case.exact_phi(x, s), t);
    let gphi = [
        d1(|s| case.exact_phi([s, x[1]], t), x[0]),
        d1(|s| case.exact_phi([x[0], s], t), x[1]),
    ];
    phi_t + u[0] * gphi[0] + u[1] * gphi[1]
}

/// Draws one admissible sample point for the oracle. Discontinuous cases keep a
/// band around the interface clear so the stencils never straddle the jump.
fn sample_point(case: &ManufacturedCase, rng: &mut ChaCha8Rng) -> ([f64; 2], f64) {
    let t = rng.random_range(0.0..1.0);
    loop {
        let point = match case.shape {
            Shape::Disk { radius } => {
                let r = 0.995 * radius * rng.random_range(0.0f64..1.0).sqrt();
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                [r * theta.cos(), r * theta.sin()]
            }
            Shape::Rectangle { x, y } => [
                rng.random_range(x[0]..x[1]),
                rng.random_range(y[0]..y[1]),
            ],
        };
        let clear_of_interface = match case.smoothness {
            Smoothness::Smooth => true,
            Smoothness::Discontinuous => {
                (point[1] - ManufacturedCase::slab_interface(t)).abs() > 0.05
            }
        };
        if clear_of_interface {
            return (point, t);
        }
    }
}

/// Compares analytic sources against the finite-difference stencils at seeded
/// sample points; deviations are relative to `max(‖f‖_∞, 1)` per point.
pub fn validate_case(case: &ManufacturedCase, n_points: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport {
        case_name: case.name,
        n_points,
        max_dev_momentum: 0.0,
        max_dev_levelset: 0.0,
        worst_point_momentum: ([0.0; 2], 0.0),
        worst_point_levelset: ([0.0; 2], 0.0),
    };
    for _ in 0..n_points {
        let (x, t) = sample_point(case, &mut rng);
        let fa = source_momentum(case, x, t);
        let ff = fd_source_momentum(case, x, t);
        let scale = fa[0].abs().max(fa[1].abs()).max(1.0);
        let dev = ((fa[0] - ff[0]).abs()).max((fa[1] - ff[1]).abs()) / scale;
        if dev > report.max_dev_momentum {
            report.max_dev_momentum = dev;
            report.worst_point_momentum = (x, t);
        }
        let sa = source_levelset(case, x, t);
        let sf = fd_source_levelset(case, x, t);
        let sdev = (sa - sf).abs() / sa.abs().max(1.0);
        if sdev > report.max_dev_levelset {
            report.max_dev_levelset = sdev;
            report.worst_point_levelset = (x, t);
        }
    }
    report
}
