//! Finite-element solver for incompressible flow with variable density and viscosity.
//!
//! The time discretization is an artificial-compressibility scheme built around the
//! momentum `m = ρu` as primary unknown: the implicit operators have constant
//! coefficients, so they are assembled and factored once per run, the pressure is
//! updated algebraically from `div u` (no Poisson solve), and the material fields are
//! transported by a level set with first-order artificial viscosity and an optional
//! interface-compression flux.
//!
//! Module map:
//! - [`mesh`]: triangular meshes of disks and rectangles, plus a plain-text file format;
//! - [`fem`]: P1/P2 Lagrange spaces, quadrature, form assembly, Dirichlet elimination,
//!   and sparse solvers with reusable factorizations;
//! - [`levelset`]: level-set transport steps and material reconstruction;
//! - [`scheme`]: the time-marching core (momentum solve, velocity recovery, pressure
//!   update) and its parameter bounds;
//! - [`mms`]: manufactured solutions with analytic sources and a finite-difference
//!   oracle that validates them;
//! - [`diagnostics`]: error norms, convergence rates, energy, and runtime monitors.

pub mod diagnostics;
pub mod fem;
pub mod levelset;
pub mod mesh;
pub mod mms;
pub mod scheme;
