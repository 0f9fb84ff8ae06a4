//! Classical Leonard pairs, their Heun pencils, and the elliptic dynamics
//! generated when a pencil is used as the Hamiltonian.
//!
//! The crate is organised bottom-up:
//!
//! * [`phase_space`]: canonical and su(2) Poisson structures, observables with
//!   analytic gradients.
//! * [`pencil`]: the structure polynomial `Phi`, the pencil `W`, and the
//!   elimination polynomials giving `xdot^2 = P4(x)`.
//! * [`elliptic`]: quartic invariants, Weierstrass `P`, closed-form solutions.
//! * [`models`]: Poeschl–Teller, Zhukovsky–Volterra gyrostat and relativistic
//!   A1 pencils.
//! * [`dynamics`]: adaptive Runge–Kutta integration of the flows.
//! * [`verification`]: residual checks that turn the above into pass/fail.
//! * [`config`] and [`runner`]: flat config files, CSV/JSON outputs.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod elliptic;
pub mod models;
pub mod pencil;
pub mod phase_space;
pub mod runner;
pub mod verification;

pub use dynamics::{integrate_flow, IntegratorConfig, Trajectory};
pub use elliptic::{
    classify_dynamics, quartic_invariants, weierstrass_p, DynamicsKind, EllipticInvariants,
};
pub use models::{build_a1, build_poeschl_teller, build_zv_gyrostat, ModelSpec};
pub use pencil::{
    assemble_quartic, pi_polynomials, BiQuadratic, Elimination, PencilCoefficients,
    QuarticPolynomial,
};
pub use phase_space::{Observable, PhaseKind, PhasePoint};
