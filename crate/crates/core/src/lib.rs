//! Meshless method-of-lines solver for generalized fifth-order KdV equations.
//!
//! Space is discretised by global RBF collocation (multiquadric, inverse
//! multiquadric or Gaussian kernels) and the resulting ODE system is marched
//! with classical RK4. The crate also provides the exact Lax and
//! Sawada-Kotera solitons, error norms, conserved densities and
//! shape-parameter selection.

pub mod analysis;
pub mod cli;
pub mod discretization;
pub mod error;
pub mod gfkdv;
pub mod integrator;
pub mod kernels;
pub mod solutions;

pub use analysis::{ErrorReport, SweepOptions, SweepOutcome, SweepRow};
pub use discretization::{NodeSet, Operators};
pub use error::{AnalysisError, DiscretizationError, IntegrationError, KernelError, ProblemError};
pub use gfkdv::{BoundaryData, GfKdvCoefficients, GfKdvProblem};
pub use integrator::{integrate, rk4_step, Rk4, Trajectory};
pub use kernels::{KernelFamily, KernelSpec};
pub use solutions::{Preset, SolitonParams};
