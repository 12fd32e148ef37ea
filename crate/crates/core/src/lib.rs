//! Numerical laboratory for the fast p-Laplacian equation with gradient
//! absorption,
//!
//! ```text
//!     ∂ₜu − div(|∇u|^{p−2} ∇u) + |∇u|^q = 0   in (0,∞) × R^N,
//! ```
//!
//! with `1 < p < 2` (singular diffusion) and `q > 0`. The large-time behavior
//! of non-negative integrable solutions splits into sharply separated regimes
//! (positivity with diffusion-driven decay, fast algebraic decay, exponential
//! decay, finite-time extinction) controlled by the critical exponents
//! `p_c = 2N/(N+1)`, `q_* = p − N/(N+1)`, and `q = p/2`.
//!
//! This crate provides the computational pieces needed to explore and test
//! that structure at desk scale:
//!
//! * [`exponents`] — critical exponents and regime classification for any
//!   admissible `(p, q, N)`;
//! * [`grid`] — 1-D line and radial grids with conservative discretizations
//!   of the regularized operators `div(a_ε(|∇u|²)∇u)` and `b_ε(|∇u|²)`;
//! * [`solver`] — time integration of the regularized Cauchy problem with a
//!   lifted initial datum `u₀ + ε^γ` and a per-step observable ledger;
//! * [`functionals`] — norms, mass/absorption bookkeeping, decay-rate and
//!   extinction fitting, and gradient-estimate certification;
//! * [`verify`] — run-free verification of the Bernstein reaction algebra,
//!   the subcritical implicit change of variable, and all explicit
//!   super-solutions used in the comparison arguments.
//!
//! The crate is `no_std` (with `alloc`); all floating-point math goes through
//! [`libm`]. IO, configuration, and the CLI live in the companion crate.

#![no_std]
// Validation guards use the `!(x > a && x < b)` form on purpose: it rejects
// NaN, which the de-negated comparison would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod exponents;
pub mod functionals;
pub mod grid;
pub mod solver;
pub mod verify;

mod num;

pub use exponents::{classify, critical_exponents, Params};
pub use grid::{Field, Grid, RegEps};
pub use solver::{InitialDatum, SolverConfig, Trajectory};
