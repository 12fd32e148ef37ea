//! Run-free verification of the analytic building blocks behind the decay
//! and extinction theory: the Bernstein reaction algebra for each change of
//! variable, the subcritical implicit change of variable defined through a
//! singular integral, and the explicit super-solutions (time-only barriers
//! and stationary radial power barriers) consumed by the comparison
//! arguments.
//!
//! Everything here is independent of any PDE run: closed-form algebra is
//! checked against a finite-difference oracle, implicit constructions
//! against their defining ODEs, and barriers against their reduced
//! differential inequalities on wide time grids.

mod barriers;
mod bernstein;
mod quad;

pub use barriers::{
    check_harmonic_barrier_pc, check_stationary_supersolution, check_time_supersolution,
    radial_power_excess, TimeBarrier,
};
pub use bernstein::{Bernstein, BernsteinChoice, DerivativeMode, IdentityReport, SubcriticalRho};

use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;
use thiserror::Error;

use crate::exponents::ExponentsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("choice not valid for these parameters: {0}")]
    InvalidChoice(String),
    #[error("quadrature failed: {0}")]
    Quadrature(&'static str),
    #[error("root finding failed: {0}")]
    RootFind(&'static str),
    #[error(transparent)]
    Exponents(#[from] ExponentsError),
    #[error("sample value {0} outside the valid interval")]
    OutOfDomain(f64),
}

/// Outcome of a single verification: a principal measured quantity compared
/// against a threshold, plus named auxiliary values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub details: Vec<(String, f64)>,
}
