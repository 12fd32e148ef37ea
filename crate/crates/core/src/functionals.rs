//! Measurements on fields and trajectories: volume-weighted norms, the
//! mass/absorption balance, decay-rate and extinction-time fitting, and
//! certification of the pointwise gradient estimates.
//!
//! All fits are plain least squares in the appropriate coordinates
//! (`log t`–`log y` for power laws, `t`–`log y` for exponentials) with `r²`
//! reported. Rate checks are asymptotic statements, so the default fit
//! window is the last decade of simulated time, `[t_end/10, t_end]`.
//!
//! Gradient estimates of the form `|∇ u^m| ≤ RHS(t, u)` are checked on the
//! δ-shifted solution: the chain rule is applied analytically
//! (`|∇(u+δ)^m| = |m| (u+δ)^{m−1} |∇u|`), so the discrete left-hand side
//! only ever sees `u + δ ≥ δ`. With `δ` equal to the solver floor `ε^γ`, the
//! shifted check on the whole domain is exactly the strong form of the
//! estimate, from which the positivity-set form follows as `δ → 0`.
//! Estimates whose constant is explicit are pass/fail against a ratio
//! threshold; the others report the empirical sup constant.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{critical_exponents, Params, THRESHOLD_TOL};
use crate::grid::{gradient_magnitude, Field};
// When std is in the crate graph (tests, or std-enabled dependents via
// feature unification) its inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use crate::num::{linear_fit, Real};
use crate::solver::Trajectory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionalError {
    #[error("window [{0}, {1}] contains fewer than {2} usable points")]
    TooFewPoints(f64, f64, usize),
    #[error("non-positive value {value} at t={t}: series not fittable (extinction reached?)")]
    NonPositiveValue { t: f64, value: f64 },
    #[error("trajectory ledger does not reach t={0}")]
    LedgerIncomplete(f64),
    #[error("absorption is disabled for this run")]
    AbsorptionDisabled,
    #[error("estimate not applicable: {0}")]
    Inapplicable(String),
    #[error("field has no mass (zero or negative L1)")]
    ZeroField,
    #[error("field has zero max slope; ratio undefined")]
    ZeroGradient,
    #[error("no extinction detected on this trajectory")]
    NoExtinction,
}

/// Volume-weighted discrete L¹ norm (trapezoid weights on a line, exact
/// shell volumes with the full `ω_N` measure on a radial grid).
pub fn l1_norm(field: &Field) -> f64 {
    let grid = field.grid();
    field
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| grid.cell_volume(i) * v)
        .sum()
}

/// Max node value.
pub fn l_inf_norm(field: &Field) -> f64 {
    field.max_value()
}

/// `∫ |∇u|^q dx` with the centered-difference gradient — the absorption
/// integrand measured independently of the scheme's regularized `b_ε`.
pub fn absorption_integral(field: &Field, q: f64) -> f64 {
    let grid = field.grid();
    let g = gradient_magnitude(field);
    g.values()
        .iter()
        .enumerate()
        .map(|(i, &gi)| grid.cell_volume(i) * gi.powf(q))
        .sum()
}

/// Dimensionless diagnostic `‖w‖_∞ / (‖∇w‖_∞^{N/(N+1)} ‖w‖₁^{1/(N+1)})`;
/// bounded over a family of fields exactly when the sup-interpolation
/// inequality holds with a uniform constant. Invariant under `w → λw`.
pub fn gn_ratio(field: &Field) -> Result<f64, FunctionalError> {
    let l1 = l1_norm(field);
    if !(l1 > 0.0) {
        return Err(FunctionalError::ZeroField);
    }
    let g_max = gradient_magnitude(field).max_value();
    if !(g_max > 0.0) {
        return Err(FunctionalError::ZeroGradient);
    }
    let nf = field.grid().dim() as f64;
    Ok(l_inf_norm(field) / (g_max.powf(nf / (nf + 1.0)) * l1.powf(1.0 / (nf + 1.0))))
}

/// Normalized residual of the mass balance
/// `‖u(t)‖₁ + ∫₀ᵗ∫|∇u|^q dx ds = ‖u₀‖₁` at ledger time `t` (boundary
/// outflow, identically zero under the Neumann condition, is subtracted).
pub fn mass_balance_residual(traj: &Trajectory, t: f64) -> Result<f64, FunctionalError> {
    if !traj.config().absorption_enabled {
        return Err(FunctionalError::AbsorptionDisabled);
    }
    let ledger = traj.ledger();
    if ledger.is_empty() || ledger.last().unwrap().t < t - 1e-12 * t.max(1.0) {
        return Err(FunctionalError::LedgerIncomplete(t));
    }
    let idx = ledger
        .iter()
        .rposition(|r| r.t <= t + 1e-12 * t.max(1.0))
        .ok_or(FunctionalError::LedgerIncomplete(t))?;
    let absorbed: f64 = ledger[..=idx].iter().map(|r| r.absorption_increment).sum();
    let boundary: f64 = ledger[..=idx].iter().map(|r| r.boundary_flux).sum();
    let m0 = traj.l1_excess(&ledger[0]);
    if !(m0 > 0.0) {
        return Err(FunctionalError::ZeroField);
    }
    let mt = traj.l1_excess(&ledger[idx]);
    Ok((mt + absorbed - m0 - boundary).abs() / m0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    PowerLaw,
    Exponential,
}

/// Result of a decay fit over a time window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub kind: FitKind,
    /// Power-law exponent (signed; `−2` for `t^{−2}`) or exponential decay
    /// rate (positive; `0.7` for `e^{−0.7 t}`).
    pub exponent_or_rate: f64,
    /// Intercept in fit coordinates (`log` of the prefactor).
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

const MIN_FIT_POINTS: usize = 8;

/// Default asymptotic-rate window: the last decade of simulated time.
pub fn default_fit_window(t_end: f64) -> (f64, f64) {
    (t_end / 10.0, t_end)
}

fn window_points(
    series: &[(f64, f64)],
    window: (f64, f64),
    log_t: bool,
) -> Result<(Vec<f64>, Vec<f64>), FunctionalError> {
    let (a, b) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, y) in series {
        if t < a || t > b || (log_t && t <= 0.0) {
            continue;
        }
        if !(y > 0.0) {
            return Err(FunctionalError::NonPositiveValue { t, value: y });
        }
        xs.push(if log_t { t.ln() } else { t });
        ys.push(y.ln());
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(FunctionalError::TooFewPoints(a, b, MIN_FIT_POINTS));
    }
    Ok((xs, ys))
}

/// Fit `y ≈ A t^σ` on `window` and return `σ` (with `r²`).
pub fn fit_power_decay(
    series: &[(f64, f64)],
    window: (f64, f64),
) -> Result<FitResult, FunctionalError> {
    let (xs, ys) = window_points(series, window, true)?;
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(FitResult {
        kind: FitKind::PowerLaw,
        exponent_or_rate: slope,
        intercept,
        r_squared: r2,
        window,
    })
}

/// Fit `y ≈ A e^{−λ t}` on `window` and return `λ > 0` for decay.
pub fn fit_exponential_decay(
    series: &[(f64, f64)],
    window: (f64, f64),
) -> Result<FitResult, FunctionalError> {
    let (xs, ys) = window_points(series, window, false)?;
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(FitResult {
        kind: FitKind::Exponential,
        exponent_or_rate: -slope,
        intercept,
        r_squared: r2,
        window,
    })
}

/// How far the series dips below its fitted exponential envelope, as a
/// fraction of the total log-range on the window: small values certify that
/// `log y` is bounded below by a straight line (an exponential lower bound).
pub fn lower_envelope_residual(
    series: &[(f64, f64)],
    window: (f64, f64),
) -> Result<f64, FunctionalError> {
    let (xs, ys) = window_points(series, window, false)?;
    let (slope, intercept, _) = linear_fit(&xs, &ys);
    let range = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| slope * x + intercept - y)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(if range > 0.0 { worst / range } else { 0.0 })
}

/// A detected extinction time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtinctionTime {
    pub t_e: f64,
    /// One observer stride of step time, the reporting resolution.
    pub uncertainty: f64,
    /// Threshold on the max excess used for the detection.
    pub tol: f64,
}

/// First ledger time at which the max excess above the floor drops below
/// `ext_tol` and stays below for the rest of the run; `None` if that never
/// happens (including runs that end while still above the threshold).
pub fn detect_extinction(traj: &Trajectory, ext_tol: f64) -> Option<ExtinctionTime> {
    let ledger = traj.ledger();
    if ledger.is_empty() {
        return None;
    }
    let last_above = ledger.iter().rposition(|r| traj.linf_excess(r) >= ext_tol);
    let idx = match last_above {
        None => 0,                                       // below threshold from the start
        Some(i) if i + 1 >= ledger.len() => return None, // still above at the end
        Some(i) => i + 1,
    };
    let t_e = ledger[idx].t;
    let dt = if idx > 0 {
        ledger[idx].t - ledger[idx - 1].t
    } else if ledger.len() > 1 {
        ledger[1].t - ledger[0].t
    } else {
        0.0
    };
    Some(ExtinctionTime {
        t_e,
        uncertainty: dt * traj.config().observer_stride as f64,
        tol: ext_tol,
    })
}

/// Shape of the approach to extinction, against the lower-bound exponents
/// `a = (N+1)(q_*−q)/(p−2q)` for L¹ and `b = (p−q)/(p−2q)` for L∞:
/// `‖u(t)‖ ≥ C (T_e − t)^{a,b}` near `T_e`, so the *fitted* exponents must
/// not exceed the bounds (up to slack) and the ratio `‖u‖/(T_e−t)^b` must
/// stay positive and stable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtinctionShape {
    pub fit_l1: FitResult,
    pub fit_linf: FitResult,
    pub bound_l1_exponent: f64,
    pub bound_linf_exponent: f64,
    /// `inf` over the fit window of `‖u(t)‖_∞ / (T_e−t)^b`.
    pub min_ratio_linf: f64,
    /// max/min of that ratio over the window (stability of the constant).
    pub ratio_spread_linf: f64,
}

/// Fit `‖u(t)‖₁ ~ (T_e−t)^a` and `‖u(t)‖_∞ ~ (T_e−t)^b` near the detected
/// extinction time. Requires `p ∈ (p_c, 2)` and `q ∈ (q_1, p/2)`.
pub fn extinction_exponent_check(
    traj: &Trajectory,
    te: &ExtinctionTime,
    params: &Params,
) -> Result<ExtinctionShape, FunctionalError> {
    let exps = critical_exponents(params);
    let (p, q, n) = (params.p(), params.q(), params.nf());
    if !(p - exps.p_c > THRESHOLD_TOL) {
        return Err(FunctionalError::Inapplicable(format!(
            "extinction rate bounds need p > p_c, got p={p}"
        )));
    }
    if !(q > exps.q_1 + THRESHOLD_TOL && q < p / 2.0 - THRESHOLD_TOL) {
        return Err(FunctionalError::Inapplicable(format!(
            "extinction rate bounds need q in (q_1, p/2) = ({}, {})",
            exps.q_1,
            p / 2.0
        )));
    }
    let bound_l1 = (n + 1.0) * (exps.q_star - q) / (p - 2.0 * q);
    let bound_linf = (p - q) / (p - 2.0 * q);

    // Points approaching T_e but safely above the detection threshold.
    let floor_cut = 50.0 * te.tol;
    let mut series_linf = Vec::new();
    let mut series_l1 = Vec::new();
    for r in traj.ledger() {
        let gap = te.t_e - r.t;
        if gap <= 0.0 || gap > 0.5 * te.t_e {
            continue;
        }
        let lx = traj.linf_excess(r);
        if lx < floor_cut {
            continue;
        }
        series_linf.push((gap, lx));
        series_l1.push((gap, traj.l1_excess(r)));
    }
    if series_linf.len() < MIN_FIT_POINTS {
        return Err(FunctionalError::TooFewPoints(0.0, te.t_e, MIN_FIT_POINTS));
    }
    let gap_min = series_linf
        .iter()
        .map(|&(g, _)| g)
        .fold(f64::INFINITY, f64::min);
    let gap_max = series_linf
        .iter()
        .map(|&(g, _)| g)
        .fold(f64::NEG_INFINITY, f64::max);
    let window = (gap_min, gap_max);
    let fit_linf = fit_power_decay(&series_linf, window)?;
    let fit_l1 = fit_power_decay(&series_l1, window)?;

    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for &(gap, lx) in &series_linf {
        let ratio = lx / gap.powf(bound_linf);
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }

    Ok(ExtinctionShape {
        fit_l1,
        fit_linf,
        bound_l1_exponent: bound_l1,
        bound_linf_exponent: bound_linf,
        min_ratio_linf: min_ratio,
        ratio_spread_linf: max_ratio / min_ratio,
    })
}

/// The catalog of pointwise gradient estimates that can be certified on a
/// trajectory. Names follow the quantity being bounded; the `Diffusion*`
/// variants are the absorption-free statements for `∂ₜΦ = Δ_p Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateId {
    /// `p > p_c`, `q ≥ 1`: `|∇u^{−(2−p)/p}| ≤ ((2−p)/p)^{(p−1)/p} η^{1/p} t^{−1/p}`
    /// with the sharp explicit constant.
    NegPowerSharp,
    /// `p > p_c`, `q ∈ [p/2, 1)`: same quantity bounded by
    /// `C(‖u₀‖_∞^{(2q−p)/p(p−q)} + t^{−1/p})`.
    NegPowerBounded,
    /// `p ≥ p_c`, `q ∈ (p−1, p/2)`: `|∇u^{−(q−p+1)/(p−q)}| ≤ C(1 + ‖u₀‖_∞^{(p−2q)/p(p−q)} t^{−1/p})`.
    MidNegPower,
    /// `p ≥ p_c`, `q = p−1`: `|∇ log u| ≤ C(1 + ‖u₀‖_∞^{(2−p)/p} t^{−1/p})`.
    LogSlope,
    /// `p ≥ p_c`, `q ∈ (0, p−1)`: `|∇u^{(p−q−1)/(p−q)}| ≤ C(1 + ‖u₀‖_∞^{(p−2q)/p(p−q)} t^{−1/p})`.
    PosPower,
    /// `p = p_c`, `N ≥ 2`, `q ≥ 1`: `|∇u^{−1/N}| ≤ C log(e‖u₀‖_∞/u)^{1/p_c} t^{−1/p_c}`.
    CriticalLogSharp,
    /// `p = p_c`, `q ∈ (N/(N+1), 1)`: log-corrected bounded form.
    CriticalLogBounded,
    /// `p = p_c`, `q = N/(N+1)`: log power `2/p_c` with `(1 + t^{−1/p_c})`.
    CriticalLogHalf,
    /// `p ∈ [p_c, 2)`, `q ∈ (0,1)`: `|∇u| ≤ C ‖u₀‖_∞^{1/q} t^{−1/q}`.
    HjSub,
    /// `q > 1`: `|∇u^{(q−1)/q}| ≤ (1/q)(q−1)^{(q−1)/q} t^{−1/q}` with the
    /// explicit constant.
    HjPower,
    /// Diffusion only, `p ∈ (p_c, 2)`: sharp negative-power estimate.
    DiffusionNegPower,
    /// Diffusion only, `p = p_c`: log-corrected estimate.
    DiffusionCriticalLog,
    /// Diffusion only, `p ∈ (p_sc, p_c)`: `|∇Φ^{−k/(1−k)}| ≤ C‖u₀‖_∞^{(2−p−2k)/p(1−k)} t^{−1/p}`.
    DiffusionMidPower,
    /// Diffusion only, `p = p_sc` (`k = 0`): `|∇ log Φ| ≤ C‖u₀‖_∞^{(2−p)/p} t^{−1/p}`.
    DiffusionLogSlope,
    /// Diffusion only, `p ∈ (1, p_sc)` (`k < 0`): `|∇Φ^{|k|/(1+|k|)}| ≤ C‖u₀‖_∞^{(2−p−2k)/p(1−k)} t^{−1/p}`.
    DiffusionPosPower,
}

impl EstimateId {
    pub const ALL: [EstimateId; 15] = [
        EstimateId::NegPowerSharp,
        EstimateId::NegPowerBounded,
        EstimateId::MidNegPower,
        EstimateId::LogSlope,
        EstimateId::PosPower,
        EstimateId::CriticalLogSharp,
        EstimateId::CriticalLogBounded,
        EstimateId::CriticalLogHalf,
        EstimateId::HjSub,
        EstimateId::HjPower,
        EstimateId::DiffusionNegPower,
        EstimateId::DiffusionCriticalLog,
        EstimateId::DiffusionMidPower,
        EstimateId::DiffusionLogSlope,
        EstimateId::DiffusionPosPower,
    ];

    /// Estimates stated for the absorption-free equation.
    pub fn diffusion_only(&self) -> bool {
        matches!(
            self,
            EstimateId::DiffusionNegPower
                | EstimateId::DiffusionCriticalLog
                | EstimateId::DiffusionMidPower
                | EstimateId::DiffusionLogSlope
                | EstimateId::DiffusionPosPower
        )
    }

    /// True when the right-hand side carries a fully explicit constant, so
    /// the check is pass/fail rather than an empirical-constant report.
    pub fn explicit_constant(&self) -> bool {
        matches!(
            self,
            EstimateId::NegPowerSharp | EstimateId::HjPower | EstimateId::DiffusionNegPower
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateId::NegPowerSharp => "neg-power-sharp",
            EstimateId::NegPowerBounded => "neg-power-bounded",
            EstimateId::MidNegPower => "mid-neg-power",
            EstimateId::LogSlope => "log-slope",
            EstimateId::PosPower => "pos-power",
            EstimateId::CriticalLogSharp => "critical-log-sharp",
            EstimateId::CriticalLogBounded => "critical-log-bounded",
            EstimateId::CriticalLogHalf => "critical-log-half",
            EstimateId::HjSub => "hj-sub",
            EstimateId::HjPower => "hj-power",
            EstimateId::DiffusionNegPower => "diffusion-neg-power",
            EstimateId::DiffusionCriticalLog => "diffusion-critical-log",
            EstimateId::DiffusionMidPower => "diffusion-mid-power",
            EstimateId::DiffusionLogSlope => "diffusion-log-slope",
            EstimateId::DiffusionPosPower => "diffusion-pos-power",
        }
    }
}

fn eq_tol(a: f64, b: f64) -> bool {
    (a - b).abs() <= THRESHOLD_TOL
}

/// Reject estimate/parameter mismatches (wrong `p` or `q` range, absorption
/// setting, or dimension).
fn check_applicable(
    id: EstimateId,
    params: &Params,
    absorption_enabled: bool,
) -> Result<(), FunctionalError> {
    let e = critical_exponents(params);
    let (p, q, n) = (params.p(), params.q(), params.n());
    let fail = |msg: String| Err(FunctionalError::Inapplicable(msg));
    if id.diffusion_only() && absorption_enabled {
        return fail(format!(
            "{} is a diffusion-only estimate; run has absorption enabled",
            id.as_str()
        ));
    }
    let edge = params.nf() / (params.nf() + 1.0);
    match id {
        EstimateId::NegPowerSharp => {
            if !(p > e.p_c + THRESHOLD_TOL && q >= 1.0 - THRESHOLD_TOL) {
                return fail(format!("needs p > p_c and q >= 1, got p={p}, q={q}"));
            }
        }
        EstimateId::NegPowerBounded => {
            if !(p > e.p_c + THRESHOLD_TOL && q >= p / 2.0 - THRESHOLD_TOL && q < 1.0) {
                return fail(format!("needs p > p_c and q in [p/2, 1), got p={p}, q={q}"));
            }
        }
        EstimateId::MidNegPower => {
            if !(p >= e.p_c - THRESHOLD_TOL && q > p - 1.0 && q < p / 2.0) {
                return fail(format!(
                    "needs p >= p_c and q in (p−1, p/2), got p={p}, q={q}"
                ));
            }
        }
        EstimateId::LogSlope => {
            if !(p >= e.p_c - THRESHOLD_TOL && eq_tol(q, p - 1.0)) {
                return fail(format!("needs q = p−1, got p={p}, q={q}"));
            }
        }
        EstimateId::PosPower => {
            if !(p >= e.p_c - THRESHOLD_TOL && q < p - 1.0) {
                return fail(format!("needs p >= p_c and q < p−1, got p={p}, q={q}"));
            }
        }
        EstimateId::CriticalLogSharp => {
            if !(eq_tol(p, e.p_c) && n >= 2 && q >= 1.0 - THRESHOLD_TOL) {
                return fail(format!(
                    "needs p = p_c, N >= 2, q >= 1, got p={p}, q={q}, N={n}"
                ));
            }
        }
        EstimateId::CriticalLogBounded => {
            if !(eq_tol(p, e.p_c) && n >= 2 && q > edge && q < 1.0) {
                return fail(format!(
                    "needs p = p_c, N >= 2, q in (N/(N+1), 1), got p={p}, q={q}, N={n}"
                ));
            }
        }
        EstimateId::CriticalLogHalf => {
            if !(eq_tol(p, e.p_c) && n >= 2 && eq_tol(q, edge)) {
                return fail(format!(
                    "needs p = p_c, N >= 2, q = N/(N+1), got p={p}, q={q}, N={n}"
                ));
            }
        }
        EstimateId::HjSub => {
            if !(p >= e.p_c - THRESHOLD_TOL && q < 1.0) {
                return fail(format!("needs p >= p_c and q < 1, got p={p}, q={q}"));
            }
        }
        EstimateId::HjPower => {
            if !(p >= e.p_c - THRESHOLD_TOL && q > 1.0 + THRESHOLD_TOL) {
                return fail(format!("needs p >= p_c and q > 1, got p={p}, q={q}"));
            }
        }
        EstimateId::DiffusionNegPower => {
            if !(p > e.p_c + THRESHOLD_TOL) {
                return fail(format!("needs p > p_c, got p={p}"));
            }
        }
        EstimateId::DiffusionCriticalLog => {
            if !(eq_tol(p, e.p_c) && n >= 2) {
                return fail(format!("needs p = p_c and N >= 2, got p={p}, N={n}"));
            }
        }
        EstimateId::DiffusionMidPower => {
            if !(p > e.p_sc + THRESHOLD_TOL && p < e.p_c - THRESHOLD_TOL) {
                return fail(format!("needs p in (p_sc, p_c), got p={p}"));
            }
        }
        EstimateId::DiffusionLogSlope => {
            if !eq_tol(p, e.p_sc) {
                return fail(format!("needs p = p_sc = {}, got p={p}", e.p_sc));
            }
        }
        EstimateId::DiffusionPosPower => {
            if !(p < e.p_sc - THRESHOLD_TOL) {
                return fail(format!("needs p < p_sc = {}, got p={p}", e.p_sc));
            }
        }
    }
    Ok(())
}

/// One time sample of an estimate check (for plot emission).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateSample {
    pub t: f64,
    /// LHS at the node attaining the max ratio.
    pub lhs_max: f64,
    /// RHS at that node.
    pub rhs: f64,
    pub ratio: f64,
}

/// Outcome of a gradient-estimate certification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateCheck {
    pub estimate_id: EstimateId,
    /// `sup` over sampled `(t, x)` of `LHS / RHS`. For estimates with an
    /// unspecified constant this *is* the empirical constant.
    pub max_ratio: f64,
    pub delta_shift: f64,
    pub window: (f64, f64),
    pub explicit_constant: bool,
    pub samples: usize,
    pub series: Vec<EstimateSample>,
}

/// Certify a gradient estimate on the snapshots of a trajectory.
///
/// `delta` shifts the solution (`δ = ε^γ` reproduces the solver floor and
/// makes the check the strong whole-domain form); `window` defaults to the
/// last decade of the run and is intersected with the ε-level validity
/// window `(0, ε^{(4γ−p)/2})` (or `(0, ε^{(2γ−q)/2})` for the
/// absorption-driven estimates) for the sharp-constant variants.
pub fn gradient_estimate_check(
    traj: &Trajectory,
    id: EstimateId,
    delta: f64,
    window: Option<(f64, f64)>,
) -> Result<EstimateCheck, FunctionalError> {
    let params = traj.params();
    check_applicable(id, params, traj.config().absorption_enabled)?;
    if !(delta >= 0.0) {
        return Err(FunctionalError::Inapplicable(String::from(
            "delta shift must be non-negative",
        )));
    }
    let (p, q, nf) = (params.p(), params.q(), params.nf());
    let e = critical_exponents(params);
    let u0_inf = traj.initial_amp();
    let eps = traj.config().reg.eps();
    let gamma = traj.config().reg.gamma();

    let mut window = window.unwrap_or_else(|| default_fit_window(traj.last_time()));
    // ε-level validity windows for the sharp estimates.
    let t_valid = match id {
        EstimateId::NegPowerSharp
        | EstimateId::DiffusionNegPower
        | EstimateId::CriticalLogSharp => Some(eps.powf((4.0 * gamma - p) / 2.0)),
        EstimateId::HjPower | EstimateId::HjSub => Some(eps.powf((2.0 * gamma - q) / 2.0)),
        _ => None,
    };
    if let Some(tv) = t_valid {
        window.1 = window.1.min(tv);
    }

    // LHS shape: |∇ u^m| = |m| (u+δ)^{pow} |∇u|  with pow = m − 1.
    // RHS shape: const · u0^{σ} · (c₀ + c₁ t^{−β}) · (log(e·u0/(u+δ)))^{λ}.
    struct Shape {
        lhs_coef: f64,
        lhs_pow: f64,
        rhs_const: f64,
        rhs_u0_pow: f64,
        rhs_c0: f64,
        rhs_c1_u0_pow: f64,
        rhs_beta: f64,
        rhs_log_pow: f64,
    }
    let k = e.k;
    let shape = match id {
        EstimateId::NegPowerSharp | EstimateId::DiffusionNegPower => Shape {
            lhs_coef: (2.0 - p) / p,
            lhs_pow: -2.0 / p,
            rhs_const: ((2.0 - p) / p).powf((p - 1.0) / p)
                * e.eta.expect("eta defined for p > p_c").powf(1.0 / p),
            rhs_u0_pow: 0.0,
            rhs_c0: 0.0,
            rhs_c1_u0_pow: 0.0,
            rhs_beta: 1.0 / p,
            rhs_log_pow: 0.0,
        },
        EstimateId::NegPowerBounded => Shape {
            lhs_coef: (2.0 - p) / p,
            lhs_pow: -2.0 / p,
            rhs_const: 1.0,
            rhs_u0_pow: 0.0,
            rhs_c0: u0_inf.powf((2.0 * q - p) / (p * (p - q))),
            rhs_c1_u0_pow: 0.0,
            rhs_beta: 1.0 / p,
            rhs_log_pow: 0.0,
        },
        EstimateId::MidNegPower => Shape {
            lhs_coef: (q - p + 1.0) / (p - q),
            lhs_pow: -1.0 / (p - q),
            rhs_const: 1.0,
            rhs_u0_pow: 0.0,
            rhs_c0: 1.0,
            rhs_c1_u0_pow: (p - 2.0 * q) / (p * (p - q)),
            rhs_beta: 1.0 / p,
            rhs_log_pow: 0.0,
        },
        EstimateId::LogSlope => Shape {
            lhs_coef: 1.0,
            lhs_pow: -1.0,
            rhs_const: 1.0,
            rhs_u0_pow: 0.0,
            rhs_c0: 1.0,
            rhs_c1_u0_pow: (2.0 - p) / p,
            rhs_beta: 1.0 / p,
            rhs_log_pow: 0.0,
        },
        EstimateId::PosPower => Shape {
            lhs_coef: (p - q - 1.0) / (p - q),
            lhs_pow: -1.0 / (p - q),
            rhs_const: 1.0,
            rhs_u0_pow: 0.0,
            rhs_c0: 1.0,
            rhs_c1_u0_pow: (p - 2.0 * q) / (p * (p - q)),
            rhs_beta: 1.0 / p,
            rhs_log_pow: 0.0,
        },
        EstimateId::CriticalLogSharp | EstimateId::DiffusionCriticalLog => Shape {
            lhs_coef: 1.0 / nf,
            lhs_pow: -(nf + 1.0) / nf,
            rhs_const: 1.0,
            rhs_u0_pow: 0.0,
            rhs_c0: 0.0,
            rhs_c1_u0_pow: 0.0,
            rhs_beta: 1.0 / e.p_c,
            rhs_log_pow: 1.0 / e.p_c,
        },
        EstimateId::CriticalLogBounded => Shape {
            lhs_coef: 1.0 / nf,
            lhs_pow: -(nf + 1.0) / nf,
            rhs_const: 1.0,
            rhs_u0_pow: 0.0,
            rhs_c0: u0_inf.powf((q * (nf + 1.0) - nf) / (nf * (e.p_c - q))),
            rhs_c1_u0_pow: 0.0,
            rhs_beta: 1.0 / e.p_c,
            rhs_log_pow: 1.0 / e.p_c,
        },
        EstimateId::CriticalLogHalf => Shape {
            lhs_coef: 1.0 / nf,
            lhs_pow: -(nf + 1.0) / nf,
            rhs_const: 1.0,
            rhs_u0_pow: 0.0,
            rhs_c0: 1.0,
            rhs_c1_u0_pow: 0.0,
            rhs_beta: 1.0 / e.p_c,
            rhs_log_pow: 2.0 / e.p_c,
        },
        EstimateId::HjSub => Shape {
            lhs_coef: 1.0,
            lhs_pow: 0.0,
            rhs_const: 1.0,
            rhs_u0_pow: 1.0 / q,
            rhs_c0: 0.0,
            rhs_c1_u0_pow: 0.0,
            rhs_beta: 1.0 / q,
            rhs_log_pow: 0.0,
        },
        EstimateId::HjPower => Shape {
            lhs_coef: (q - 1.0) / q,
            lhs_pow: -1.0 / q,
            rhs_const: (1.0 / q) * (q - 1.0).powf((q - 1.0) / q),
            rhs_u0_pow: 0.0,
            rhs_c0: 0.0,
            rhs_c1_u0_pow: 0.0,
            rhs_beta: 1.0 / q,
            rhs_log_pow: 0.0,
        },
        EstimateId::DiffusionMidPower | EstimateId::DiffusionPosPower => Shape {
            lhs_coef: (k / (1.0 - k)).abs(),
            lhs_pow: -1.0 / (1.0 - k),
            rhs_const: 1.0,
            rhs_u0_pow: (2.0 - p - 2.0 * k) / (p * (1.0 - k)),
            rhs_c0: 0.0,
            rhs_c1_u0_pow: 0.0,
            rhs_beta: 1.0 / p,
            rhs_log_pow: 0.0,
        },
        EstimateId::DiffusionLogSlope => Shape {
            lhs_coef: 1.0,
            lhs_pow: -1.0,
            rhs_const: 1.0,
            rhs_u0_pow: (2.0 - p) / p,
            rhs_c0: 0.0,
            rhs_c1_u0_pow: 0.0,
            rhs_beta: 1.0 / p,
            rhs_log_pow: 0.0,
        },
    };

    // Positivity cut for δ = 0: only evaluate where the excess is resolved.
    let positivity_cut = 1e3 * f64::EPSILON * u0_inf.max(1.0);

    let mut series = Vec::new();
    let mut max_ratio: f64 = 0.0;
    let mut samples = 0usize;
    for idx in 0..traj.snapshots().len() {
        let (t, _) = traj.snapshots()[idx];
        if t <= 0.0 || t < window.0 || t > window.1 {
            continue;
        }
        let (_, excess) = traj.excess_snapshot(idx);
        let g = gradient_magnitude(&excess);
        let mut best: Option<EstimateSample> = None;
        for (&ei, &gi) in excess.values().iter().zip(g.values()) {
            let u = ei + delta;
            if u <= positivity_cut {
                continue;
            }
            let lhs = shape.lhs_coef * u.powf(shape.lhs_pow) * gi;
            let mut rhs = shape.rhs_const
                * if shape.rhs_u0_pow != 0.0 {
                    u0_inf.powf(shape.rhs_u0_pow)
                } else {
                    1.0
                };
            let t_part = if shape.rhs_c0 != 0.0 || shape.rhs_c1_u0_pow != 0.0 {
                let c1 = if shape.rhs_c1_u0_pow != 0.0 {
                    u0_inf.powf(shape.rhs_c1_u0_pow)
                } else {
                    1.0
                };
                shape.rhs_c0 + c1 * t.powf(-shape.rhs_beta)
            } else {
                t.powf(-shape.rhs_beta)
            };
            rhs *= t_part;
            if shape.rhs_log_pow != 0.0 {
                let arg = core::f64::consts::E * u0_inf / u;
                if arg <= 1.0 {
                    continue;
                }
                rhs *= arg.ln().powf(shape.rhs_log_pow);
            }
            if !(rhs > 0.0) {
                continue;
            }
            samples += 1;
            let ratio = lhs / rhs;
            if ratio > max_ratio {
                max_ratio = ratio;
            }
            match best {
                Some(b) if b.ratio >= ratio => {}
                _ => {
                    best = Some(EstimateSample {
                        t,
                        lhs_max: lhs,
                        rhs,
                        ratio,
                    })
                }
            }
        }
        if let Some(b) = best {
            series.push(b);
        }
    }
    if samples == 0 {
        return Err(FunctionalError::TooFewPoints(window.0, window.1, 1));
    }
    Ok(EstimateCheck {
        estimate_id: id,
        max_ratio,
        delta_shift: delta,
        window,
        explicit_constant: id.explicit_constant(),
        samples,
        series,
    })
}
