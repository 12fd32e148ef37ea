//! Time integration of the regularized Cauchy problem
//!
//! ```text
//!     ∂ₜu_ε = div(a_ε(|∇u_ε|²) ∇u_ε) − b_ε(|∇u_ε|²),
//!     u_ε(0) = u₀ + ε^γ,
//! ```
//!
//! on a truncated line or radial grid with zero outer flux. Constants are
//! exact steady states of the scheme (`b_ε(0) = 0`, zero fluxes), so the
//! lifted floor `ε^γ` and the ceiling `ε^γ + ‖u₀‖_∞` are preserved: every
//! accepted step is checked against that comparison box and rejected (with
//! `dt` halving) on violation or loss of finiteness. The discrete floor is
//! only unconditionally defensible for data with moderate slopes: a steep
//! enough spike with `q > 1` makes the nodal absorption `~|∇u|^q` outrun
//! the diffusion influx `~|∇u|^{p−1}/h` at any `dt`, and the run then
//! aborts honestly instead of clamping.
//!
//! Two schemes are provided. `ExplicitEuler` is monotone under the CFL bound
//! `dt ≤ h²/(2·dim·ε^{p−2})` but that bound collapses as `ε → 0`;
//! `SemiImplicitDiffusion` freezes the face coefficients `a_ε` at the current
//! state, solves the resulting linear tridiagonal system implicitly, and
//! treats the absorption explicitly, which keeps long runs affordable at
//! small `ε`.
//!
//! Each accepted step appends a ledger row with the volume-weighted norms,
//! the max gradient, the increment of the absorption integral
//! `∫ |∇u|^q dx dt` (measured independently of the scheme, by trapezoidal
//! quadrature of the centered-difference gradient), and the outer boundary
//! flux (identically zero under the Neumann condition, recorded so balance
//! checks can subtract it).

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::Params;
use crate::functionals::{absorption_integral, l1_norm, l_inf_norm};
use crate::grid::{
    a_eps, face_differences, gradient_magnitude, hamilton_term_reg, p_laplacian_reg, Field, Grid,
    GridError, RegEps,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("time integration stalled at t={t}: accepted dt={dt} no longer advances time")]
    Stagnation { t: f64, dt: f64 },
    #[error("step budget of {0} accepted steps exhausted before t_end")]
    StepBudget(usize),
    #[error("initial datum must be non-negative, found {0}")]
    NegativeDatum(f64),
    #[error("custom datum has {got} values, grid has {want} nodes")]
    DatumLength { got: usize, want: usize },
    #[error("datum parameter out of range: {0}")]
    BadDatum(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid solver configuration: {0}")]
    BadConfig(&'static str),
    #[error(
        "step at t={t} rejected {retries} times (dt down to {dt}); state range [{lo}, {hi}] \
         outside the comparison box"
    )]
    Unstable {
        t: f64,
        dt: f64,
        retries: u32,
        lo: f64,
        hi: f64,
    },
}

/// Time-step selection policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtPolicy {
    /// Use exactly this `dt` (clipped at `t_end`).
    FixedDt(f64),
    /// Explicit-stability bound `safety · h²/(2 · dim · ε^{p−2})`.
    CflAdaptive { safety: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExplicitEuler,
    SemiImplicitDiffusion,
}

/// Solver configuration. With `absorption_enabled = false` the run integrates
/// the pure singular diffusion equation `∂ₜΦ = Δ_p Φ` (regularized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub reg: RegEps,
    pub t_end: f64,
    pub dt_policy: DtPolicy,
    pub scheme: Scheme,
    pub observer_stride: usize,
    pub absorption_enabled: bool,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(SolverError::BadConfig("t_end must be finite and >= 0"));
        }
        match self.dt_policy {
            DtPolicy::FixedDt(dt) if !(dt.is_finite() && dt > 0.0) => {
                return Err(SolverError::BadConfig("fixed dt must be positive"));
            }
            DtPolicy::CflAdaptive { safety } if !(safety > 0.0 && safety <= 1.0) => {
                return Err(SolverError::BadConfig("CFL safety must lie in (0,1]"));
            }
            _ => {}
        }
        if self.observer_stride == 0 {
            return Err(SolverError::BadConfig("observer_stride must be >= 1"));
        }
        Ok(())
    }
}

/// Initial data shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialDatum {
    /// `A·cos²(π x / 2w)` on `|x| < w`, zero outside. Compactly supported,
    /// C¹, so it satisfies every power-tail decay condition.
    Bump { amplitude: f64, width: f64 },
    /// `c₀ · max(|x|, r₀)^{−α}`: constant core of radius `r₀`, power tail
    /// outside, matching `u₀(x) ≤ c₀ |x|^{−α}` away from the core.
    PowerTail {
        c0: f64,
        alpha_tail: f64,
        core_radius: f64,
    },
    /// Explicit node values.
    Custom { values: Vec<f64> },
}

impl InitialDatum {
    /// Sample the datum on `grid`, validating non-negativity and finiteness.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>, SolverError> {
        let n = grid.node_count();
        let values = match self {
            InitialDatum::Bump { amplitude, width } => {
                if !(*amplitude > 0.0 && amplitude.is_finite()) {
                    return Err(SolverError::BadDatum("bump amplitude must be positive"));
                }
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(SolverError::BadDatum("bump width must be positive"));
                }
                (0..n)
                    .map(|i| {
                        let x = grid.node_pos(i).abs();
                        if x < *width {
                            let c = libm::cos(core::f64::consts::FRAC_PI_2 * x / width);
                            amplitude * c * c
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            InitialDatum::PowerTail {
                c0,
                alpha_tail,
                core_radius,
            } => {
                if !(*c0 > 0.0 && c0.is_finite()) {
                    return Err(SolverError::BadDatum("power-tail c0 must be positive"));
                }
                if !(*alpha_tail > 0.0 && alpha_tail.is_finite()) {
                    return Err(SolverError::BadDatum(
                        "power-tail exponent must be positive",
                    ));
                }
                if !(*core_radius > 0.0 && core_radius.is_finite()) {
                    return Err(SolverError::BadDatum(
                        "power-tail core radius must be positive",
                    ));
                }
                (0..n)
                    .map(|i| {
                        let x = grid.node_pos(i).abs().max(*core_radius);
                        c0 * libm::pow(x, -alpha_tail)
                    })
                    .collect()
            }
            InitialDatum::Custom { values } => {
                if values.len() != n {
                    return Err(SolverError::DatumLength {
                        got: values.len(),
                        want: n,
                    });
                }
                values.clone()
            }
        };
        for &v in &values {
            if !v.is_finite() {
                return Err(SolverError::BadDatum("datum values must be finite"));
            }
            if v < 0.0 {
                return Err(SolverError::NegativeDatum(v));
            }
        }
        Ok(values)
    }
}

/// Sample `datum` on `grid` and lift it by the floor `ε^γ`.
pub fn lift_initial(datum: &InitialDatum, grid: &Grid, reg: &RegEps) -> Result<Field, SolverError> {
    let floor = reg.floor();
    let mut values = datum.sample(grid)?;
    for v in &mut values {
        *v += floor;
    }
    Ok(Field::new(*grid, values)?)
}

/// Explicit-scheme stability bound `safety · h² / (2 · dim_factor · ε^{p−2})`
/// with `dim_factor = 1` on a line and `N` on a radial grid (the origin cell
/// is the binding one).
pub fn stable_dt(state: &Field, params: &Params, reg: &RegEps, safety: f64) -> f64 {
    let grid = state.grid();
    let dim_factor = match grid.geometry() {
        crate::grid::Geometry::Line => 1.0,
        crate::grid::Geometry::Radial { dim } => dim as f64,
    };
    let h = grid.spacing();
    let a_max = a_eps(0.0, params.p(), reg.eps());
    safety * h * h / (2.0 * dim_factor * a_max)
}

/// Comparison box for a run: the lifted floor and ceiling with the accepted
/// rounding tolerance (10 machine epsilons of the ceiling).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateBounds {
    pub floor: f64,
    pub ceiling: f64,
    pub tol: f64,
}

impl StateBounds {
    pub fn for_initial(initial: &Field, floor: f64) -> Self {
        let ceiling = initial.max_value();
        StateBounds {
            floor,
            ceiling,
            tol: 10.0 * f64::EPSILON * ceiling.abs().max(1.0),
        }
    }

    fn contains(&self, field: &Field) -> bool {
        let lo = self.floor - self.tol;
        let hi = self.ceiling + self.tol;
        field
            .values()
            .iter()
            .all(|&v| v.is_finite() && v >= lo && v <= hi)
    }
}

const MAX_STEP_RETRIES: u32 = 40;

/// Advance one step. The proposed `dt` comes from the policy, clipped at
/// `t_end`; a candidate state leaving the comparison box (or going
/// non-finite) is rejected and retried with half the step, a bounded number
/// of times.
pub fn step(
    state: &Field,
    t: f64,
    params: &Params,
    config: &SolverConfig,
    bounds: &StateBounds,
) -> Result<(Field, f64), SolverError> {
    let mut dt = match config.dt_policy {
        DtPolicy::FixedDt(dt) => dt,
        DtPolicy::CflAdaptive { safety } => stable_dt(state, params, &config.reg, safety),
    };
    if config.t_end > t {
        dt = dt.min(config.t_end - t);
    }

    // The explicit part of the right-hand side only depends on the current
    // state, so it is computed once and reused across retries.
    let rhs = match config.scheme {
        Scheme::ExplicitEuler => {
            let lap = p_laplacian_reg(state, params.p(), config.reg.eps());
            if config.absorption_enabled {
                let b = hamilton_term_reg(state, params.q(), config.reg.eps());
                lap.values()
                    .iter()
                    .zip(b.values())
                    .map(|(&l, &a)| l - a)
                    .collect::<Vec<f64>>()
            } else {
                lap.into_values()
            }
        }
        Scheme::SemiImplicitDiffusion => {
            if config.absorption_enabled {
                hamilton_term_reg(state, params.q(), config.reg.eps())
                    .values()
                    .iter()
                    .map(|&b| -b)
                    .collect()
            } else {
                vec![0.0; state.values().len()]
            }
        }
    };

    let mut retries = 0;
    loop {
        let candidate = match config.scheme {
            Scheme::ExplicitEuler => {
                let values = state
                    .values()
                    .iter()
                    .zip(&rhs)
                    .map(|(&u, &r)| u + dt * r)
                    .collect();
                field_or_nan(*state.grid(), values)
            }
            Scheme::SemiImplicitDiffusion => {
                semi_implicit_step(state, &rhs, dt, params.p(), config.reg.eps())
            }
        };
        if bounds.contains(&candidate) {
            return Ok((candidate, dt));
        }
        retries += 1;
        if retries > MAX_STEP_RETRIES {
            return Err(SolverError::Unstable {
                t,
                dt,
                retries,
                lo: candidate.min_value(),
                hi: candidate.max_value(),
            });
        }
        dt *= 0.5;
    }
}

fn field_or_nan(grid: Grid, values: Vec<f64>) -> Field {
    Field::new(grid, values).unwrap_or_else(|_| Field::constant(grid, f64::NAN))
}

/// One backward-Euler diffusion step with coefficients frozen at the current
/// state, absorption already folded into `rhs`. Solved in increment form,
/// `(I − dt·L) δ = dt·(L u + rhs)`, `u_new = u + δ`, so exact steady states
/// (constants) are preserved bitwise.
fn semi_implicit_step(state: &Field, rhs: &[f64], dt: f64, p: f64, eps: f64) -> Field {
    let grid = state.grid();
    let u = state.values();
    let n = u.len();
    let h = grid.spacing();
    let d = face_differences(state);
    // Face conductances: area · a_ε(D²) / h.
    let cond: Vec<f64> = d
        .iter()
        .enumerate()
        .map(|(i, &df)| grid.face_area(i) * a_eps(df * df, p, eps) / h)
        .collect();

    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        let v = grid.cell_volume(i);
        let cl = if i == 0 { 0.0 } else { cond[i - 1] };
        let cr = if i == n - 1 { 0.0 } else { cond[i] };
        sub[i] = -dt * cl / v;
        sup[i] = -dt * cr / v;
        diag[i] = 1.0 + dt * (cl + cr) / v;
        let lu = (if i == n - 1 {
            0.0
        } else {
            cond[i] * (u[i + 1] - u[i])
        } - if i == 0 {
            0.0
        } else {
            cond[i - 1] * (u[i] - u[i - 1])
        }) / v;
        b[i] = dt * (lu + rhs[i]);
    }
    thomas_solve(&sub, &mut diag, &sup, &mut b);
    let values = u.iter().zip(&b).map(|(&ui, &di)| ui + di).collect();
    field_or_nan(*grid, values)
}

/// Thomas algorithm for a tridiagonal system; `diag` and `b` are clobbered,
/// the solution lands in `b`.
fn thomas_solve(sub: &[f64], diag: &mut [f64], sup: &[f64], b: &mut [f64]) {
    let n = b.len();
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        b[i] -= w * b[i - 1];
    }
    b[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        b[i] = (b[i] - sup[i] * b[i + 1]) / diag[i];
    }
}

/// One observable record per accepted step (plus the initial row).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    /// Volume-weighted L¹ norm of the (lifted) state.
    pub l1: f64,
    /// Max of the (lifted) state.
    pub linf: f64,
    /// Max centered-difference gradient magnitude.
    pub grad_max: f64,
    /// Increment of `∫∫ |∇u|^q dx dt` over the step (trapezoidal in time,
    /// centered gradient in space); zero on the initial row.
    pub absorption_increment: f64,
    /// Outward mass flux through the outer boundary over the step (zero
    /// under the Neumann condition).
    pub boundary_flux: f64,
}

/// A completed (or aborted) run: snapshots, the per-step ledger, and enough
/// context to interpret them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    params: Params,
    config: SolverConfig,
    grid: Grid,
    floor: f64,
    initial_amp: f64,
    snapshots: Vec<(f64, Field)>,
    ledger: Vec<LedgerRow>,
}

impl Trajectory {
    #[inline]
    pub fn params(&self) -> &Params {
        &self.params
    }
    #[inline]
    pub fn config(&self) -> &SolverConfig {
        &self.config
    }
    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    /// The lift floor `ε^γ` (exactly preserved by the scheme).
    #[inline]
    pub fn floor(&self) -> f64 {
        self.floor
    }
    /// Measured `‖u₀‖_∞` (initial max excess above the floor).
    #[inline]
    pub fn initial_amp(&self) -> f64 {
        self.initial_amp
    }
    #[inline]
    pub fn snapshots(&self) -> &[(f64, Field)] {
        &self.snapshots
    }
    #[inline]
    pub fn ledger(&self) -> &[LedgerRow] {
        &self.ledger
    }
    pub fn last_time(&self) -> f64 {
        self.ledger.last().map(|r| r.t).unwrap_or(0.0)
    }

    /// Rebuild a trajectory from stored parts (snapshot persistence).
    pub fn from_parts(
        params: Params,
        config: SolverConfig,
        grid: Grid,
        initial_amp: f64,
        snapshots: Vec<(f64, Field)>,
        ledger: Vec<LedgerRow>,
    ) -> Self {
        Trajectory {
            params,
            config,
            grid,
            floor: config.reg.floor(),
            initial_amp,
            snapshots,
            ledger,
        }
    }

    /// L¹ norm of the excess above the floor at a ledger row (the constant
    /// floor contributes exactly `floor · |domain|`).
    pub fn l1_excess(&self, row: &LedgerRow) -> f64 {
        row.l1 - self.floor * self.grid.domain_volume()
    }

    /// Max excess above the floor at a ledger row.
    pub fn linf_excess(&self, row: &LedgerRow) -> f64 {
        row.linf - self.floor
    }

    pub fn l1_excess_series(&self) -> Vec<(f64, f64)> {
        self.ledger
            .iter()
            .map(|r| (r.t, self.l1_excess(r)))
            .collect()
    }

    pub fn linf_excess_series(&self) -> Vec<(f64, f64)> {
        self.ledger
            .iter()
            .map(|r| (r.t, self.linf_excess(r)))
            .collect()
    }

    /// Cumulative absorption integral aligned with the ledger rows.
    pub fn absorption_cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.ledger
            .iter()
            .map(|r| {
                acc += r.absorption_increment;
                acc
            })
            .collect()
    }

    /// Cumulative outward boundary flux aligned with the ledger rows.
    pub fn boundary_cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.ledger
            .iter()
            .map(|r| {
                acc += r.boundary_flux;
                acc
            })
            .collect()
    }

    /// Excess field (state minus floor) of snapshot `i`.
    pub fn excess_snapshot(&self, i: usize) -> (f64, Field) {
        let (t, ref f) = self.snapshots[i];
        let values = f.values().iter().map(|&v| v - self.floor).collect();
        (t, Field::new(self.grid, values).expect("excess field"))
    }
}

/// A run that aborted mid-flight; the partial trajectory is attached.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("run aborted at t={t}: {error}")]
pub struct RunAbort {
    pub error: SolverError,
    pub t: f64,
    pub trajectory: Trajectory,
}

fn ledger_row(field: &Field, t: f64, q: f64) -> (LedgerRow, f64) {
    let grad = gradient_magnitude(field);
    let grad_max = grad.max_value();
    let absorption_now = absorption_integral(field, q);
    (
        LedgerRow {
            t,
            l1: l1_norm(field),
            linf: l_inf_norm(field),
            grad_max,
            absorption_increment: 0.0,
            boundary_flux: 0.0, // Neumann: the outer face carries no flux
        },
        absorption_now,
    )
}

/// Integrate the lifted problem to `t_end`.
///
/// Deterministic: identical inputs produce bit-identical trajectories. On a
/// persistent stability failure the partial trajectory is returned inside
/// the error.
pub fn run(
    datum: &InitialDatum,
    grid: &Grid,
    params: &Params,
    config: &SolverConfig,
) -> Result<Trajectory, Box<RunAbort>> {
    config.validate().map_err(|error| {
        Box::new(RunAbort {
            error,
            t: 0.0,
            trajectory: empty_trajectory(params, config, grid),
        })
    })?;
    let initial = lift_initial(datum, grid, &config.reg).map_err(|error| {
        Box::new(RunAbort {
            error,
            t: 0.0,
            trajectory: empty_trajectory(params, config, grid),
        })
    })?;
    let floor = config.reg.floor();
    let bounds = StateBounds::for_initial(&initial, floor);
    let initial_amp = initial.max_value() - floor;

    let (row0, mut absorption_prev) = ledger_row(&initial, 0.0, params.q());
    let mut ledger = vec![row0];
    let mut snapshots = vec![(0.0, initial.clone())];

    let mut state = initial;
    let mut t = 0.0;
    let mut steps: usize = 0;
    let t_cut = config.t_end * (1.0 - 1e-12);
    // Guard against runaway ledgers (~48 bytes per accepted step).
    const MAX_STEPS: usize = 10_000_000;

    while t < t_cut {
        let abort = |error: SolverError, snapshots: Vec<(f64, Field)>, ledger: Vec<LedgerRow>| {
            Box::new(RunAbort {
                error,
                t,
                trajectory: Trajectory {
                    params: *params,
                    config: *config,
                    grid: *grid,
                    floor,
                    initial_amp,
                    snapshots,
                    ledger,
                },
            })
        };
        if steps >= MAX_STEPS {
            return Err(abort(SolverError::StepBudget(MAX_STEPS), snapshots, ledger));
        }
        match step(&state, t, params, config, &bounds) {
            Ok((next, dt_used)) => {
                if t + dt_used == t {
                    return Err(abort(
                        SolverError::Stagnation { t, dt: dt_used },
                        snapshots,
                        ledger,
                    ));
                }
                t += dt_used;
                steps += 1;
                let (mut row, absorption_now) = ledger_row(&next, t, params.q());
                // Trapezoidal increment of ∫|∇u|^q dx over the step.
                row.absorption_increment = if config.absorption_enabled {
                    0.5 * dt_used * (absorption_prev + absorption_now)
                } else {
                    0.0
                };
                absorption_prev = absorption_now;
                ledger.push(row);
                state = next;
                if steps % config.observer_stride == 0 && t < t_cut {
                    snapshots.push((t, state.clone()));
                }
            }
            Err(error) => {
                let at = t;
                return Err(Box::new(RunAbort {
                    error,
                    t: at,
                    trajectory: Trajectory {
                        params: *params,
                        config: *config,
                        grid: *grid,
                        floor,
                        initial_amp,
                        snapshots,
                        ledger,
                    },
                }));
            }
        }
    }
    if snapshots.last().map(|(ts, _)| *ts) != Some(t) {
        snapshots.push((t, state.clone()));
    }

    Ok(Trajectory {
        params: *params,
        config: *config,
        grid: *grid,
        floor,
        initial_amp,
        snapshots,
        ledger,
    })
}

fn empty_trajectory(params: &Params, config: &SolverConfig, grid: &Grid) -> Trajectory {
    Trajectory {
        params: *params,
        config: *config,
        grid: *grid,
        floor: config.reg.floor(),
        initial_amp: 0.0,
        snapshots: Vec::new(),
        ledger: Vec::new(),
    }
}
