//! Single-experiment pipeline: classify, integrate, observe, check.

use anyhow::{Context, Result};

use gradabs_core::exponents::{classify, critical_exponents, Params, Regime};
use gradabs_core::functionals::{
    default_fit_window, detect_extinction, extinction_exponent_check, fit_exponential_decay,
    fit_power_decay, gradient_estimate_check, lower_envelope_residual, mass_balance_residual,
    FitResult,
};
use gradabs_core::solver::{run, SolverConfig, Trajectory};

use crate::config::{
    CheckRequest, DeltaSpec, ExperimentConfig, ExtinctExpect, FitKindSpec, NormKind,
};
use crate::report::{
    CheckOutcome, EstimateSeriesBlock, ProfileRow, RegimeEvidence, RunBlock, RunReport, SeriesBlock,
};

/// r² edge required before the exponential model is preferred.
const EXP_R2_MARGIN: f64 = 1e-4;
/// Fitted L¹ power exponents above this are read as "plateau" (positive
/// L¹ limit, diffusion-dominated regime).
const L1_PLATEAU_EXPONENT: f64 = -0.3;
/// Relative distance below which a cell counts as near-threshold (exact
/// hits are deliberate and not "near").
const NEAR_THRESHOLD_FRAC: f64 = 0.02;
const EXACT_HIT: f64 = 1e-9;
/// Reporting resolution for the series block.
const MAX_SERIES_ROWS: usize = 1200;

pub struct ExperimentOutcome {
    pub report: RunReport,
    pub trajectory: Option<Trajectory>,
}

/// Is (p, q) strictly inside the 2% band around any regime threshold?
pub fn near_threshold(params: &Params) -> bool {
    let e = critical_exponents(params);
    let (p, q) = (params.p(), params.q());
    let close = |x: f64, thr: f64| {
        if thr <= 0.0 {
            return false;
        }
        let d = ((x - thr) / thr).abs();
        d > EXACT_HIT && d < NEAR_THRESHOLD_FRAC
    };
    close(q, e.q_star) || close(q, p / 2.0) || close(p, e.p_c)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let params = config.params.build()?;
    let exponents = critical_exponents(&params);
    let prediction = classify(&params, config.fast_decay_data);
    let mut report = RunReport {
        config: config.clone(),
        exponents,
        prediction,
        near_threshold: near_threshold(&params),
        run: None,
    };

    let Some(spec) = &config.run else {
        return Ok(ExperimentOutcome {
            report,
            trajectory: None,
        });
    };

    let grid = spec.grid.build()?;
    let solver_config = spec.solver.build(&params, &grid)?;
    spec.datum
        .sample(&grid)
        .context("invalid field `run.datum`")?;

    let (trajectory, aborted) = match run(&spec.datum, &grid, &params, &solver_config) {
        Ok(t) => (t, None),
        Err(abort) => {
            let msg = abort.error.to_string();
            (abort.trajectory, Some(msg))
        }
    };

    let ext_tol = spec.ext_tol_rel * trajectory.initial_amp().max(f64::MIN_POSITIVE);
    let evidence = gather_evidence(&trajectory, ext_tol);
    let observed_regime = if aborted.is_some() {
        None
    } else {
        observe_regime(&evidence)
    };
    let agree = observed_regime.map(|o| o == prediction.regime);

    let mut checks = Vec::new();
    let mut estimate_series = Vec::new();
    for request in &spec.checks {
        let (outcome, est) = evaluate_check(
            request,
            &trajectory,
            &params,
            &solver_config,
            &evidence,
            ext_tol,
        );
        checks.push(outcome);
        if let Some(block) = est {
            estimate_series.push(block);
        }
    }

    report.run = Some(RunBlock {
        aborted,
        floor: trajectory.floor(),
        initial_amp: trajectory.initial_amp(),
        steps: trajectory.ledger().len().saturating_sub(1),
        t_final: trajectory.last_time(),
        observed_regime,
        agree,
        evidence,
        boundary_flagged: boundary_flagged(&trajectory, spec.boundary_frac),
        series: series_block(&trajectory),
        node_positions: (0..grid.node_count()).map(|i| grid.node_pos(i)).collect(),
        profiles: profiles(&trajectory),
        checks,
        estimate_series,
    });

    Ok(ExperimentOutcome {
        report,
        trajectory: Some(trajectory),
    })
}

fn gather_evidence(traj: &Trajectory, ext_tol: f64) -> RegimeEvidence {
    let mut ev = RegimeEvidence {
        extinction: detect_extinction(traj, ext_tol),
        ..Default::default()
    };
    let window = default_fit_window(traj.last_time());
    let linf = traj.linf_excess_series();
    let l1 = traj.l1_excess_series();
    ev.fit_power_linf = fit_power_decay(&linf, window).ok();
    ev.fit_exp_linf = fit_exponential_decay(&linf, window).ok();
    ev.fit_power_l1 = fit_power_decay(&l1, window).ok();
    ev
}

/// Regime classification from measurements: extinction detection first,
/// then the exponential-vs-power r² contest, then the L¹ plateau test
/// separating diffusion-dominated decay (positive L¹ limit) from fast
/// algebraic decay (L¹ → 0).
fn observe_regime(ev: &RegimeEvidence) -> Option<Regime> {
    if ev.extinction.is_some() {
        return Some(Regime::Extinction);
    }
    let pow = ev.fit_power_linf?;
    let exp = ev.fit_exp_linf?;
    if exp.r_squared > pow.r_squared + EXP_R2_MARGIN {
        return Some(Regime::PositivityExponential);
    }
    let l1 = ev.fit_power_l1?;
    if l1.exponent_or_rate > L1_PLATEAU_EXPONENT {
        Some(Regime::PositivityDiffusionDecay)
    } else {
        Some(Regime::PositivityFastAlgebraic)
    }
}

fn boundary_flagged(traj: &Trajectory, frac: f64) -> bool {
    let n = traj.grid().node_count();
    let floor = traj.floor();
    for (_, snap) in traj.snapshots() {
        let linfx = snap.max_value() - floor;
        if linfx <= 0.0 {
            continue;
        }
        let outer = match traj.grid().geometry() {
            gradabs_core::grid::Geometry::Line => {
                (snap.values()[0] - floor).max(snap.values()[n - 1] - floor)
            }
            gradabs_core::grid::Geometry::Radial { .. } => snap.values()[n - 1] - floor,
        };
        if outer > frac * linfx {
            return true;
        }
    }
    false
}

fn series_block(traj: &Trajectory) -> SeriesBlock {
    let rows = traj.ledger().len();
    let stride = rows.div_ceil(MAX_SERIES_ROWS).max(1);
    let abs_cum = traj.absorption_cumulative();
    let bnd_cum = traj.boundary_cumulative();
    let mut out = SeriesBlock {
        t: Vec::new(),
        l1: Vec::new(),
        linf: Vec::new(),
        grad_max: Vec::new(),
        absorption_cum: Vec::new(),
        boundary_cum: Vec::new(),
    };
    for (i, row) in traj.ledger().iter().enumerate() {
        if i % stride != 0 && i != rows - 1 {
            continue;
        }
        out.t.push(row.t);
        out.l1.push(traj.l1_excess(row));
        out.linf.push(traj.linf_excess(row));
        out.grad_max.push(row.grad_max);
        out.absorption_cum.push(abs_cum[i]);
        out.boundary_cum.push(bnd_cum[i]);
    }
    out
}

fn profiles(traj: &Trajectory) -> Vec<ProfileRow> {
    (0..traj.snapshots().len())
        .map(|i| {
            let (t, excess) = traj.excess_snapshot(i);
            ProfileRow {
                t,
                values: excess.into_values(),
            }
        })
        .collect()
}

fn fit_value(fit: &FitResult) -> f64 {
    fit.exponent_or_rate
}

fn evaluate_check(
    request: &CheckRequest,
    traj: &Trajectory,
    params: &Params,
    solver: &SolverConfig,
    evidence: &RegimeEvidence,
    ext_tol: f64,
) -> (CheckOutcome, Option<EstimateSeriesBlock>) {
    let fail = |id: String, note: String| CheckOutcome {
        id,
        passed: false,
        measured: f64::NAN,
        threshold: f64::NAN,
        note,
    };
    match request {
        CheckRequest::MassBalance { t, tol } => {
            let id = format!("mass-balance@t={t}");
            match mass_balance_residual(traj, *t) {
                Ok(residual) => (
                    CheckOutcome {
                        id,
                        passed: residual < *tol,
                        measured: residual,
                        threshold: *tol,
                        note: String::from("normalized |l1(t) + absorbed − l1(0) − boundary|"),
                    },
                    None,
                ),
                Err(e) => (fail(id, e.to_string()), None),
            }
        }
        CheckRequest::DecayFit {
            norm,
            kind,
            expected,
            rel_tol,
            window,
        } => {
            let id = format!(
                "decay-fit:{}:{}",
                match norm {
                    NormKind::L1 => "l1",
                    NormKind::Linf => "linf",
                },
                match kind {
                    FitKindSpec::Power => "power",
                    FitKindSpec::Exp => "exp",
                }
            );
            let series = match norm {
                NormKind::L1 => traj.l1_excess_series(),
                NormKind::Linf => traj.linf_excess_series(),
            };
            let w = window.unwrap_or_else(|| default_fit_window(traj.last_time()));
            let fit = match kind {
                FitKindSpec::Power => fit_power_decay(&series, w),
                FitKindSpec::Exp => fit_exponential_decay(&series, w),
            };
            match fit {
                Ok(fit) => {
                    let rel = (fit_value(&fit) - expected).abs() / expected.abs().max(1e-300);
                    (
                        CheckOutcome {
                            id,
                            passed: rel <= *rel_tol,
                            measured: fit_value(&fit),
                            threshold: *expected,
                            note: format!(
                                "relative error {rel:.4}, r²={:.6}, window [{}, {}]",
                                fit.r_squared, w.0, w.1
                            ),
                        },
                        None,
                    )
                }
                Err(e) => (fail(id, e.to_string()), None),
            }
        }
        CheckRequest::ExpBeatsPower { window } => {
            let id = String::from("exp-beats-power");
            let series = traj.linf_excess_series();
            let w = window.unwrap_or_else(|| default_fit_window(traj.last_time()));
            match (
                fit_exponential_decay(&series, w),
                fit_power_decay(&series, w),
            ) {
                (Ok(exp), Ok(pow)) => (
                    CheckOutcome {
                        id,
                        passed: exp.r_squared > pow.r_squared,
                        measured: exp.r_squared - pow.r_squared,
                        threshold: 0.0,
                        note: format!(
                            "r² exp {:.8} vs power {:.8}; rate {:.5}",
                            exp.r_squared, pow.r_squared, exp.exponent_or_rate
                        ),
                    },
                    None,
                ),
                (Err(e), _) | (_, Err(e)) => (fail(id, e.to_string()), None),
            }
        }
        CheckRequest::LowerEnvelope {
            max_residual,
            window,
        } => {
            let id = String::from("lower-envelope");
            let sum: Vec<(f64, f64)> = traj
                .ledger()
                .iter()
                .map(|r| (r.t, traj.l1_excess(r) + traj.linf_excess(r)))
                .collect();
            let w = window.unwrap_or_else(|| default_fit_window(traj.last_time()));
            match lower_envelope_residual(&sum, w) {
                Ok(res) => (
                    CheckOutcome {
                        id,
                        passed: res < *max_residual,
                        measured: res,
                        threshold: *max_residual,
                        note: String::from("max dip below the fitted log-linear envelope"),
                    },
                    None,
                ),
                Err(e) => (fail(id, e.to_string()), None),
            }
        }
        CheckRequest::Extinction { expect } => {
            let id = String::from("extinction");
            let te = &evidence.extinction;
            let (passed, measured, note) = match (expect, te) {
                (ExtinctExpect::Finite, Some(te)) => (
                    true,
                    te.t_e,
                    format!("T_e = {} ± {}", te.t_e, te.uncertainty),
                ),
                (ExtinctExpect::Finite, None) => (
                    false,
                    f64::NAN,
                    String::from("no extinction detected over the horizon"),
                ),
                (ExtinctExpect::None, Some(te)) => (
                    false,
                    te.t_e,
                    format!("unexpected extinction at T_e = {}", te.t_e),
                ),
                (ExtinctExpect::None, None) => {
                    let min_excess = traj
                        .ledger()
                        .iter()
                        .map(|r| traj.linf_excess(r))
                        .fold(f64::INFINITY, f64::min);
                    (
                        min_excess > ext_tol,
                        min_excess,
                        format!("max excess stayed above tol {ext_tol:e}"),
                    )
                }
            };
            (
                CheckOutcome {
                    id,
                    passed,
                    measured,
                    threshold: ext_tol,
                    note,
                },
                None,
            )
        }
        CheckRequest::ExtinctionShape { slack } => {
            let id = String::from("extinction-shape");
            let Some(te) = &evidence.extinction else {
                return (fail(id, String::from("no extinction detected")), None);
            };
            match extinction_exponent_check(traj, te, params) {
                Ok(shape) => {
                    let cap = shape.bound_linf_exponent * (1.0 + slack);
                    let passed = shape.fit_linf.exponent_or_rate <= cap
                        && shape.min_ratio_linf > 0.0
                        && shape.ratio_spread_linf < 5.0;
                    (
                        CheckOutcome {
                            id,
                            passed,
                            measured: shape.fit_linf.exponent_or_rate,
                            threshold: cap,
                            note: format!(
                                "bounds (l1, linf) = ({:.4}, {:.4}); fitted l1 {:.4}; \
                                 ratio min {:.4e}, spread {:.3}",
                                shape.bound_l1_exponent,
                                shape.bound_linf_exponent,
                                shape.fit_l1.exponent_or_rate,
                                shape.min_ratio_linf,
                                shape.ratio_spread_linf
                            ),
                        },
                        None,
                    )
                }
                Err(e) => (fail(id, e.to_string()), None),
            }
        }
        CheckRequest::GradientEstimate {
            id,
            delta,
            window,
            ratio_tol,
        } => {
            let check_id = format!("gradient-estimate:{}", id.as_str());
            let delta_value = match delta {
                DeltaSpec::Floor => solver.reg.floor(),
                DeltaSpec::Value(v) => *v,
            };
            match gradient_estimate_check(traj, *id, delta_value, *window) {
                Ok(check) => {
                    let (passed, threshold) = match ratio_tol {
                        Some(tol) => (check.max_ratio <= *tol, *tol),
                        None => (true, f64::INFINITY),
                    };
                    let block = EstimateSeriesBlock {
                        id: String::from(id.as_str()),
                        max_ratio: check.max_ratio,
                        series: check.series.clone(),
                    };
                    (
                        CheckOutcome {
                            id: check_id,
                            passed,
                            measured: check.max_ratio,
                            threshold,
                            note: format!(
                                "delta={:.6e}, window [{}, {}], {} samples{}",
                                check.delta_shift,
                                check.window.0,
                                check.window.1,
                                check.samples,
                                if check.explicit_constant {
                                    ""
                                } else {
                                    " (empirical constant; no explicit bound)"
                                }
                            ),
                        },
                        Some(block),
                    )
                }
                Err(e) => (fail(check_id, e.to_string()), None),
            }
        }
        CheckRequest::Positivity { t } => {
            let id = format!("positivity@t={t}");
            let floor = traj.floor();
            let snap = traj
                .snapshots()
                .iter()
                .min_by(|a, b| (a.0 - t).abs().partial_cmp(&(b.0 - t).abs()).unwrap())
                .map(|(ts, f)| (*ts, f.min_value() - floor));
            match snap {
                Some((ts, min_excess)) => (
                    CheckOutcome {
                        id,
                        passed: min_excess > 0.0,
                        measured: min_excess,
                        threshold: 0.0,
                        note: format!("min excess over all nodes at t={ts}"),
                    },
                    None,
                ),
                None => (fail(id, String::from("no snapshots")), None),
            }
        }
        CheckRequest::BoxInvariant => {
            let id = String::from("box-invariant");
            let floor = traj.floor();
            let ceiling = floor + traj.initial_amp();
            let tol = 10.0 * f64::EPSILON * ceiling.max(1.0);
            let mut worst: f64 = 0.0;
            for (_, snap) in traj.snapshots() {
                worst = worst.max(floor - snap.min_value());
                worst = worst.max(snap.max_value() - ceiling);
            }
            (
                CheckOutcome {
                    id,
                    passed: worst <= tol,
                    measured: worst,
                    threshold: tol,
                    note: String::from("max excursion outside [floor, floor + amp]"),
                },
                None,
            )
        }
        CheckRequest::GradSup { slack } => {
            let id = String::from("grad-sup");
            let g0 = traj.ledger().first().map(|r| r.grad_max).unwrap_or(0.0);
            let cap = g0 * (1.0 + solver.reg.eps()) * (1.0 + slack);
            let worst = traj
                .ledger()
                .iter()
                .map(|r| r.grad_max)
                .fold(0.0f64, f64::max);
            (
                CheckOutcome {
                    id,
                    passed: worst <= cap,
                    measured: worst,
                    threshold: cap,
                    note: format!("initial max gradient {g0}"),
                },
                None,
            )
        }
    }
}
