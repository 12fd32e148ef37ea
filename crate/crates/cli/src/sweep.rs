//! Parameter sweeps: one experiment per (p, q) cell on a worker pool, merged
//! into a deterministic atlas (CSV rows sorted by (p, q) plus a JSON summary
//! with per-cell reports and agreement statistics that exclude
//! near-threshold cells).

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    CheckRequest, ExperimentConfig, GridSpec, OutputSpec, ParamsSpec, RunSpec, SolverSpec,
};
use crate::experiment::run_experiment;
use crate::report::RunReport;

// The datum spec is the core enum; alias for readability in sweep configs.
use gradabs_core::solver::InitialDatum as CoreDatum;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub p_values: Vec<f64>,
    pub q_values: Vec<f64>,
    pub n: u32,
    #[serde(default = "default_true")]
    pub fast_decay_data: bool,
    pub grid: GridSpec,
    pub solver: SolverSpec,
    pub datum: CoreDatum,
    #[serde(default)]
    pub checks: Vec<CheckRequest>,
    #[serde(default = "default_ext_tol_rel")]
    pub ext_tol_rel: f64,
    #[serde(default)]
    pub output: SweepOutput,
}

fn default_true() -> bool {
    true
}
fn default_ext_tol_rel() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOutput {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub json: Option<String>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text).context("malformed sweep config")?;
        if spec.p_values.is_empty() || spec.q_values.is_empty() {
            bail!("invalid field `p_values`/`q_values`: must be non-empty");
        }
        Ok(spec)
    }

    fn cell_config(&self, p: f64, q: f64) -> ExperimentConfig {
        ExperimentConfig {
            params: ParamsSpec { p, q, n: self.n },
            fast_decay_data: self.fast_decay_data,
            run: Some(RunSpec {
                grid: self.grid,
                solver: self.solver,
                datum: self.datum.clone(),
                checks: self.checks.clone(),
                ext_tol_rel: self.ext_tol_rel,
                boundary_frac: 0.05,
            }),
            output: OutputSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AtlasCell {
    pub p: f64,
    pub q: f64,
    pub n: u32,
    pub predicted_regime: String,
    pub observed_regime: String,
    pub fit_exponent: f64,
    pub fit_r2: f64,
    pub t_e: f64,
    pub near_threshold: bool,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Atlas {
    pub cells: Vec<AtlasCell>,
    /// Agreement over cells not marked near-threshold.
    pub agree_count: usize,
    pub counted_cells: usize,
    pub reports: Vec<RunReport>,
}

/// Run every (p, q) cell and merge. Per-cell failures are recorded in the
/// atlas; the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<Atlas> {
    let mut cells_in: Vec<(f64, f64)> = Vec::new();
    for &p in &spec.p_values {
        for &q in &spec.q_values {
            cells_in.push((p, q));
        }
    }
    cells_in.sort_by(|a, b| a.partial_cmp(b).expect("finite parameter values"));

    let outcomes: Vec<(f64, f64, Result<RunReport>)> = cells_in
        .par_iter()
        .map(|&(p, q)| {
            let cfg = spec.cell_config(p, q);
            let res = run_experiment(&cfg).map(|o| o.report);
            (p, q, res)
        })
        .collect();

    let mut cells = Vec::new();
    let mut reports = Vec::new();
    let mut agree_count = 0usize;
    let mut counted = 0usize;
    for (p, q, res) in outcomes {
        match res {
            Ok(report) => {
                let run = report.run.as_ref();
                let observed = run.and_then(|r| r.observed_regime);
                let agree = run.and_then(|r| r.agree).unwrap_or(false);
                let (fit_exponent, fit_r2) = run
                    .and_then(|r| r.evidence.fit_power_linf.as_ref())
                    .map(|f| (f.exponent_or_rate, f.r_squared))
                    .unwrap_or((f64::NAN, f64::NAN));
                let t_e = run
                    .and_then(|r| r.evidence.extinction.as_ref())
                    .map(|te| te.t_e)
                    .unwrap_or(f64::NAN);
                if !report.near_threshold {
                    counted += 1;
                    if agree {
                        agree_count += 1;
                    }
                }
                cells.push(AtlasCell {
                    p,
                    q,
                    n: spec.n,
                    predicted_regime: report.prediction.regime.as_str().to_string(),
                    observed_regime: observed
                        .map(|r| r.as_str().to_string())
                        .unwrap_or_else(|| "unobserved".to_string()),
                    fit_exponent,
                    fit_r2,
                    t_e,
                    near_threshold: report.near_threshold,
                    agree,
                    error: run.and_then(|r| r.aborted.clone()),
                });
                reports.push(report);
            }
            Err(e) => {
                cells.push(AtlasCell {
                    p,
                    q,
                    n: spec.n,
                    predicted_regime: "error".to_string(),
                    observed_regime: "error".to_string(),
                    fit_exponent: f64::NAN,
                    fit_r2: f64::NAN,
                    t_e: f64::NAN,
                    near_threshold: false,
                    agree: false,
                    error: Some(format!("{e:#}")),
                });
            }
        }
    }

    Ok(Atlas {
        cells,
        agree_count,
        counted_cells: counted,
        reports,
    })
}

impl Atlas {
    /// Atlas CSV, one row per cell, sorted by (p, q).
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("p,q,N,predicted_regime,observed_regime,fit_exponent,fit_r2,T_e,agree\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                c.p,
                c.q,
                c.n,
                c.predicted_regime,
                c.observed_regime,
                c.fit_exponent,
                c.fit_r2,
                c.t_e,
                c.agree
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("atlas serialization");
        s.push('\n');
        s
    }
}
