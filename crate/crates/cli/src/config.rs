//! Experiment configuration: a single JSON document, fully echoed into the
//! report, with no defaults hidden from the echo. Unknown fields are
//! rejected so config errors name the offending field.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use gradabs_core::exponents::Params;
use gradabs_core::functionals::EstimateId;
use gradabs_core::grid::{Geometry, Grid, RegEps};
use gradabs_core::solver::{DtPolicy, InitialDatum, Scheme, SolverConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ParamsSpec,
    /// Assume the datum satisfies the sharp power-tail condition when
    /// classifying (all catalog data here do).
    #[serde(default = "default_true")]
    pub fast_decay_data: bool,
    /// Absent: classify-only experiment (prediction block, no simulation).
    #[serde(default)]
    pub run: Option<RunSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub p: f64,
    pub q: f64,
    pub n: u32,
}

impl ParamsSpec {
    pub fn build(&self) -> Result<Params> {
        Params::new(self.p, self.q, self.n).context("invalid field `params`")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub grid: GridSpec,
    pub solver: SolverSpec,
    pub datum: InitialDatum,
    #[serde(default)]
    pub checks: Vec<CheckRequest>,
    /// Extinction-detection threshold, relative to the initial amplitude.
    #[serde(default = "default_ext_tol_rel")]
    pub ext_tol_rel: f64,
    /// Boundary monitor: flag the run when the outer excess exceeds this
    /// fraction of the max excess at the same time.
    #[serde(default = "default_boundary_frac")]
    pub boundary_frac: f64,
}

fn default_ext_tol_rel() -> f64 {
    1e-4
}
fn default_boundary_frac() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub geometry: Geometry,
    pub l: f64,
    pub m: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.geometry, self.l, self.m).context("invalid field `grid`")
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Operator regularization; default `clamp(h²/4, 1e−5, 1e−2)`.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Lift exponent; default 90% of the admissible bound.
    #[serde(default)]
    pub gamma: Option<f64>,
    pub t_end: f64,
    pub dt: DtSpec,
    pub scheme: Scheme,
    pub observer_stride: usize,
    pub absorption: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtSpec {
    Fixed(f64),
    Cfl(f64),
}

impl SolverSpec {
    pub fn build(&self, params: &Params, grid: &Grid) -> Result<SolverConfig> {
        let defaults = RegEps::default_for(params, grid.spacing());
        let eps = self.eps.unwrap_or(defaults.eps());
        let gamma = self.gamma.unwrap_or(defaults.gamma());
        let reg =
            RegEps::new(eps, gamma, params).context("invalid field `solver.eps`/`solver.gamma`")?;
        let config = SolverConfig {
            reg,
            t_end: self.t_end,
            dt_policy: match self.dt {
                DtSpec::Fixed(dt) => DtPolicy::FixedDt(dt),
                DtSpec::Cfl(safety) => DtPolicy::CflAdaptive { safety },
            },
            scheme: self.scheme,
            observer_stride: self.observer_stride,
            absorption_enabled: self.absorption,
        };
        config.validate().context("invalid field `solver`")?;
        Ok(config)
    }
}

/// The checks an experiment can request; each produces exactly one entry in
/// the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckRequest {
    /// Normalized mass-balance residual at time `t` below `tol`.
    MassBalance { t: f64, tol: f64 },
    /// Fitted decay (power exponent or exponential rate) of a norm within
    /// `rel_tol` of `expected`.
    DecayFit {
        norm: NormKind,
        kind: FitKindSpec,
        expected: f64,
        rel_tol: f64,
        #[serde(default)]
        window: Option<(f64, f64)>,
    },
    /// Exponential fit must beat the power fit in r² on the window.
    ExpBeatsPower {
        #[serde(default)]
        window: Option<(f64, f64)>,
    },
    /// log(‖u‖₁ + ‖u‖_∞) admits a linear lower envelope within
    /// `max_residual` of the log-range (exponential lower bound).
    LowerEnvelope {
        max_residual: f64,
        #[serde(default)]
        window: Option<(f64, f64)>,
    },
    /// Expect extinction (finite T_e) or its absence over the horizon.
    Extinction { expect: ExtinctExpect },
    /// Near-extinction rates respect the lower-bound exponents within
    /// `slack` (fitted exponent ≤ bound·(1+slack), positive stable ratio).
    ExtinctionShape { slack: f64 },
    /// Certify a gradient estimate; with `ratio_tol` absent the check is
    /// report-only (estimates with unspecified constants).
    GradientEstimate {
        id: EstimateId,
        #[serde(default)]
        delta: DeltaSpec,
        #[serde(default)]
        window: Option<(f64, f64)>,
        #[serde(default)]
        ratio_tol: Option<f64>,
    },
    /// Min excess over all nodes at time `t` is strictly positive.
    Positivity { t: f64 },
    /// Every ledger row inside the comparison box (10 eps of the ceiling).
    BoxInvariant,
    /// Max gradient never exceeds (1+ε)(1+slack) of its initial value.
    GradSup { slack: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    L1,
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKindSpec {
    Power,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtinctExpect {
    Finite,
    None,
}

/// Default δ-shift for gradient-estimate checks: the solver floor `ε^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaSpec {
    #[default]
    Floor,
    Value(f64),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Report JSON path ("-" or absent: stdout).
    #[serde(default)]
    pub report: Option<String>,
    /// Trajectory snapshot file.
    #[serde(default)]
    pub snapshot: Option<String>,
    /// Plot-data CSVs derived from the report.
    #[serde(default)]
    pub plots: Vec<PlotSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    DecayLogLog,
    MassLedger,
    ProfileEvolution,
    EstimateRatio,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("malformed experiment config")?;
        cfg.params.build()?;
        if let Some(run) = &cfg.run {
            if !(run.ext_tol_rel > 0.0 && run.ext_tol_rel < 1.0) {
                bail!("invalid field `run.ext_tol_rel`: must lie in (0,1)");
            }
            if !(run.boundary_frac > 0.0 && run.boundary_frac <= 1.0) {
                bail!("invalid field `run.boundary_frac`: must lie in (0,1]");
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_classify_config() {
        let cfg = ExperimentConfig::from_json(r#"{"params":{"p":1.5,"q":1.2,"n":1}}"#).unwrap();
        assert!(cfg.run.is_none());
        assert!(cfg.fast_decay_data);
    }

    #[test]
    fn rejects_invalid_q_naming_field() {
        let err = ExperimentConfig::from_json(r#"{"params":{"p":1.5,"q":0.0,"n":1}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("params"), "error should name the field: {err}");
    }

    #[test]
    fn rejects_unknown_fields() {
        let err = ExperimentConfig::from_json(r#"{"params":{"p":1.5,"q":1.0,"n":1},"typo":1}"#)
            .unwrap_err();
        let msg = format!("{err:#}");
        assert!(
            msg.contains("typo") || msg.contains("unknown field"),
            "{msg}"
        );
    }

    #[test]
    fn full_run_config_round_trips() {
        let text = r#"{
            "params": {"p": 1.5, "q": 0.9, "n": 1},
            "run": {
                "grid": {"geometry": "line", "l": 10.0, "m": 100},
                "solver": {
                    "t_end": 1.0,
                    "dt": {"fixed": 0.001},
                    "scheme": "semi-implicit-diffusion",
                    "observer_stride": 50,
                    "absorption": true
                },
                "datum": {"bump": {"amplitude": 1.0, "width": 2.0}},
                "checks": [
                    {"mass-balance": {"t": 1.0, "tol": 0.01}},
                    {"decay-fit": {"norm": "linf", "kind": "power", "expected": -2.0, "rel_tol": 0.15}}
                ]
            },
            "output": {"report": "out.json"}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let run = cfg.run.as_ref().unwrap();
        assert_eq!(run.checks.len(), 2);
        let params = cfg.params.build().unwrap();
        let grid = run.grid.build().unwrap();
        let solver = run.solver.build(&params, &grid).unwrap();
        assert!(solver.absorption_enabled);
        // echo round-trip
        let echoed = serde_json::to_string(&cfg).unwrap();
        let cfg2 = ExperimentConfig::from_json(&echoed).unwrap();
        assert_eq!(serde_json::to_string(&cfg2).unwrap(), echoed);
    }
}
