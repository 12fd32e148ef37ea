//! Run reports: everything needed to reproduce, audit, and plot an
//! experiment, serialized as a single JSON document. Wall-clock time is
//! deliberately absent (reports must be byte-identical across repeated
//! runs); timing goes to stderr.

use serde::Serialize;

use gradabs_core::exponents::{CriticalExponents, RatePrediction, Regime};
use gradabs_core::functionals::{EstimateSample, ExtinctionTime, FitResult};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// Verbatim echo of the configuration (self-describing reproduction).
    pub config: ExperimentConfig,
    pub exponents: CriticalExponents,
    pub prediction: RatePrediction,
    /// Within 2% (relative) of a regime threshold without sitting exactly
    /// on it; such cells are excluded from sweep agreement statistics.
    pub near_threshold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunBlock>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunBlock {
    /// Present when the solver aborted; the report then carries the partial
    /// trajectory data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
    pub floor: f64,
    pub initial_amp: f64,
    pub steps: usize,
    pub t_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_regime: Option<Regime>,
    /// observed == predicted regime (None when no observation was possible).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
    pub evidence: RegimeEvidence,
    /// Outer excess exceeded the configured fraction of the max excess.
    pub boundary_flagged: bool,
    pub series: SeriesBlock,
    pub node_positions: Vec<f64>,
    pub profiles: Vec<ProfileRow>,
    pub checks: Vec<CheckOutcome>,
    pub estimate_series: Vec<EstimateSeriesBlock>,
}

/// Fits and detections backing the observed-regime call.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RegimeEvidence {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_power_linf: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_exp_linf: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_power_l1: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extinction: Option<ExtinctionTime>,
}

/// Time series at reporting resolution (downsampled ledger). Norms are of
/// the excess above the lift floor — the physical solution proxy.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesBlock {
    pub t: Vec<f64>,
    pub l1: Vec<f64>,
    pub linf: Vec<f64>,
    pub grad_max: Vec<f64>,
    pub absorption_cum: Vec<f64>,
    pub boundary_cum: Vec<f64>,
}

/// Excess profile at one snapshot time.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateSeriesBlock {
    pub id: String,
    pub max_ratio: f64,
    pub series: Vec<EstimateSample>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn all_checks_passed(&self) -> bool {
        match &self.run {
            None => true,
            Some(run) => run.aborted.is_none() && run.checks.iter().all(|c| c.passed),
        }
    }
}
