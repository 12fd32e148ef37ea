//! Plot-data CSV emission from a run report. Numbers use the shortest
//! round-trip decimal representation (Rust's default float formatting);
//! logarithms are natural.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::config::PlotKind;

/// The slice of a report JSON that plotting needs; other fields ignored.
#[derive(Debug, Deserialize)]
pub struct PlotReport {
    pub run: Option<PlotRun>,
}

#[derive(Debug, Deserialize)]
pub struct PlotRun {
    pub series: PlotSeries,
    pub node_positions: Vec<f64>,
    pub profiles: Vec<PlotProfile>,
    pub estimate_series: Vec<PlotEstimate>,
}

#[derive(Debug, Deserialize)]
pub struct PlotSeries {
    pub t: Vec<f64>,
    pub l1: Vec<f64>,
    pub linf: Vec<f64>,
    pub absorption_cum: Vec<f64>,
    pub boundary_cum: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct PlotProfile {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct PlotEstimate {
    pub id: String,
    pub series: Vec<PlotEstimateSample>,
}

#[derive(Debug, Deserialize)]
pub struct PlotEstimateSample {
    pub t: f64,
    pub lhs_max: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn emit_plot_data(report_json: &str, kind: PlotKind) -> Result<String> {
    let report: PlotReport = serde_json::from_str(report_json).context("malformed report JSON")?;
    let Some(run) = report.run else {
        bail!("missing series: report has no run block (classify-only experiment)");
    };
    Ok(match kind {
        PlotKind::DecayLogLog => {
            let mut out = String::from("t,l1,linf,log_t,log_linf\n");
            let s = &run.series;
            for i in 0..s.t.len() {
                let (t, l1, linf) = (s.t[i], s.l1[i], s.linf[i]);
                if t <= 0.0 || linf <= 0.0 {
                    continue;
                }
                out.push_str(&format!("{t},{l1},{linf},{},{}\n", t.ln(), linf.ln()));
            }
            out
        }
        PlotKind::MassLedger => {
            let mut out = String::from("t,l1,absorption_cum,boundary_cum,residual\n");
            let s = &run.series;
            let m0 = *s.l1.first().context("missing series: l1")?;
            for i in 0..s.t.len() {
                let residual = (s.l1[i] + s.absorption_cum[i] - m0 - s.boundary_cum[i]).abs();
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    s.t[i], s.l1[i], s.absorption_cum[i], s.boundary_cum[i], residual
                ));
            }
            out
        }
        PlotKind::ProfileEvolution => {
            if run.profiles.is_empty() {
                bail!("missing series: profiles");
            }
            let mut out = String::from("t");
            for x in &run.node_positions {
                out.push_str(&format!(",x_{x}"));
            }
            out.push('\n');
            for p in &run.profiles {
                out.push_str(&format!("{}", p.t));
                for v in &p.values {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
            out
        }
        PlotKind::EstimateRatio => {
            let est = run.estimate_series.first().context(
                "missing series: estimate_series (no gradient-estimate check was requested)",
            )?;
            let mut out = String::from("t,lhs_max,rhs,ratio\n");
            for s in &est.series {
                out.push_str(&format!("{},{},{},{}\n", s.t, s.lhs_max, s.rhs, s.ratio));
            }
            out
        }
    })
}
