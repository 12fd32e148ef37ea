//! Critical exponents and large-time regime classification.
//!
//! For the equation `∂ₜu − Δ_p u + |∇u|^q = 0` with `p ∈ (1,2)`, `q > 0` on
//! `R^N`, the relevant critical quantities are
//!
//! ```text
//!     p_c  = 2N/(N+1)              mass-conservation threshold of the fast diffusion
//!     p_sc = 2(N+1)/(N+3)          sign change of the Bernstein constant k
//!     q_*  = p − N/(N+1)           diffusion/absorption balance
//!     k    = (2−p)[p(N+3) − 2(N+1)] / (4(p−1))
//!     q_1  = max{p−1, N/(N+1)}
//!     ξ    = 1/(q(N+1) − N)        (for q > N/(N+1))
//!     η    = 1/(N(p−2) + p)        (for p > p_c)
//!     θ    = (N+1)(q_* − q)/(p−q)  (for q < q_*)
//! ```
//!
//! Classification follows the known sharp picture: for fast-decaying data and
//! `p ∈ [p_c, 2)` the behavior switches, as `q` grows, from finite-time
//! extinction (`q < p/2`) through exponential decay (`q = p/2`) and fast
//! algebraic decay (`p/2 < q < q_*`) to diffusion-dominated decay
//! (`q ≥ q_*`); every `p < p_c` extinguishes. Without a decay condition on
//! the datum only the universal rates survive (`t^{−Nη}`, `t^{−Nξ}`,
//! exponential, extinction).

use serde::{Deserialize, Serialize};
use thiserror::Error;

// When std is in the crate graph (tests, or std-enabled dependents via
// feature unification) its inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use crate::num::Real;

/// Absolute tolerance for comparisons against derived thresholds
/// (`q` vs `q_*`, `q` vs `p/2`, `p` vs `p_c`, ...). Thresholds are computed,
/// not input, so a single absolute tolerance is used everywhere.
pub const THRESHOLD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentsError {
    #[error("p must lie in the open interval (1,2), got {0}")]
    InvalidP(f64),
    #[error("q must be positive and finite, got {0}")]
    InvalidQ(f64),
    #[error("dimension N must be >= 1, got {0}")]
    InvalidN(u32),
    #[error("q={q} outside the admissible interval ({lo},{hi})")]
    QOutsideInterval { q: f64, lo: f64, hi: f64 },
    #[error("requires p > p_c = {pc}, got p = {p}")]
    NeedsSupercriticalP { p: f64, pc: f64 },
}

/// The parameter triple `(p, q, N)`; the coordinate system of the lab.
///
/// Invariants `1 < p < 2`, `q > 0`, `N ≥ 1` are enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    p: f64,
    q: f64,
    n: u32,
}

impl Params {
    pub fn new(p: f64, q: f64, n: u32) -> Result<Self, ExponentsError> {
        if !(p.is_finite() && p > 1.0 && p < 2.0) {
            return Err(ExponentsError::InvalidP(p));
        }
        if !(q.is_finite() && q > 0.0) {
            return Err(ExponentsError::InvalidQ(q));
        }
        if n < 1 {
            return Err(ExponentsError::InvalidN(n));
        }
        Ok(Params { p, q, n })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }
    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }
    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }
    /// Dimension as a float, for formulas.
    #[inline]
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Same `(p, N)` with a different absorption exponent.
    pub fn with_q(&self, q: f64) -> Result<Self, ExponentsError> {
        Params::new(self.p, q, self.n)
    }
}

/// All critical exponents for a parameter triple. Optional fields are absent
/// exactly when their defining denominator is non-positive; outside their
/// domain `ξ`, `η`, `θ` have no meaning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponents {
    pub p_c: f64,
    pub p_sc: f64,
    pub q_star: f64,
    pub k: f64,
    pub q_1: f64,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    pub theta: Option<f64>,
}

/// Compute every critical exponent of `params`.
pub fn critical_exponents(params: &Params) -> CriticalExponents {
    let (p, q, n) = (params.p(), params.q(), params.nf());
    let p_c = 2.0 * n / (n + 1.0);
    let p_sc = 2.0 * (n + 1.0) / (n + 3.0);
    let q_star = p - n / (n + 1.0);
    let k = (2.0 - p) * (p * (n + 3.0) - 2.0 * (n + 1.0)) / (4.0 * (p - 1.0));
    let q_1 = (p - 1.0).max(n / (n + 1.0));

    let xi_den = q * (n + 1.0) - n;
    let xi = (xi_den > THRESHOLD_TOL).then(|| 1.0 / xi_den);
    let eta_den = n * (p - 2.0) + p;
    let eta = (eta_den > THRESHOLD_TOL).then(|| 1.0 / eta_den);
    let theta = (q_star - q > THRESHOLD_TOL).then(|| (n + 1.0) * (q_star - q) / (p - q));

    CriticalExponents {
        p_c,
        p_sc,
        q_star,
        k,
        q_1,
        xi,
        eta,
        theta,
    }
}

/// Large-time regime of a solution, in the sense of the behavior table for
/// fast-decaying initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `u > 0` forever; decay is the rate of the pure fast diffusion.
    PositivityDiffusionDecay,
    /// `u > 0` forever; absorption drives a faster algebraic decay.
    PositivityFastAlgebraic,
    /// `u > 0` forever with exponential decay of both norms (`q = p/2`).
    PositivityExponential,
    /// `u ≡ 0` after a finite extinction time.
    Extinction,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::PositivityDiffusionDecay => "positivity-diffusion-decay",
            Regime::PositivityFastAlgebraic => "positivity-fast-algebraic",
            Regime::PositivityExponential => "positivity-exponential",
            Regime::Extinction => "extinction",
        }
    }
}

/// The four universal decay cases valid for merely integrable Lipschitz data
/// (no tail condition).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayCase {
    /// `p > p_c`, `q > q_*`: `‖u(t)‖_∞ ≤ C‖u₀‖₁^{pη} t^{−Nη}`.
    I,
    /// `p > p_c`, `q ∈ (N/(N+1), q_*]`: `‖u(t)‖_∞ ≤ C‖u₀‖₁^{qξ} t^{−Nξ}`.
    Ii,
    /// `p > p_c, q = N/(N+1)` or `p = p_c, q ≥ p_c/2`: exponential decay.
    Iii,
    /// `p ≥ p_c, q < N/(N+1)` or `p < p_c`: finite-time extinction.
    Iv,
}

/// Which of the two disjoint parameter sets fired the exponential case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalBranch {
    /// `p > p_c` with `q = N/(N+1)` exactly.
    SupercriticalEdgeQ,
    /// `p = p_c` with `q ≥ p_c/2`.
    CriticalP,
}

/// Predicted asymptotics for a parameter triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePrediction {
    pub regime: Regime,
    /// Universal case (valid without any tail assumption).
    pub decay_case: DecayCase,
    /// Set when `decay_case` is the exponential case, recording which of its
    /// two disjoint parameter branches fired.
    pub critical_branch: Option<CriticalBranch>,
    /// Predicted power of `t` for `‖u(t)‖_∞`, when the regime is algebraic.
    pub linf_exponent: Option<f64>,
    /// Predicted power of `t` for `‖u(t)‖₁`, when known.
    pub l1_exponent: Option<f64>,
    /// `lim_{t→∞} ‖u(t)‖₁ > 0` iff `q > q_*`.
    pub l1_limit_positive: bool,
    /// True when the stated rates require the initial datum to satisfy the
    /// power-tail decay condition.
    pub fast_decay_data_required: bool,
}

fn universal_case(
    params: &Params,
    exps: &CriticalExponents,
) -> (DecayCase, Option<CriticalBranch>) {
    let (p, q, n) = (params.p(), params.q(), params.nf());
    let edge = n / (n + 1.0); // = p_c/2
    if p - exps.p_c > THRESHOLD_TOL {
        if q - exps.q_star > THRESHOLD_TOL {
            (DecayCase::I, None)
        } else if q - edge > THRESHOLD_TOL {
            (DecayCase::Ii, None)
        } else if (q - edge).abs() <= THRESHOLD_TOL {
            (DecayCase::Iii, Some(CriticalBranch::SupercriticalEdgeQ))
        } else {
            (DecayCase::Iv, None)
        }
    } else if (p - exps.p_c).abs() <= THRESHOLD_TOL {
        if q - edge >= -THRESHOLD_TOL {
            (DecayCase::Iii, Some(CriticalBranch::CriticalP))
        } else {
            (DecayCase::Iv, None)
        }
    } else {
        (DecayCase::Iv, None)
    }
}

/// Classify `(p, q, N)` into its predicted large-time regime.
///
/// With `fast_decay_data` set the prediction assumes the datum satisfies the
/// sharp power-tail condition and returns the full regime table; without it
/// only the universal rates are claimed.
pub fn classify(params: &Params, fast_decay_data: bool) -> RatePrediction {
    let exps = critical_exponents(params);
    let (p, q, n) = (params.p(), params.q(), params.nf());
    let (decay_case, critical_branch) = universal_case(params, &exps);
    let l1_limit_positive = q - exps.q_star > THRESHOLD_TOL;

    if fast_decay_data {
        // Regime table for data with the sharp tail decay.
        if exps.p_c - p > THRESHOLD_TOL {
            return RatePrediction {
                regime: Regime::Extinction,
                decay_case,
                critical_branch,
                linf_exponent: None,
                l1_exponent: None,
                l1_limit_positive,
                fast_decay_data_required: false,
            };
        }
        let half = p / 2.0;
        if half - q > THRESHOLD_TOL {
            // q < p/2: extinction, driven by the absorption.
            RatePrediction {
                regime: Regime::Extinction,
                decay_case,
                critical_branch,
                linf_exponent: None,
                l1_exponent: None,
                l1_limit_positive,
                fast_decay_data_required: true,
            }
        } else if (q - half).abs() <= THRESHOLD_TOL {
            RatePrediction {
                regime: Regime::PositivityExponential,
                decay_case,
                critical_branch,
                linf_exponent: None,
                l1_exponent: None,
                l1_limit_positive,
                fast_decay_data_required: true,
            }
        } else if exps.q_star - q > THRESHOLD_TOL {
            // p/2 < q < q_*: fast algebraic decay.
            RatePrediction {
                regime: Regime::PositivityFastAlgebraic,
                decay_case,
                critical_branch,
                linf_exponent: Some(-(p - q) / (2.0 * q - p)),
                l1_exponent: Some(-(n + 1.0) * (exps.q_star - q) / (2.0 * q - p)),
                l1_limit_positive,
                fast_decay_data_required: true,
            }
        } else {
            // q >= q_*: the diffusion sets the rate.
            RatePrediction {
                regime: Regime::PositivityDiffusionDecay,
                decay_case,
                critical_branch,
                linf_exponent: exps.eta.map(|eta| -n * eta),
                l1_exponent: None,
                l1_limit_positive,
                fast_decay_data_required: false,
            }
        }
    } else {
        let (regime, linf_exponent) = match decay_case {
            DecayCase::I => (
                Regime::PositivityDiffusionDecay,
                exps.eta.map(|eta| -n * eta),
            ),
            DecayCase::Ii => (Regime::PositivityFastAlgebraic, exps.xi.map(|xi| -n * xi)),
            DecayCase::Iii => (Regime::PositivityExponential, None),
            DecayCase::Iv => (Regime::Extinction, None),
        };
        RatePrediction {
            regime,
            decay_case,
            critical_branch,
            linf_exponent,
            l1_exponent: None,
            l1_limit_positive,
            fast_decay_data_required: false,
        }
    }
}

/// Tail exponent and threshold amplitude of the stationary radial
/// super-solution `A·|x|^{−α}`, valid for `p > p_c` and `q ∈ (p−1, q_*)`:
///
/// ```text
///     α  = (p−q)/(q−p+1)
///     A₀ = ((q−p+1)/(p−q)) · ((N(p−1) − q(N−1))/(q−p+1))^{1/(q−p+1)}
/// ```
///
/// `A·|x|^{−α}` is a stationary super-solution away from the origin exactly
/// when `A ≥ A₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaConstants {
    pub alpha: f64,
    pub a0: f64,
}

pub fn sigma_constants(params: &Params) -> Result<SigmaConstants, ExponentsError> {
    let exps = critical_exponents(params);
    let (p, q, n) = (params.p(), params.q(), params.nf());
    if p - exps.p_c <= THRESHOLD_TOL {
        return Err(ExponentsError::NeedsSupercriticalP { p, pc: exps.p_c });
    }
    if !(q > p - 1.0 + THRESHOLD_TOL && q < exps.q_star - THRESHOLD_TOL) {
        return Err(ExponentsError::QOutsideInterval {
            q,
            lo: p - 1.0,
            hi: exps.q_star,
        });
    }
    let s = q - p + 1.0; // > 0 here
    let alpha = (p - q) / s;
    let a0 = (s / (p - q)) * ((n * (p - 1.0) - q * (n - 1.0)) / s).powf(1.0 / s);
    Ok(SigmaConstants { alpha, a0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, q: f64, n: u32) -> Params {
        Params::new(p, q, n).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(matches!(
            Params::new(1.0, 1.0, 1),
            Err(ExponentsError::InvalidP(_))
        ));
        assert!(matches!(
            Params::new(2.0, 1.0, 1),
            Err(ExponentsError::InvalidP(_))
        ));
        assert!(matches!(
            Params::new(1.5, 0.0, 1),
            Err(ExponentsError::InvalidQ(_))
        ));
        assert!(matches!(
            Params::new(1.5, -0.1, 2),
            Err(ExponentsError::InvalidQ(_))
        ));
        assert!(matches!(
            Params::new(1.5, 1.0, 0),
            Err(ExponentsError::InvalidN(0))
        ));
    }

    #[test]
    fn worked_exponents_n2() {
        let e = critical_exponents(&params(1.5, 1.0, 2));
        assert!((e.p_c - 4.0 / 3.0).abs() < 1e-15);
        assert!((e.p_sc - 1.2).abs() < 1e-15);
        assert!((e.q_star - 5.0 / 6.0).abs() < 1e-15);
        assert!((e.k - 0.375).abs() < 1e-15);
        assert!((e.q_1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.eta.unwrap() - 2.0).abs() < 1e-12);
        assert!((e.xi.unwrap() - 1.0).abs() < 1e-12);
        // q = 1 > q_* = 5/6, so θ is not defined.
        assert!(e.theta.is_none());
    }

    #[test]
    fn worked_exponents_n1() {
        let e = critical_exponents(&params(1.5, 0.75, 1));
        assert!((e.q_star - 1.0).abs() < 1e-15);
        assert!((e.xi.unwrap() - 2.0).abs() < 1e-12);
        assert!((e.eta.unwrap() - 1.0).abs() < 1e-12);
        assert!((e.theta.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((e.q_1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_branch_identities() {
        // At q = p/2 the product identities q·ξ·θ = 1 and N·ξ·θ = 2N/p hold.
        let pr = params(1.5, 0.75, 1);
        let e = critical_exponents(&pr);
        let (xi, theta) = (e.xi.unwrap(), e.theta.unwrap());
        assert!((pr.q() * xi * theta - 1.0).abs() < 1e-12);
        assert!((pr.nf() * xi * theta - 2.0 * pr.nf() / pr.p()).abs() < 1e-12);
    }

    #[test]
    fn classify_table_cases() {
        // p < p_c: extinction regardless of the tail flag.
        let pred = classify(&params(1.2, 1.5, 2), true);
        assert_eq!(pred.regime, Regime::Extinction);
        assert_eq!(pred.decay_case, DecayCase::Iv);
        let pred = classify(&params(1.2, 1.5, 2), false);
        assert_eq!(pred.regime, Regime::Extinction);

        // q = p/2 exactly: its own column.
        let pred = classify(&params(1.5, 0.75, 1), true);
        assert_eq!(pred.regime, Regime::PositivityExponential);
        assert!(pred.fast_decay_data_required);

        // q > q_*: diffusion decay with exponent −Nη.
        let pred = classify(&params(1.5, 1.2, 1), true);
        assert_eq!(pred.regime, Regime::PositivityDiffusionDecay);
        assert!((pred.linf_exponent.unwrap() + 1.0).abs() < 1e-12);
        assert!(pred.l1_limit_positive);
        let pred = classify(&params(1.5, 1.2, 1), false);
        assert_eq!(pred.regime, Regime::PositivityDiffusionDecay);
        assert!((pred.linf_exponent.unwrap() + 1.0).abs() < 1e-12);

        // Universal case ii: exponent −Nξ = −5 at (1.5, 0.6, 1).
        let pred = classify(&params(1.5, 0.6, 1), false);
        assert_eq!(pred.decay_case, DecayCase::Ii);
        assert!((pred.linf_exponent.unwrap() + 5.0).abs() < 1e-12);
        // Same parameters with the tail flag: extinction.
        let pred = classify(&params(1.5, 0.6, 1), true);
        assert_eq!(pred.regime, Regime::Extinction);
        assert!(pred.fast_decay_data_required);
    }

    #[test]
    fn classify_fast_algebraic_exponents() {
        // p/2 < q < q_*: x-rates −(p−q)/(2q−p) and −(N+1)(q_*−q)/(2q−p).
        let pred = classify(&params(1.5, 0.9, 1), true);
        assert_eq!(pred.regime, Regime::PositivityFastAlgebraic);
        assert!((pred.linf_exponent.unwrap() + 2.0).abs() < 1e-12);
        assert!((pred.l1_exponent.unwrap() + 2.0 / 3.0).abs() < 1e-12);
        assert!(!pred.l1_limit_positive);
    }

    #[test]
    fn critical_branch_marker() {
        let pred = classify(&params(1.5, 0.5, 1), false);
        assert_eq!(pred.decay_case, DecayCase::Iii);
        assert_eq!(
            pred.critical_branch,
            Some(CriticalBranch::SupercriticalEdgeQ)
        );
        // p = p_c = 1.5 at N = 3.
        let pred = classify(&params(1.5, 1.0, 3), false);
        assert_eq!(pred.decay_case, DecayCase::Iii);
        assert_eq!(pred.critical_branch, Some(CriticalBranch::CriticalP));
    }

    #[test]
    fn sigma_constants_worked_values() {
        let s = sigma_constants(&params(1.5, 0.75, 1)).unwrap();
        assert!((s.alpha - 3.0).abs() < 1e-12);
        assert!((s.a0 - 16.0 / 3.0).abs() < 1e-12);
        // q <= p−1 is out of domain.
        assert!(matches!(
            sigma_constants(&params(1.5, 0.4, 1)),
            Err(ExponentsError::QOutsideInterval { .. })
        ));
        // q >= q_* is out of domain.
        assert!(sigma_constants(&params(1.5, 1.1, 1)).is_err());
    }

    #[test]
    fn q1_below_half_p_in_supercritical_range() {
        for &(p, n) in &[(1.4, 1u32), (1.5, 1), (1.7, 2), (1.9, 3)] {
            let pr = params(p, 1.0, n);
            let e = critical_exponents(&pr);
            if p > e.p_c {
                assert!(e.q_1 < p / 2.0, "q_1 >= p/2 at p={p}, N={n}");
            }
        }
    }
}
