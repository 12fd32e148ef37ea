//! Explicit super-solutions.
//!
//! Time-only barriers: applying the gradient-inequality operator to a
//! spatially constant `W(t)` kills the elliptic and drift terms, leaving a
//! reduced ODE inequality `W'(t) + (reaction)(W) ≥ 0` once the
//! state-dependent coefficients are replaced by their worst-case bounds.
//! Two members of the catalog satisfy the reduced ODE with equality (an
//! exact coefficient cancellation); the others carry compensating constants
//! and are checked for a non-negative margin on a wide logarithmic time
//! grid.
//!
//! Stationary barriers: `A·r^{−α}` with `α = (p−q)/(q−p+1)` equalizes the
//! homogeneity of diffusion and absorption, so
//! `E(r) = −Δ_p(A r^{−α}) + |A r^{−α}|'^q ≥ 0` holds for all `r` exactly
//! when `A` clears the threshold `A₀`; at `p = p_c` the exponent `α = N`
//! makes `r^{−N}` p-harmonic and any positive amplitude works.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use super::quad::bisect;
use super::{CheckReport, VerifyError};
use crate::exponents::{critical_exponents, sigma_constants, Params, THRESHOLD_TOL};
// When std is in the crate graph (tests, or std-enabled dependents via
// feature unification) its inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use crate::num::Real;

/// The time-only barrier catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeBarrier {
    /// `W = (p(p−1)t)^{−2/p}` against `W' + 2(p−1)W^{(p+2)/2}`: exact zero.
    SharpPowerExact,
    /// `W = (2c₁)^{2/(p−q)} + (p(p−1)t/2)^{−2/p}` compensating the negative
    /// absorption reaction for `q ∈ [p/2, 1)`, `p > p_c`.
    SharpPowerShifted,
    /// `W = (2(1−q)/(p−1))^{2/(p−q)} + K t^{−2/p}` for `q < p/2`, with
    /// `K = C‖u₀‖_∞^{2(p−2q)/p(p−q)}` and the smallest admissible `C`
    /// located by bisection.
    BalancedPowerShifted,
    /// `W = ((N+1)/((N−1)t))^{2/p_c}` against `W' + ((N−1)/N)W^{(p_c+2)/2}`
    /// at `p = p_c`: exact zero.
    CriticalLogExact,
    /// `W = (2c₂)^{2/(p_c−q)} + (2(N+1)/((N−1)t))^{2/p_c}` for
    /// `q ∈ (p_c/2, 1)` at `p = p_c`.
    CriticalLogShifted,
    /// `W = (2/(N−1))^{2(N+1)/N} + ((N+1)/((N−1)t))^{(N+1)/N}` at `p = p_c`,
    /// `q = p_c/2` (worst-case log factor 1).
    CriticalLogHalfShifted,
    /// `W = K‖u₀‖_∞^{(2−q)/q} t^{−2/q}` for `q < 1`, absorption only.
    HjSubShifted,
    /// `W = ((q−1)t)^{−2/q}` against `W' + (2(q−1)/q)W^{(q+2)/2}` for
    /// `q > 1`: exact zero.
    HjPowerExact,
}

impl TimeBarrier {
    pub const ALL: [TimeBarrier; 8] = [
        TimeBarrier::SharpPowerExact,
        TimeBarrier::SharpPowerShifted,
        TimeBarrier::BalancedPowerShifted,
        TimeBarrier::CriticalLogExact,
        TimeBarrier::CriticalLogShifted,
        TimeBarrier::CriticalLogHalfShifted,
        TimeBarrier::HjSubShifted,
        TimeBarrier::HjPowerExact,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TimeBarrier::SharpPowerExact => "sharp-power-exact",
            TimeBarrier::SharpPowerShifted => "sharp-power-shifted",
            TimeBarrier::BalancedPowerShifted => "balanced-power-shifted",
            TimeBarrier::CriticalLogExact => "critical-log-exact",
            TimeBarrier::CriticalLogShifted => "critical-log-shifted",
            TimeBarrier::CriticalLogHalfShifted => "critical-log-half-shifted",
            TimeBarrier::HjSubShifted => "hj-sub-shifted",
            TimeBarrier::HjPowerExact => "hj-power-exact",
        }
    }

    pub fn exact(&self) -> bool {
        matches!(
            self,
            TimeBarrier::SharpPowerExact
                | TimeBarrier::CriticalLogExact
                | TimeBarrier::HjPowerExact
        )
    }
}

const T_GRID_LO: f64 = 1e-3;
const T_GRID_HI: f64 = 1e3;
const T_GRID_POINTS: usize = 121;

fn t_grid() -> Vec<f64> {
    (0..T_GRID_POINTS)
        .map(|i| {
            let s = i as f64 / (T_GRID_POINTS - 1) as f64;
            (T_GRID_LO.ln() + s * (T_GRID_HI / T_GRID_LO).ln()).exp()
        })
        .collect()
}

/// Check a time-only barrier against its reduced ODE (in)equality on
/// `t ∈ [10⁻³, 10³]`.
///
/// For the exact members `measured` is the max pointwise relative residual
/// (`pass` below `10⁻¹²`); for the compensated ones it is the minimum
/// margin, normalized per time by the sum of the competing terms (`pass`
/// when not below `−10⁻¹¹`).
pub fn check_time_supersolution(
    which: TimeBarrier,
    params: &Params,
    u0_inf: f64,
) -> Result<CheckReport, VerifyError> {
    if !(u0_inf > 0.0 && u0_inf.is_finite()) {
        return Err(VerifyError::InvalidChoice(String::from(
            "u0_inf must be positive",
        )));
    }
    let e = critical_exponents(params);
    let (p, q, nf) = (params.p(), params.q(), params.nf());
    let n = params.n();
    let bad = |m: String| Err(VerifyError::InvalidChoice(m));

    // (W(t), W'(t), positive reaction term(W, t)) per barrier.
    let mut details: Vec<(String, f64)> = Vec::new();
    let eval: alloc::boxed::Box<dyn Fn(f64) -> (f64, f64)> = match which {
        TimeBarrier::SharpPowerExact => {
            if !(p - e.p_c > THRESHOLD_TOL) {
                return bad(format!("needs p > p_c = {}", e.p_c));
            }
            let c = p * (p - 1.0);
            alloc::boxed::Box::new(move |t: f64| {
                let w = (c * t).powf(-2.0 / p);
                let dw = -(2.0 / p) * c.powf(-2.0 / p) * t.powf(-2.0 / p - 1.0);
                (dw, 2.0 * (p - 1.0) * w.powf((p + 2.0) / 2.0))
            })
        }
        TimeBarrier::SharpPowerShifted => {
            if !(p - e.p_c > THRESHOLD_TOL && q >= p / 2.0 - THRESHOLD_TOL && q < 1.0) {
                return bad(format!("needs p > p_c and q in [p/2, 1), got p={p}, q={q}"));
            }
            let c1 = 4.0 * (1.0 - q) / p
                * (p * p / (2.0 * (2.0 * e.k + p - 2.0))).powf(q / p)
                * u0_inf.powf((2.0 * q - p) / p);
            details.push((String::from("c1"), c1));
            let base = (2.0 * c1).powf(2.0 / (p - q));
            let c = p * (p - 1.0) / 2.0;
            alloc::boxed::Box::new(move |t: f64| {
                let w = base + (c * t).powf(-2.0 / p);
                let dw = -(2.0 / p) * c.powf(-2.0 / p) * t.powf(-2.0 / p - 1.0);
                let reaction =
                    2.0 * (p - 1.0) * w.powf((q + 2.0) / 2.0) * (w.powf((p - q) / 2.0) - c1);
                (dw, reaction)
            })
        }
        TimeBarrier::BalancedPowerShifted => {
            if !(q < p / 2.0 - THRESHOLD_TOL && e.k + p - q - 1.0 > THRESHOLD_TOL) {
                return bad(format!("needs q < p/2 with k+p−q−1 > 0, got p={p}, q={q}"));
            }
            let r2_min = ((p - q) / (e.k + p - q - 1.0)).powf(q / (p - q)) / (p - q)
                * u0_inf.powf((2.0 * q - p) / (p - q));
            let base = (2.0 * (1.0 - q) / (p - 1.0)).powf(2.0 / (p - q));
            let k_scale = u0_inf.powf(2.0 * (p - 2.0 * q) / (p * (p - q)));
            let margin_for = move |c_mult: f64| {
                let kk = c_mult * k_scale;
                move |t: f64| {
                    let w = base + kk * t.powf(-2.0 / p);
                    let dw = -(2.0 / p) * kk * t.powf(-2.0 / p - 1.0);
                    let reaction = (p - 1.0)
                        * r2_min
                        * (w.powf((p + 2.0) / 2.0)
                            + w.powf((q + 2.0) / 2.0)
                                * (w.powf((p - q) / 2.0) - 2.0 * (1.0 - q) / (p - 1.0)));
                    (dw, reaction)
                }
            };
            // Smallest admissible C on this time grid. The margin is not
            // monotone in C (for C small enough the deficient region slides
            // below the smallest grid time), so scan for the last sign
            // change and bisect inside that bracket.
            let grid = t_grid();
            let min_margin = |c_mult: f64| -> f64 {
                let f = margin_for(c_mult);
                grid.iter()
                    .map(|&t| {
                        let (dw, reaction) = f(t);
                        (dw + reaction) / (dw.abs() + reaction.abs()).max(1e-300)
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            let scan: Vec<f64> = (0..=64)
                .map(|i| (-8.0 + 16.0 * i as f64 / 64.0) * core::f64::consts::LN_10)
                .collect();
            let last_neg = scan.iter().rposition(|&lc| min_margin(lc.exp()) < 0.0);
            let c_min = match last_neg {
                Some(i) if i + 1 < scan.len() => bisect(
                    &|lc: f64| min_margin(lc.exp()),
                    scan[i],
                    scan[i + 1],
                    1e-10,
                    200,
                )
                .map(|lc| lc.exp())
                .unwrap_or(f64::NAN),
                // admissible over the whole scan: report the smallest probed C
                None => scan[0].exp(),
                Some(_) => f64::NAN,
            };
            details.push((String::from("c_min"), c_min));
            details.push((String::from("r2_min"), r2_min));
            let c_use = if c_min.is_finite() { 2.0 * c_min } else { 1.0 };
            details.push((String::from("c_used"), c_use));
            let f = margin_for(c_use);
            alloc::boxed::Box::new(f)
        }
        TimeBarrier::CriticalLogExact => {
            if !((p - e.p_c).abs() <= THRESHOLD_TOL && n >= 2) {
                return bad(format!("needs p = p_c and N >= 2, got p={p}, N={n}"));
            }
            let pc = e.p_c;
            alloc::boxed::Box::new(move |t: f64| {
                let w = ((nf + 1.0) / ((nf - 1.0) * t)).powf(2.0 / pc);
                let dw = -(2.0 / pc)
                    * ((nf + 1.0) / (nf - 1.0)).powf(2.0 / pc)
                    * t.powf(-2.0 / pc - 1.0);
                (dw, (nf - 1.0) / nf * w.powf((pc + 2.0) / 2.0))
            })
        }
        TimeBarrier::CriticalLogShifted => {
            let edge = nf / (nf + 1.0);
            if !((p - e.p_c).abs() <= THRESHOLD_TOL
                && n >= 2
                && q > edge + THRESHOLD_TOL
                && q < 1.0)
            {
                return bad(format!(
                    "needs p = p_c, N >= 2, q in (p_c/2, 1), got p={p}, q={q}, N={n}"
                ));
            }
            let pc = e.p_c;
            let xi = e.xi.expect("xi defined for q > N/(N+1)");
            let nxi = nf * xi;
            // max of ((N+1)/N) z^{1/(Nξ)} ℓ(z)^{q(N+1)/2N} over (0, u0]
            let c1 = (nf + 1.0) / nf
                * (-(nxi - 1.0) / (2.0 * nxi)).exp()
                * ((nxi + 1.0) / 2.0).powf(q * (nf + 1.0) / (2.0 * nf));
            let c2 = 2.0 * nf * (1.0 - q) * c1 / (nf - 1.0) * u0_inf.powf(1.0 / nxi);
            details.push((String::from("c2"), c2));
            let base = (2.0 * c2).powf(2.0 / (pc - q));
            let amp = (2.0 * (nf + 1.0) / (nf - 1.0)).powf(2.0 / pc);
            alloc::boxed::Box::new(move |t: f64| {
                let w = base + amp * t.powf(-2.0 / pc);
                let dw = -(2.0 / pc) * amp * t.powf(-2.0 / pc - 1.0);
                let reaction =
                    (nf - 1.0) / nf * w.powf((q + 2.0) / 2.0) * (w.powf((pc - q) / 2.0) - c2);
                (dw, reaction)
            })
        }
        TimeBarrier::CriticalLogHalfShifted => {
            let edge = nf / (nf + 1.0);
            if !((p - e.p_c).abs() <= THRESHOLD_TOL && n >= 2 && (q - edge).abs() <= THRESHOLD_TOL)
            {
                return bad(format!(
                    "needs p = p_c, N >= 2, q = N/(N+1), got p={p}, q={q}, N={n}"
                ));
            }
            let pc = e.p_c;
            let base = (2.0 / (nf - 1.0)).powf(2.0 * (nf + 1.0) / nf);
            let amp = ((nf + 1.0) / (nf - 1.0)).powf((nf + 1.0) / nf);
            alloc::boxed::Box::new(move |t: f64| {
                let w = base + amp * t.powf(-(nf + 1.0) / nf);
                let dw = -((nf + 1.0) / nf) * amp * t.powf(-(nf + 1.0) / nf - 1.0);
                // worst-case log factor 1; bracket is non-negative for W ≥ base
                let reaction =
                    2.0 / nf * ((nf - 1.0) * w.powf((pc + 2.0) / 2.0) - w.powf((q + 2.0) / 2.0));
                (dw, reaction)
            })
        }
        TimeBarrier::HjSubShifted => {
            if !(q < 1.0 - THRESHOLD_TOL && p > e.p_sc + THRESHOLD_TOL) {
                return bad(format!("needs q < 1 and p > p_sc, got p={p}, q={q}"));
            }
            // smallest admissible K: K^{q/2} = 2^{1−q}/(q(1−q)); use 2×.
            let k_half_min = 2.0f64.powf(1.0 - q) / (q * (1.0 - q));
            let kk = (2.0 * k_half_min).powf(2.0 / q);
            details.push((String::from("k_threshold"), k_half_min.powf(2.0 / q)));
            details.push((String::from("k_used"), kk));
            let coef = 2.0f64.powf(q) * (1.0 - q) * u0_inf.powf((q - 2.0) / 2.0);
            let scale = u0_inf.powf((2.0 - q) / q);
            alloc::boxed::Box::new(move |t: f64| {
                let w = kk * scale * t.powf(-2.0 / q);
                let dw = -(2.0 / q) * kk * scale * t.powf(-2.0 / q - 1.0);
                (dw, coef * w.powf((q + 2.0) / 2.0))
            })
        }
        TimeBarrier::HjPowerExact => {
            if !(q > 1.0 + THRESHOLD_TOL) {
                return bad(format!("needs q > 1, got q={q}"));
            }
            alloc::boxed::Box::new(move |t: f64| {
                let w = ((q - 1.0) * t).powf(-2.0 / q);
                let dw = -(2.0 / q) * (q - 1.0).powf(-2.0 / q) * t.powf(-2.0 / q - 1.0);
                (dw, 2.0 * (q - 1.0) / q * w.powf((q + 2.0) / 2.0))
            })
        }
    };

    let grid = t_grid();
    if which.exact() {
        // |W' + reaction| must cancel to rounding, pointwise.
        let mut worst: f64 = 0.0;
        for &t in &grid {
            let (dw, reaction) = eval(t);
            let rel = (dw + reaction).abs() / dw.abs().max(reaction.abs());
            worst = worst.max(rel);
        }
        Ok(CheckReport {
            id: String::from(which.as_str()),
            passed: worst < 1e-12,
            measured: worst,
            threshold: 1e-12,
            details,
        })
    } else {
        let mut min_margin = f64::INFINITY;
        for &t in &grid {
            let (dw, reaction) = eval(t);
            let margin = (dw + reaction) / (dw.abs() + reaction.abs()).max(1e-300);
            min_margin = min_margin.min(margin);
        }
        Ok(CheckReport {
            id: String::from(which.as_str()),
            passed: min_margin >= -1e-11,
            measured: min_margin,
            threshold: -1e-11,
            details,
        })
    }
}

/// `E(r) = −Δ_p(A r^{−α}) + |(A r^{−α})'|^q` for the radial power profile,
/// in closed form:
///
/// ```text
///     E(r) = (Aα)^{p−1} (N−1−(α+1)(p−1)) r^{−(α+1)(p−1)−1}
///          + (Aα)^q r^{−(α+1)q}.
/// ```
pub fn radial_power_excess(a_coef: f64, alpha: f64, params: &Params, r: f64) -> f64 {
    let (p, q, nf) = (params.p(), params.q(), params.nf());
    let s = a_coef * alpha;
    s.powf(p - 1.0)
        * (nf - 1.0 - (alpha + 1.0) * (p - 1.0))
        * r.powf(-(alpha + 1.0) * (p - 1.0) - 1.0)
        + s.powf(q) * r.powf(-(alpha + 1.0) * q)
}

/// Check `A·r^{−α}` (with the balance exponent `α = (p−q)/(q−p+1)`) as a
/// stationary super-solution at the given radii: `E(r) ≥ 0` should hold
/// exactly when `A ≥ A₀` and fail for small `A` (the threshold is real).
pub fn check_stationary_supersolution(
    a_coef: f64,
    params: &Params,
    radii: &[f64],
) -> Result<CheckReport, VerifyError> {
    let sigma = sigma_constants(params)?;
    if !(a_coef > 0.0 && a_coef.is_finite()) {
        return Err(VerifyError::InvalidChoice(String::from(
            "amplitude must be positive",
        )));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(VerifyError::InvalidChoice(String::from(
            "radii must be positive",
        )));
    }
    let mut details = vec![
        (String::from("alpha"), sigma.alpha),
        (String::from("a0"), sigma.a0),
        (String::from("a"), a_coef),
    ];
    // Both terms share the homogeneity degree −(α+1)q at the balance
    // exponent, so the sign of E is radius-independent; report it anyway
    // per radius as a cross-check.
    let mut min_scaled = f64::INFINITY;
    for &r in radii {
        let e = radial_power_excess(a_coef, sigma.alpha, params, r);
        details.push((format!("E({r})"), e));
        min_scaled = min_scaled.min(e * r.powf((sigma.alpha + 1.0) * params.q()));
    }
    let expected_ok = a_coef >= sigma.a0 * (1.0 - 1e-12);
    let all_nonneg = min_scaled >= -1e-12 * a_coef.max(1.0);
    Ok(CheckReport {
        id: String::from("stationary-supersolution"),
        // pass = observation matches the threshold prediction
        passed: all_nonneg == expected_ok,
        measured: min_scaled,
        threshold: 0.0,
        details,
    })
}

/// At `p = p_c` the profile `C₀ r^{−N}` is p-harmonic (the diffusion term of
/// `E` vanishes identically), so it is a stationary super-solution for every
/// `C₀ > 0` and every `q > 0`. Requires `N ≥ 2` (at `N = 1`, `p_c = 1` is
/// outside the admissible `p` range).
pub fn check_harmonic_barrier_pc(
    params: &Params,
    c0: f64,
    radii: &[f64],
) -> Result<CheckReport, VerifyError> {
    let e = critical_exponents(params);
    let p = params.p();
    if (p - e.p_c).abs() > THRESHOLD_TOL {
        return Err(VerifyError::InvalidChoice(format!(
            "requires p = p_c = {} exactly, got p = {p}",
            e.p_c
        )));
    }
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(VerifyError::InvalidChoice(String::from(
            "c0 must be positive",
        )));
    }
    let alpha = params.nf();
    let mut details = vec![
        (String::from("alpha"), alpha),
        // homogeneity degrees of the two terms
        (
            String::from("deg_diffusion"),
            -((alpha + 1.0) * (p - 1.0) + 1.0),
        ),
        (String::from("deg_absorption"), -(alpha + 1.0) * params.q()),
    ];
    let mut min_e = f64::INFINITY;
    for &r in radii {
        if !(r > 0.0 && r.is_finite()) {
            return Err(VerifyError::InvalidChoice(String::from(
                "radii must be positive",
            )));
        }
        let ev = radial_power_excess(c0, alpha, params, r);
        details.push((format!("E({r})"), ev));
        min_e = min_e.min(ev);
    }
    Ok(CheckReport {
        id: String::from("static-barrier-pc"),
        passed: min_e >= 0.0,
        measured: min_e,
        threshold: 0.0,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, q: f64, n: u32) -> Params {
        Params::new(p, q, n).unwrap()
    }

    #[test]
    fn exact_barriers_cancel_to_rounding() {
        let r = check_time_supersolution(TimeBarrier::SharpPowerExact, &params(1.5, 1.2, 1), 1.0)
            .unwrap();
        assert!(r.passed, "sharp-power-exact residual {}", r.measured);
        let r =
            check_time_supersolution(TimeBarrier::HjPowerExact, &params(1.5, 2.0, 1), 1.0).unwrap();
        assert!(r.passed, "hj-power-exact residual {}", r.measured);
        let r = check_time_supersolution(
            TimeBarrier::CriticalLogExact,
            &params(4.0 / 3.0, 1.0, 2),
            1.0,
        )
        .unwrap();
        assert!(r.passed, "critical-log-exact residual {}", r.measured);
    }

    #[test]
    fn shifted_barriers_have_nonnegative_margin() {
        for (which, p, q, n) in [
            (TimeBarrier::SharpPowerShifted, 1.5, 0.8, 1),
            (TimeBarrier::BalancedPowerShifted, 1.5, 0.6, 1),
            (TimeBarrier::CriticalLogShifted, 4.0 / 3.0, 0.8, 2),
            (TimeBarrier::CriticalLogHalfShifted, 4.0 / 3.0, 2.0 / 3.0, 2),
            (TimeBarrier::HjSubShifted, 1.5, 0.7, 1),
        ] {
            let r = check_time_supersolution(which, &params(p, q, n), 2.0).unwrap();
            assert!(
                r.passed,
                "{} margin {} at (p,q,N)=({p},{q},{n})",
                r.id, r.measured
            );
        }
    }

    #[test]
    fn balanced_barrier_reports_smallest_admissible_constant() {
        let r =
            check_time_supersolution(TimeBarrier::BalancedPowerShifted, &params(1.5, 0.6, 1), 2.0)
                .unwrap();
        let c_min = r.details.iter().find(|(k, _)| k == "c_min").unwrap().1;
        assert!(c_min.is_finite() && c_min > 0.0, "c_min = {c_min}");
        // the margin at the reported threshold itself is sign-critical:
        // slightly below fails, the doubled value passes (checked via the
        // report's own margin at c_used = 2 c_min)
        assert!(r.measured >= 0.0);
    }

    #[test]
    fn barrier_gates() {
        assert!(
            check_time_supersolution(TimeBarrier::SharpPowerExact, &params(1.2, 1.0, 2), 1.0)
                .is_err()
        );
        assert!(
            check_time_supersolution(TimeBarrier::HjPowerExact, &params(1.5, 0.8, 1), 1.0).is_err()
        );
    }

    #[test]
    fn stationary_threshold_is_sharp() {
        // (1.5, 0.75, 1): A0 = 16/3
        let pr = params(1.5, 0.75, 1);
        let radii = [0.1, 1.0, 10.0];
        let a0 = 16.0 / 3.0;
        for mult in [1.0, 2.0, 10.0] {
            let rep = check_stationary_supersolution(mult * a0, &pr, &radii).unwrap();
            assert!(rep.passed && rep.measured >= 0.0, "A = {mult}·A0: {rep:?}");
        }
        // falsification control: A0/100 must fail at r = 1
        let rep = check_stationary_supersolution(a0 / 100.0, &pr, &[1.0]).unwrap();
        assert!(rep.measured < 0.0);
        assert!(rep.passed, "sub-threshold failure is the expected outcome");

        // homogeneity: at the balance exponent both terms scale as
        // r^{−(α+1)q}, so E(r)·r^{(α+1)q} is radius-independent
        let scale_free = |r: f64| radial_power_excess(2.0 * a0, 3.0, &pr, r) * r.powf(4.0 * 0.75);
        assert!((scale_free(0.1) - scale_free(10.0)).abs() < 1e-9 * scale_free(10.0).abs());
    }

    #[test]
    fn stationary_margin_monotone_above_threshold() {
        // The scale-free margin (Aα)^q − c(Aα)^{p−1} dips below zero for
        // small A and is increasing from the threshold on; assert
        // monotonicity on a ladder A ≥ A₀.
        let pr = params(1.5, 0.75, 1);
        let a0 = 16.0 / 3.0;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=12 {
            let a = a0 * (1.0 + 0.5 * i as f64);
            let rep = check_stationary_supersolution(a, &pr, &[1.0]).unwrap();
            assert!(rep.measured >= prev, "margin not monotone at A={a}");
            prev = rep.measured;
        }
    }

    #[test]
    fn pc_barrier_examples() {
        // N = 2, p = 4/3, q = 1, C0 = 1: E(1) = (C0·N)^q = 2 > 0.
        let pr = params(4.0 / 3.0, 1.0, 2);
        let rep = check_harmonic_barrier_pc(&pr, 1.0, &[1.0]).unwrap();
        assert!(rep.passed);
        assert!((rep.measured - 2.0).abs() < 1e-10);
        // homogeneity degrees agree with hand calculus: both −(N+1)q at p_c
        let dd = rep
            .details
            .iter()
            .find(|(k, _)| k == "deg_diffusion")
            .unwrap()
            .1;
        let da = rep
            .details
            .iter()
            .find(|(k, _)| k == "deg_absorption")
            .unwrap()
            .1;
        assert!((dd + 2.0).abs() < 1e-12); // −((N+1)(p_c−1)+1) = −N = −2
        assert!((da + 3.0).abs() < 1e-12); // −(N+1)q = −3
                                           // N = 1 (p_c = 1) cannot be reached: any valid p differs from p_c.
        assert!(check_harmonic_barrier_pc(&params(1.5, 1.0, 1), 1.0, &[1.0]).is_err());
    }
}
