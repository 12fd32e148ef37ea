//! Bernstein reaction algebra. For a change of variable `v = φ^{−1}(u)` with
//! `ϱ = 1/ψ'` (`ψ = φ^{−1}`), the squared gradient `w = |∇v|²` satisfies a
//! parabolic inequality whose reaction coefficients are
//!
//! ```text
//!     R₁ = |ϱ(u)|^{p−2} (k ϱ'(u)² − ϱ(u) ϱ''(u)),
//!     R₂ = |ϱ(u)|^{q−2} ϱ(u) ϱ'(u),
//! ```
//!
//! with `k = (2−p)[p(N+3)−2(N+1)]/(4(p−1))`. Each catalogued choice of `ϱ`
//! makes those coefficients collapse to something usable — `R₁ ≡ 1`,
//! `R₁ ≡ R₂`, an explicit lower bound, or an exact constant — and each of
//! those identities is verified here both in closed form and against a
//! five-point finite-difference oracle applied directly to `ϱ`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use super::quad::{adaptive_simpson, bisect};
use super::VerifyError;
use crate::exponents::{critical_exponents, Params, THRESHOLD_TOL};
// When std is in the crate graph (tests, or std-enabled dependents via
// feature unification) its inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use crate::num::Real;

/// The catalogued changes of variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BernsteinChoice {
    /// `ϱ(z) = (p²/(2(2k+p−2)))^{1/p} z^{2/p}` for `p > p_c`: normalizes
    /// `R₁ ≡ 1` with `R₂ ≥ 0`.
    SharpPower,
    /// `ϱ(z) = ((p−q)/(k+p−q−1))^{1/(p−q)} z^{1/(p−q)}` for `q < p/2`:
    /// balances the two reactions, `R₁ ≡ R₂`.
    BalancedPower,
    /// `ϱ(z) = z^{(N+1)/N} (log M − log z)^{(N+1)/2N}`, `M = e‖u₀‖_∞`, at
    /// `p = p_c`, `N ≥ 2`: `R₁ = (N+1)/2N + (N+1)/4N (log M − log z)^{−1}`.
    CriticalLog,
    /// `ϱ(z) = z^{(N+1)/N} (log M − log z)^{(N+1)/N}` at `p = p_c`,
    /// `q = N/(N+1)`: `R₁ = ((N+1)/N)(log M − log z)`,
    /// `R₂ = ((N+1)/N)(log M − log z − 1)`.
    CriticalLogHalf,
    /// Implicit `ϱ` solving `k(ϱ')² − ϱϱ'' = ϱ^{2−p}` for `p < p_c`
    /// (so `R₁ ≡ 1`), defined through a singular integral.
    SubcriticalImplicit,
    /// `ϱ(z) = −2(‖u₀‖_∞ − z)^{1/2}` for `q < 1`, `p > p_sc`:
    /// `R₂ = −2^{q−1} v^{q−2} < 0`, `R₁ = 2^{p−2}(1+k) v^{p−4} > 0`.
    HjSqrt,
    /// `ϱ(z) = z^{1/q}` for `q > 1`: the absorption reaction is the exact
    /// constant `R₂ = 1/q`.
    HjPower,
}

impl BernsteinChoice {
    pub const ALL: [BernsteinChoice; 7] = [
        BernsteinChoice::SharpPower,
        BernsteinChoice::BalancedPower,
        BernsteinChoice::CriticalLog,
        BernsteinChoice::CriticalLogHalf,
        BernsteinChoice::SubcriticalImplicit,
        BernsteinChoice::HjSqrt,
        BernsteinChoice::HjPower,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BernsteinChoice::SharpPower => "sharp-power",
            BernsteinChoice::BalancedPower => "balanced-power",
            BernsteinChoice::CriticalLog => "critical-log",
            BernsteinChoice::CriticalLogHalf => "critical-log-half",
            BernsteinChoice::SubcriticalImplicit => "subcritical-implicit",
            BernsteinChoice::HjSqrt => "hj-sqrt",
            BernsteinChoice::HjPower => "hj-power",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// Hand-derived `ϱ'`, `ϱ''`.
    Closed,
    /// Five-point central stencils on `ϱ` with a step scaled to `u` — the
    /// independent oracle guarding transcription errors.
    FiniteDifference,
}

/// The implicit subcritical change of variable, defined for `p < p_c`
/// (where `β := 2−p−2k > 0`) by
///
/// ```text
///     sqrt(β K₀^p / 2) ∫₀^{ϱ(r)/K₀} dz / (z^k (1 − z^β)^{1/2}) = r,
/// ```
///
/// normalized so `ϱ(‖u₀‖_∞) = K₀`, which forces `K₀ = κ ‖u₀‖_∞^{2/p}`.
/// The endpoint singularities `z^{−k}` and `(1−z^β)^{−1/2}` are removed
/// analytically by the substitutions `z = s^{1/(1−k)}` near 0 and
/// `1 − z = s²` near 1.
#[derive(Debug, Clone)]
pub struct SubcriticalRho {
    u0_inf: f64,
    k: f64,
    beta: f64,
    k0: f64,
    kappa: f64,
    full_integral: f64,
}

impl SubcriticalRho {
    pub fn new(params: &Params, u0_inf: f64) -> Result<Self, VerifyError> {
        let e = critical_exponents(params);
        let (p, k) = (params.p(), e.k);
        let beta = 2.0 - p - 2.0 * k;
        if !(e.p_c - p > THRESHOLD_TOL) {
            return Err(VerifyError::InvalidChoice(format!(
                "implicit construction needs p < p_c = {}, got p = {p}",
                e.p_c
            )));
        }
        if !(u0_inf > 0.0 && u0_inf.is_finite()) {
            return Err(VerifyError::InvalidChoice(String::from(
                "u0_inf must be positive",
            )));
        }
        debug_assert!(beta > 0.0 && k < 1.0);
        let full_integral = singular_integral(k, beta, 1.0)?;
        // sqrt(β/2) K₀^{p/2} · I(1) = ‖u₀‖_∞
        let kappa = ((2.0 / beta).sqrt() / full_integral).powf(2.0 / p);
        let k0 = kappa * u0_inf.powf(2.0 / p);
        Ok(SubcriticalRho {
            u0_inf,
            k,
            beta,
            k0,
            kappa,
            full_integral,
        })
    }

    #[inline]
    pub fn k0(&self) -> f64 {
        self.k0
    }
    /// The normalization constant `κ` in `K₀ = κ ‖u₀‖_∞^{2/p}` (no closed
    /// form; computed from the defining integral).
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Evaluate `ϱ(r)` for `r ∈ [0, ‖u₀‖_∞]` by bracketed bisection on the
    /// defining integral.
    pub fn eval(&self, r: f64) -> Result<f64, VerifyError> {
        if !(0.0..=self.u0_inf * (1.0 + 1e-12)).contains(&r) {
            return Err(VerifyError::OutOfDomain(r));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        // Target in integral units; at r = ‖u₀‖_∞ this reproduces the cached
        // full integral exactly, closing the bracket at y = 1.
        let target = self.full_integral * (r / self.u0_inf).min(1.0);
        let g = |y: f64| -> f64 {
            match singular_integral(self.k, self.beta, y) {
                Ok(v) => v - target,
                Err(_) => f64::NAN,
            }
        };
        let y = bisect(&g, 0.0, 1.0, 1e-14, 120)?;
        Ok(y * self.k0)
    }

    /// `ϱ'(r)` expressed through `ϱ` itself:
    /// `ϱ' = ϱ^k sqrt(2(K₀^β − ϱ^β)/β)`.
    pub fn deriv(&self, rho: f64) -> f64 {
        let gap = (self.k0.powf(self.beta) - rho.powf(self.beta)).max(0.0);
        rho.powf(self.k) * (2.0 * gap / self.beta).sqrt()
    }

    /// `ϱ''(r) = f'(ϱ) f(ϱ)` for `f(ϱ) = ϱ^k g(ϱ)` with
    /// `g = sqrt(2(K₀^β − ϱ^β)/β)`, using `g g' = −ϱ^{β−1}`.
    pub fn second_deriv(&self, rho: f64) -> f64 {
        let gap = (self.k0.powf(self.beta) - rho.powf(self.beta)).max(0.0);
        let g = (2.0 * gap / self.beta).sqrt();
        // f f' = k ϱ^{2k−1} g² − ϱ^{2k+β−1}
        self.k * rho.powf(2.0 * self.k - 1.0) * g * g - rho.powf(2.0 * self.k + self.beta - 1.0)
    }

    /// Empirical constant in the growth bound
    /// `ϱ(r) ≤ C K₀^{β/(2(1−k))} r^{1/(1−k)}`.
    pub fn growth_constant(&self, r: f64, rho: f64) -> f64 {
        rho / (self.k0.powf(self.beta / (2.0 * (1.0 - self.k))) * r.powf(1.0 / (1.0 - self.k)))
    }

    #[inline]
    pub fn full_integral(&self) -> f64 {
        self.full_integral
    }
}

/// `∫₀^y z^{−k} (1 − z^β)^{−1/2} dz` for `y ∈ [0, 1]`, with both endpoint
/// singularities removed by substitution.
fn singular_integral(k: f64, beta: f64, y: f64) -> Result<f64, VerifyError> {
    let tol = 1e-13;
    let split = 0.5f64.min(y);
    //ز = s^{1/(1−k)} on [0, split]: z^{−k} dz = ds/(1−k).
    let a = {
        let expo = beta / (1.0 - k);
        let f = |s: f64| -> f64 {
            let zb = s.powf(expo);
            1.0 / (1.0 - k) / (1.0 - zb).sqrt()
        };
        adaptive_simpson(&f, 0.0, split.powf(1.0 - k), tol)?
    };
    if y <= 0.5 {
        return Ok(a);
    }
    // 1 − z = s² on [split, y]: handles the (1−z^β)^{−1/2} endpoint.
    let b = {
        let f = |s: f64| -> f64 {
            if s == 0.0 {
                return 2.0 / beta.sqrt();
            }
            let one_minus_zb = -libm::expm1(beta * libm::log1p(-s * s));
            2.0 * s * (1.0 - s * s).powf(-k) / one_minus_zb.sqrt()
        };
        let s_hi = (1.0 - split).sqrt();
        let s_lo = (1.0 - y).max(0.0).sqrt();
        adaptive_simpson(&f, s_lo, s_hi, tol)?
    };
    Ok(a + b)
}

/// A catalogued change of variable bound to concrete parameters, ready to
/// evaluate and certify.
#[derive(Debug, Clone)]
pub struct Bernstein {
    choice: BernsteinChoice,
    params: Params,
    u0_inf: f64,
    k: f64,
    /// `M = e‖u₀‖_∞` for the log choices, `K₀` for the implicit one,
    /// `‖u₀‖_∞` otherwise.
    aux: f64,
    sub: Option<SubcriticalRho>,
}

impl Bernstein {
    pub fn new(choice: BernsteinChoice, params: &Params, u0_inf: f64) -> Result<Self, VerifyError> {
        let e = critical_exponents(params);
        let (p, q, n) = (params.p(), params.q(), params.n());
        let edge = params.nf() / (params.nf() + 1.0);
        let bad = |msg: String| Err(VerifyError::InvalidChoice(msg));
        match choice {
            BernsteinChoice::SharpPower => {
                if !(p - e.p_c > THRESHOLD_TOL) {
                    return bad(format!("sharp-power needs p > p_c = {}", e.p_c));
                }
            }
            BernsteinChoice::BalancedPower => {
                if !(q < p / 2.0 - THRESHOLD_TOL) {
                    return bad(format!("balanced-power needs q < p/2 = {}", p / 2.0));
                }
                if !(e.k + p - q - 1.0 > THRESHOLD_TOL) {
                    return bad(String::from("balanced-power needs k + p − q − 1 > 0"));
                }
            }
            BernsteinChoice::CriticalLog => {
                if !((p - e.p_c).abs() <= THRESHOLD_TOL && n >= 2 && q > edge + THRESHOLD_TOL) {
                    return bad(format!(
                        "critical-log needs p = p_c, N >= 2, q > N/(N+1); got p={p}, q={q}, N={n}"
                    ));
                }
            }
            BernsteinChoice::CriticalLogHalf => {
                if !((p - e.p_c).abs() <= THRESHOLD_TOL
                    && n >= 2
                    && (q - edge).abs() <= THRESHOLD_TOL)
                {
                    return bad(format!(
                        "critical-log-half needs p = p_c, N >= 2, q = N/(N+1); got p={p}, q={q}, N={n}"
                    ));
                }
            }
            BernsteinChoice::SubcriticalImplicit => {
                if !(e.p_c - p > THRESHOLD_TOL) {
                    return bad(format!("subcritical-implicit needs p < p_c = {}", e.p_c));
                }
            }
            BernsteinChoice::HjSqrt => {
                if !(q < 1.0 - THRESHOLD_TOL && p > e.p_sc + THRESHOLD_TOL) {
                    return bad(format!("hj-sqrt needs q < 1 and p > p_sc = {}", e.p_sc));
                }
            }
            BernsteinChoice::HjPower => {
                if !(q > 1.0 + THRESHOLD_TOL && p > e.p_sc + THRESHOLD_TOL) {
                    return bad(format!("hj-power needs q > 1 and p > p_sc = {}", e.p_sc));
                }
            }
        }
        if !(u0_inf > 0.0 && u0_inf.is_finite()) {
            return bad(String::from("u0_inf must be positive"));
        }
        let sub = if choice == BernsteinChoice::SubcriticalImplicit {
            Some(SubcriticalRho::new(params, u0_inf)?)
        } else {
            None
        };
        let aux = match choice {
            BernsteinChoice::CriticalLog | BernsteinChoice::CriticalLogHalf => {
                core::f64::consts::E * u0_inf
            }
            BernsteinChoice::SubcriticalImplicit => sub.as_ref().unwrap().k0(),
            _ => u0_inf,
        };
        Ok(Bernstein {
            choice,
            params: *params,
            u0_inf,
            k: e.k,
            aux,
            sub,
        })
    }

    #[inline]
    pub fn choice(&self) -> BernsteinChoice {
        self.choice
    }
    #[inline]
    pub fn params(&self) -> &Params {
        &self.params
    }
    /// `M` for log choices, `K₀` for the implicit one.
    #[inline]
    pub fn aux_constant(&self) -> f64 {
        self.aux
    }
    pub fn subcritical(&self) -> Option<&SubcriticalRho> {
        self.sub.as_ref()
    }

    /// Valid `u` interval for sampling this choice (pulled slightly inside
    /// bounded domains so the finite-difference stencil has room).
    pub fn sample_interval(&self) -> (f64, f64) {
        match self.choice {
            BernsteinChoice::SharpPower
            | BernsteinChoice::BalancedPower
            | BernsteinChoice::HjPower => (1e-3, 10.0),
            BernsteinChoice::CriticalLog | BernsteinChoice::CriticalLogHalf => {
                (1e-6 * self.u0_inf, 0.999 * self.u0_inf)
            }
            BernsteinChoice::SubcriticalImplicit => (0.02 * self.u0_inf, 0.98 * self.u0_inf),
            BernsteinChoice::HjSqrt => (1e-3 * self.u0_inf, 0.99 * self.u0_inf),
        }
    }

    /// Upper end of the domain of `ϱ` (infinite for the pure power laws).
    fn domain_hi(&self) -> f64 {
        match self.choice {
            BernsteinChoice::CriticalLog
            | BernsteinChoice::CriticalLogHalf
            | BernsteinChoice::SubcriticalImplicit
            | BernsteinChoice::HjSqrt => self.u0_inf,
            _ => f64::INFINITY,
        }
    }

    /// `ϱ(u)`.
    pub fn rho(&self, u: f64) -> Result<f64, VerifyError> {
        self.check_domain(u)?;
        let (p, q, nf) = (self.params.p(), self.params.q(), self.params.nf());
        Ok(match self.choice {
            BernsteinChoice::SharpPower => sharp_coef(p, self.k) * u.powf(2.0 / p),
            BernsteinChoice::BalancedPower => balanced_coef(p, q, self.k) * u.powf(1.0 / (p - q)),
            BernsteinChoice::CriticalLog => {
                let l = (self.aux / u).ln();
                u.powf((nf + 1.0) / nf) * l.powf((nf + 1.0) / (2.0 * nf))
            }
            BernsteinChoice::CriticalLogHalf => {
                let l = (self.aux / u).ln();
                u.powf((nf + 1.0) / nf) * l.powf((nf + 1.0) / nf)
            }
            BernsteinChoice::SubcriticalImplicit => self.sub.as_ref().unwrap().eval(u)?,
            BernsteinChoice::HjSqrt => -2.0 * (self.u0_inf - u).sqrt(),
            BernsteinChoice::HjPower => u.powf(1.0 / q),
        })
    }

    fn check_domain(&self, u: f64) -> Result<(), VerifyError> {
        let ok = match self.choice {
            BernsteinChoice::CriticalLog | BernsteinChoice::CriticalLogHalf => {
                u > 0.0 && u <= self.u0_inf * (1.0 + 1e-12)
            }
            BernsteinChoice::SubcriticalImplicit => (0.0..=self.u0_inf).contains(&u),
            BernsteinChoice::HjSqrt => u > 0.0 && u < self.u0_inf,
            _ => u > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(VerifyError::OutOfDomain(u))
        }
    }

    /// Closed-form `(ϱ, ϱ', ϱ'')`.
    fn rho_derivs(&self, u: f64) -> Result<(f64, f64, f64), VerifyError> {
        self.check_domain(u)?;
        let (p, q, nf) = (self.params.p(), self.params.q(), self.params.nf());
        Ok(match self.choice {
            BernsteinChoice::SharpPower => {
                let c = sharp_coef(p, self.k);
                let m = 2.0 / p;
                (
                    c * u.powf(m),
                    c * m * u.powf(m - 1.0),
                    c * m * (m - 1.0) * u.powf(m - 2.0),
                )
            }
            BernsteinChoice::BalancedPower => {
                let b = balanced_coef(p, q, self.k);
                let m = 1.0 / (p - q);
                (
                    b * u.powf(m),
                    b * m * u.powf(m - 1.0),
                    b * m * (m - 1.0) * u.powf(m - 2.0),
                )
            }
            BernsteinChoice::CriticalLog => {
                let l = (self.aux / u).ln();
                let a = (nf + 1.0) / (2.0 * nf);
                let rho = u.powf((nf + 1.0) / nf) * l.powf(a);
                let d1 = (nf + 1.0) / (2.0 * nf)
                    * u.powf(1.0 / nf)
                    * (2.0 * l.powf(a) - l.powf(-(nf - 1.0) / (2.0 * nf)));
                let d2 = u.powf(-(nf - 1.0) / nf)
                    * ((nf + 1.0) / (nf * nf) * l.powf(a)
                        - (nf + 1.0) * (nf + 2.0) / (2.0 * nf * nf)
                            * l.powf(-(nf - 1.0) / (2.0 * nf))
                        - (nf + 1.0) * (nf - 1.0) / (4.0 * nf * nf)
                            * l.powf(-(nf - 1.0) / (2.0 * nf) - 1.0));
                (rho, d1, d2)
            }
            BernsteinChoice::CriticalLogHalf => {
                let l = (self.aux / u).ln();
                let a = (nf + 1.0) / nf;
                let rho = u.powf(a) * l.powf(a);
                let d1 = a * u.powf(1.0 / nf) * (l.powf(a) - l.powf(1.0 / nf));
                let d2 = (nf + 1.0) / (nf * nf)
                    * u.powf(-(nf - 1.0) / nf)
                    * (l.powf(a) - (nf + 2.0) * l.powf(1.0 / nf) + l.powf(-(nf - 1.0) / nf));
                (rho, d1, d2)
            }
            BernsteinChoice::SubcriticalImplicit => {
                let sub = self.sub.as_ref().unwrap();
                let rho = sub.eval(u)?;
                (rho, sub.deriv(rho), sub.second_deriv(rho))
            }
            BernsteinChoice::HjSqrt => {
                let v = self.u0_inf - u;
                (-2.0 * v.sqrt(), v.powf(-0.5), 0.5 * v.powf(-1.5))
            }
            BernsteinChoice::HjPower => {
                let m = 1.0 / q;
                (
                    u.powf(m),
                    m * u.powf(m - 1.0),
                    m * (m - 1.0) * u.powf(m - 2.0),
                )
            }
        })
    }

    /// Five-point finite-difference `(ϱ, ϱ', ϱ'')` — the derivative oracle.
    fn rho_derivs_fd(&self, u: f64) -> Result<(f64, f64, f64), VerifyError> {
        // Step near eps^{1/6} relative to the distance from the nearest
        // singular point of ϱ, where its higher derivatives blow up:
        // u = 0 for the power and log choices, u = ‖u₀‖_∞ for the
        // square-root choice, both ends for the implicit one. Away from
        // singularities the stencil is merely kept inside the domain.
        let room = self.domain_hi() - u;
        if room.is_finite() && room < 8.0 * f64::EPSILON * u {
            return Err(VerifyError::OutOfDomain(u));
        }
        let scale = match self.choice {
            BernsteinChoice::HjSqrt => room,
            BernsteinChoice::SubcriticalImplicit => u.min(room),
            _ => u.abs(),
        };
        let mut h = 2e-3 * scale.max(1e-12);
        // keep the five-point stencil strictly inside (0, domain_hi)
        h = h.min(u / 2.5);
        if room.is_finite() {
            h = h.min(room / 2.5);
        }
        let f = |x: f64| self.rho(x);
        let f2 = f(u + 2.0 * h)?;
        let f1 = f(u + h)?;
        let f0 = f(u)?;
        let fm1 = f(u - h)?;
        let fm2 = f(u - 2.0 * h)?;
        let d1 = (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h);
        let d2 = (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
        Ok((f0, d1, d2))
    }

    /// Evaluate `(R₁, R₂)` at `u`.
    pub fn eval_r1_r2(&self, u: f64, mode: DerivativeMode) -> Result<(f64, f64), VerifyError> {
        let (rho, d1, d2) = match mode {
            DerivativeMode::Closed => self.rho_derivs(u)?,
            DerivativeMode::FiniteDifference => self.rho_derivs_fd(u)?,
        };
        let (p, q) = (self.params.p(), self.params.q());
        let r1 = rho.abs().powf(p - 2.0) * (self.k * d1 * d1 - rho * d2);
        let r2 = rho.abs().powf(q - 2.0) * rho * d1;
        Ok((r1, r2))
    }

    /// Residual of the choice's defining identity at `u` (closed form).
    fn identity_residual(&self, u: f64, r1: f64, r2: f64) -> f64 {
        let (p, q, nf) = (self.params.p(), self.params.q(), self.params.nf());
        match self.choice {
            BernsteinChoice::SharpPower => {
                let c = sharp_coef(p, self.k);
                let r2_target = (2.0 / p) * c.powf(q) * u.powf((2.0 * q - p) / p);
                (r1 - 1.0).abs().max((r2 - r2_target).abs())
            }
            BernsteinChoice::BalancedPower => {
                let b = balanced_coef(p, q, self.k);
                let target = b.powf(q) / (p - q) * u.powf((2.0 * q - p) / (p - q));
                (r1 - r2).abs().max((r1 - target).abs())
            }
            BernsteinChoice::CriticalLog => {
                let l = (self.aux / u).ln();
                let r1_target = (nf + 1.0) / (2.0 * nf) + (nf + 1.0) / (4.0 * nf) / l;
                let r2_target = (nf + 1.0) / (2.0 * nf)
                    * u.powf((q * (nf + 1.0) - nf) / nf)
                    * (2.0 * l.powf((nf + 1.0) * q / (2.0 * nf))
                        - l.powf(((nf + 1.0) * q - 2.0 * nf) / (2.0 * nf)));
                (r1 - r1_target).abs().max((r2 - r2_target).abs())
            }
            BernsteinChoice::CriticalLogHalf => {
                let l = (self.aux / u).ln();
                let r1_target = (nf + 1.0) / nf * l;
                let r2_target = (nf + 1.0) / nf * (l - 1.0);
                (r1 - r1_target).abs().max((r2 - r2_target).abs())
            }
            BernsteinChoice::SubcriticalImplicit => (r1 - 1.0).abs(),
            BernsteinChoice::HjSqrt => {
                let v = (self.u0_inf - u).sqrt();
                let r1_target = 2.0f64.powf(p - 2.0) * (1.0 + self.k) * v.powf(p - 4.0);
                let r2_target = -(2.0f64.powf(q - 1.0)) * v.powf(q - 2.0);
                (r1 - r1_target).abs().max((r2 - r2_target).abs())
            }
            BernsteinChoice::HjPower => {
                let r1_target = (self.k + q - 1.0) / (q * q) * u.powf((p - 2.0 * q) / q);
                (r2 - 1.0 / q).abs().max((r1 - r1_target).abs())
            }
        }
    }

    /// Sample the defining identity log-uniformly over the valid interval,
    /// cross-checking closed-form derivatives against the finite-difference
    /// oracle.
    pub fn certify(&self, n_samples: usize) -> Result<IdentityReport, VerifyError> {
        let (lo, hi) = self.sample_interval();
        let n = n_samples.max(2);
        let mut samples = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        let mut max_residual: f64 = 0.0;
        let mut fd_max_deviation: f64 = 0.0;
        let mut r1_min = f64::INFINITY;
        let mut r2_min = f64::INFINITY;
        let mut r2_max = f64::NEG_INFINITY;
        let (llo, lhi) = (lo.ln(), hi.ln());
        for i in 0..n {
            let u = (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp();
            let (r1, r2) = self.eval_r1_r2(u, DerivativeMode::Closed)?;
            let (r1f, r2f) = self.eval_r1_r2(u, DerivativeMode::FiniteDifference)?;
            let res = self.identity_residual(u, r1, r2);
            max_residual = max_residual.max(res);
            fd_max_deviation = fd_max_deviation.max((r1 - r1f).abs().max((r2 - r2f).abs()));
            r1_min = r1_min.min(r1);
            r2_min = r2_min.min(r2);
            r2_max = r2_max.max(r2);
            samples.push(u);
            residuals.push(res);
        }
        let passed = max_residual < 1e-6 && fd_max_deviation < 1e-4;
        Ok(IdentityReport {
            choice: String::from(self.choice.as_str()),
            p: self.params.p(),
            q: self.params.q(),
            n: self.params.n(),
            u0_inf: self.u0_inf,
            aux_constant: self.aux,
            samples,
            residuals,
            max_residual,
            fd_max_deviation,
            r1_min,
            r2_min,
            r2_max,
            passed,
        })
    }
}

fn sharp_coef(p: f64, k: f64) -> f64 {
    (p * p / (2.0 * (2.0 * k + p - 2.0))).powf(1.0 / p)
}

fn balanced_coef(p: f64, q: f64, k: f64) -> f64 {
    ((p - q) / (k + p - q - 1.0)).powf(1.0 / (p - q))
}

/// Sampled verification of a choice's defining identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub choice: String,
    pub p: f64,
    pub q: f64,
    pub n: u32,
    pub u0_inf: f64,
    /// `M = e‖u₀‖_∞` for log choices, `K₀` for the implicit one.
    pub aux_constant: f64,
    pub samples: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Largest closed-form vs finite-difference discrepancy in `R₁`/`R₂`.
    pub fd_max_deviation: f64,
    pub r1_min: f64,
    pub r2_min: f64,
    pub r2_max: f64,
    pub passed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, q: f64, n: u32) -> Params {
        Params::new(p, q, n).unwrap()
    }

    #[test]
    fn sharp_power_r1_is_one_at_u1() {
        // (p, N) = (1.5, 1): k = 0.5, c = 2.25^{2/3}; hand computation gives
        // R₁ = (4/9)·c^{3/2}·u⁰ = (4/9)·2.25 = 1 exactly.
        let b = Bernstein::new(BernsteinChoice::SharpPower, &params(1.5, 1.2, 1), 1.0).unwrap();
        let (r1, r2) = b.eval_r1_r2(1.0, DerivativeMode::Closed).unwrap();
        assert!((r1 - 1.0).abs() < 1e-12, "r1 = {r1}");
        assert!(r2 >= 0.0);
        let (r1f, _) = b.eval_r1_r2(1.0, DerivativeMode::FiniteDifference).unwrap();
        assert!((r1f - 1.0).abs() < 1e-6, "fd r1 = {r1f}");
    }

    #[test]
    fn balanced_power_r1_equals_r2() {
        let b = Bernstein::new(BernsteinChoice::BalancedPower, &params(1.5, 0.6, 1), 1.0).unwrap();
        for &u in &[1e-3, 0.03, 1.0, 7.5] {
            let (r1, r2) = b.eval_r1_r2(u, DerivativeMode::Closed).unwrap();
            assert!(
                (r1 - r2).abs() < 1e-10 * r1.abs().max(1.0),
                "u={u}: {r1} vs {r2}"
            );
        }
    }

    #[test]
    fn critical_log_lower_bound() {
        // (p, N) = (4/3, 2): R₁ = 3/4 + (3/8)/ℓ ≥ 3/4.
        let b = Bernstein::new(
            BernsteinChoice::CriticalLog,
            &params(4.0 / 3.0, 1.0, 2),
            1.0,
        )
        .unwrap();
        for &u in &[1e-5, 1e-2, 0.5, 1.0] {
            let (r1, r2) = b.eval_r1_r2(u, DerivativeMode::Closed).unwrap();
            let l = (core::f64::consts::E / u).ln();
            assert!((r1 - (0.75 + 0.375 / l)).abs() < 1e-10, "u={u}: r1={r1}");
            assert!(r1 >= 0.75 - 1e-12);
            assert!(r2 > 0.0);
        }
    }

    #[test]
    fn critical_log_half_identities() {
        let n = 2u32;
        let edge = n as f64 / (n as f64 + 1.0);
        let b = Bernstein::new(
            BernsteinChoice::CriticalLogHalf,
            &params(4.0 / 3.0, edge, n),
            2.0,
        )
        .unwrap();
        for &u in &[1e-4, 0.3, 1.9] {
            let (r1, r2) = b.eval_r1_r2(u, DerivativeMode::Closed).unwrap();
            let l = (core::f64::consts::E * 2.0 / u).ln();
            assert!((r1 - 1.5 * l).abs() < 1e-9 * l, "u={u}");
            assert!((r2 - 1.5 * (l - 1.0)).abs() < 1e-9 * l.max(1.0), "u={u}");
        }
    }

    #[test]
    fn hj_power_r2_is_inverse_q() {
        let b = Bernstein::new(BernsteinChoice::HjPower, &params(1.5, 2.0, 1), 1.0).unwrap();
        for &u in &[1e-3, 0.2, 5.0] {
            let (_, r2) = b.eval_r1_r2(u, DerivativeMode::Closed).unwrap();
            assert!((r2 - 0.5).abs() < 1e-12, "u={u}: r2={r2}");
        }
    }

    #[test]
    fn hj_sqrt_signs() {
        let b = Bernstein::new(BernsteinChoice::HjSqrt, &params(1.5, 0.7, 1), 1.0).unwrap();
        let (r1, r2) = b.eval_r1_r2(0.5, DerivativeMode::Closed).unwrap();
        assert!(r1 > 0.0);
        assert!(r2 < 0.0);
        // v = sqrt(0.5): R₂ = −2^{q−1} v^{q−2}
        let v = 0.5f64.sqrt();
        assert!((r2 + 2.0f64.powf(-0.3) * v.powf(-1.3)).abs() < 1e-10);
    }

    #[test]
    fn subcritical_rho_construction() {
        // (p, N) = (1.25, 2): k = 0.1875, β = 0.375.
        let pr = params(1.25, 0.5, 2);
        let sub = SubcriticalRho::new(&pr, 1.0).unwrap();
        // normalization: ϱ(u0) = K0 to root tolerance
        let rho_top = sub.eval(1.0).unwrap();
        assert!(
            (rho_top - sub.k0()).abs() < 1e-10 * sub.k0(),
            "normalization off: {rho_top} vs {}",
            sub.k0()
        );
        assert_eq!(sub.eval(0.0).unwrap(), 0.0);
        // strict monotonicity on a sample ladder
        let mut prev = 0.0;
        for i in 1..=20 {
            let r = i as f64 / 20.0;
            let rho = sub.eval(r).unwrap();
            assert!(rho > prev, "not increasing at r={r}");
            prev = rho;
        }
        // kappa scaling: K0(u0) = kappa·u0^{2/p}
        let sub2 = SubcriticalRho::new(&pr, 2.0).unwrap();
        assert!((sub2.k0() - sub.kappa() * 2.0f64.powf(2.0 / 1.25)).abs() < 1e-9 * sub2.k0());
    }

    #[test]
    fn invalid_choices_rejected() {
        // sharp-power needs p > p_c
        assert!(Bernstein::new(BernsteinChoice::SharpPower, &params(1.2, 1.0, 2), 1.0).is_err());
        // balanced-power needs q < p/2
        assert!(Bernstein::new(BernsteinChoice::BalancedPower, &params(1.5, 0.8, 1), 1.0).is_err());
        // critical-log needs N >= 2
        assert!(Bernstein::new(BernsteinChoice::CriticalLog, &params(1.5, 1.0, 1), 1.0).is_err());
        // implicit needs p < p_c
        assert!(Bernstein::new(
            BernsteinChoice::SubcriticalImplicit,
            &params(1.5, 1.0, 1),
            1.0
        )
        .is_err());
    }
}
