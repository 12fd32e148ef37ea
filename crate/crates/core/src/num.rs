//! Float helpers for `no_std` builds: every transcendental goes through libm.

/// Extension trait giving `f64` the transcendental methods that live in
/// `std` (not `core`), routed through libm. Whenever std is in the crate
/// graph its inherent methods shadow these, so the trait may look unused.
#[allow(dead_code)]
pub(crate) trait Real {
    fn sqrt(self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    #[inline]
    fn powf(self, e: f64) -> f64 {
        libm::pow(self, e)
    }
    #[inline]
    fn ln(self) -> f64 {
        libm::log(self)
    }
    #[inline]
    fn exp(self) -> f64 {
        libm::exp(self)
    }
}

/// Surface area of the unit sphere in `R^n`: `ω_n = 2 π^{n/2} / Γ(n/2)`.
///
/// `ω_1 = 2`, `ω_2 = 2π`, `ω_3 = 4π`. Computed with the half-integer Gamma
/// recurrence so integer dimensions are exact to rounding.
pub(crate) fn unit_sphere_area(n: u32) -> f64 {
    debug_assert!(n >= 1);
    let half = core::f64::consts::PI.sqrt();
    // gamma(n/2) via Γ(x+1) = xΓ(x) starting from Γ(1/2) = √π or Γ(1) = 1.
    let mut gamma = if n % 2 == 1 { half } else { 1.0 };
    let mut x = if n % 2 == 1 { 0.5 } else { 1.0 };
    while x + 0.5 < n as f64 / 2.0 + 0.25 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * core::f64::consts::PI.powf(n as f64 / 2.0) / gamma
}

/// Least-squares line fit. Returns `(slope, intercept, r_squared)`.
///
/// `r²` is defined as `1 − SS_res/SS_tot`; a perfect fit of constant data
/// reports `r² = 1`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = syy - slope * sxy;
    let r2 = if syy <= f64::EPSILON * (1.0 + my * my) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 2.0 * core::f64::consts::PI).abs() < 1e-13);
        assert!((unit_sphere_area(3) - 4.0 * core::f64::consts::PI).abs() < 1e-13);
        // ω_4 = 2π²
        let pi = core::f64::consts::PI;
        assert!((unit_sphere_area(4) - 2.0 * pi * pi).abs() < 1e-12);
    }

    #[test]
    fn exact_line_fit() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.5, 3.5, 5.5, 7.5];
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-14);
        assert!((intercept + 0.5).abs() < 1e-14);
        assert!((r2 - 1.0).abs() < 1e-14);
    }
}
