//! Small deterministic quadrature and root-finding kernels.

use super::VerifyError;

/// Adaptive Simpson quadrature with absolute+relative tolerance.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, VerifyError> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
        return Err(VerifyError::Quadrature("non-finite integrand"));
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let width_cut = 1e-12 * (b - a).abs();
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, width_cut, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    width_cut: f64,
    depth: u32,
) -> Result<f64, VerifyError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(VerifyError::Quadrature("non-finite integrand"));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Accept on the Richardson error estimate; intervals squeezed below the
    // width cutoff (mildly singular endpoint derivatives) contribute
    // O(width^{1.5}) and are accepted as-is.
    if delta.abs() <= 15.0 * tol.max(1e-16 * whole.abs()) || (b - a).abs() <= width_cut {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(VerifyError::Quadrature("max recursion depth reached"));
    }
    let lv = simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, width_cut, depth - 1)?;
    let rv = simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, width_cut, depth - 1)?;
    Ok(lv + rv)
}

/// Bisection for a continuous function with a sign change on `[lo, hi]`.
/// Returns the midpoint of the final bracket of width at most `tol`.
pub(crate) fn bisect<F: Fn(f64) -> f64>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: u32,
) -> Result<f64, VerifyError> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return Err(VerifyError::RootFind("no sign change on the bracket"));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_on_polynomial_and_sqrt() {
        // exactly integrates cubics
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        // integrable endpoint behavior after transformation is the caller's
        // job; smooth sqrt integrates fine
        let v = adaptive_simpson(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(&|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14, 100).unwrap();
        assert!((r - 2.0f64.sqrt()).abs() < 1e-13);
        assert!(bisect(&|x: f64| x * x + 1.0, 0.0, 2.0, 1e-14, 100).is_err());
    }
}
