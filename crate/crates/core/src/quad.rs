//! Adaptive Simpson quadrature.
//!
//! Used as the deterministic side of every Monte-Carlo-vs-integral
//! cross-check in this crate: probability-of-optimality for two arms,
//! Beta-Binomial spot checks, and the expected maximum of independent
//! Beta variables. Plain adaptive Simpson with Richardson correction is
//! plenty for smooth integrands on [0, 1] at 1e-10 absolute tolerance.

use libm::fabs;

/// Default absolute tolerance used by the quadrature oracles.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 60;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Non-finite integrand values at panel endpoints are treated as 0; the
/// integrands in this crate are finite on the open interval and at worst
/// have an integrable endpoint limit.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = sanitize(f(a));
    let fb = sanitize(f(b));
    let m = 0.5 * (a + b);
    let fm = sanitize(f(m));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = sanitize(f(lm));
    let frm = sanitize(f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || fabs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
