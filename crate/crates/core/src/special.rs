//! Log-space special functions for Beta and Beta-Binomial computations.
//!
//! Everything routes through `libm` so the crate stays `no_std`. Counts in
//! a long experiment reach 10^6 subjects, so factorial-sized quantities
//! exist only as logarithms.

use libm::{exp, fabs, lgamma, log};

/// Natural log of the Beta function B(a, b).
#[inline]
pub fn ln_beta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// Natural log of the binomial coefficient C(n, k), `k <= n`.
#[inline]
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    lgamma(n as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((n - k) as f64 + 1.0)
}

/// Beta(a, b) density at `x`.
///
/// Returns 0 outside (0, 1); at the endpoints the density of a parameter
/// below 1 diverges and the caller is expected to avoid evaluating there.
pub fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        // Continuous limits for a,b >= 1; endpoint values are never
        // weighted in the adaptive quadrature below tolerance anyway.
        if x == 0.0 && a == 1.0 {
            return b;
        }
        if x == 1.0 && b == 1.0 {
            return a;
        }
        if (x == 0.0 && a > 1.0) || (x == 1.0 && b > 1.0) {
            return 0.0;
        }
        return 0.0;
    }
    exp((a - 1.0) * log(x) + (b - 1.0) * log(1.0 - x) - ln_beta(a, b))
}

/// Regularized incomplete beta function I_x(a, b), i.e. the Beta(a, b) CDF.
///
/// Continued-fraction evaluation (Lentz), switching tails at the usual
/// pivot so the fraction converges quickly. Absolute accuracy is a few
/// ulps for the parameter ranges used here.
pub fn beta_cdf(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * log(x) + b * log(1.0 - x) - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        exp(ln_front) * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - exp(b * log(1.0 - x) + a * log(x) - ln_beta(b, a)) * beta_cont_frac(b, a, 1.0 - x) / b
    }
}

fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if fabs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if fabs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_beta_small_integers() {
        // B(1,1) = 1, B(2,3) = 1/12, B(8,4) = 1/1320
        assert!((ln_beta(1.0, 1.0)).abs() < 1e-14);
        assert!((ln_beta(2.0, 3.0) - (1.0f64 / 12.0).ln()).abs() < 1e-13);
        assert!((ln_beta(8.0, 4.0) - (1.0f64 / 1320.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_choose_matches_pascal() {
        assert!((ln_choose(5, 2) - 10.0f64.ln()).abs() < 1e-13);
        assert!((ln_choose(10, 0)).abs() < 1e-13);
        assert!((ln_choose(52, 5) - 2_598_960.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cdf_uniform_is_identity() {
        for &x in &[0.1, 0.25, 0.5, 0.9] {
            assert!((beta_cdf(1.0, 1.0, x) - x).abs() < 1e-14);
        }
    }

    #[test]
    fn cdf_known_values() {
        // Beta(2,2): CDF = 3x^2 - 2x^3
        for &x in &[0.2, 0.5, 0.8] {
            let want = 3.0 * x * x - 2.0 * x * x * x;
            assert!((beta_cdf(2.0, 2.0, x) - want).abs() < 1e-13);
        }
        // Beta(5,1): CDF = x^5
        let x: f64 = 0.7;
        assert!((beta_cdf(5.0, 1.0, x) - x.powi(5)).abs() < 1e-13);
    }

    #[test]
    fn cdf_is_monotone_and_bounded() {
        let (a, b) = (7.3, 2.1);
        let mut prev = 0.0;
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let c = beta_cdf(a, b, x);
            assert!((0.0..=1.0).contains(&c));
            assert!(c >= prev - 1e-15);
            prev = c;
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        let (a, b) = (8.0, 4.0);
        // crude Riemann check; the quadrature module does the real work
        let n = 20_000;
        let mut sum = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            sum += beta_pdf(a, b, x) / n as f64;
        }
        assert!((sum - 1.0).abs() < 1e-6);
    }
}
