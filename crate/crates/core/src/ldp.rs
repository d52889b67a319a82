//! Large-deviations machinery for fixed-budget identification.
//!
//! The probability of misidentifying the best arm under a static
//! allocation ρ decays exponentially, with per-arm rate
//!
//! ```text
//! G_j(ρ₁, ρ_j) = min_{x ∈ [θ_j, θ₁]}  ρ₁·d(x, θ₁) + ρ_j·d(x, θ_j)
//! ```
//!
//! where d is the Bernoulli KL divergence (Glynn & Juneja 2004). The
//! solver here maximizes the worst-case rate Γ = min_j G_j over
//! allocations constrained to give the best arm exactly half the budget —
//! the share exploration sampling converges to — which fixes ρ₁ = 1/2 and
//! leaves a monotone feasibility problem solved by nested bisection.
//!
//! The module also evaluates the quantities that bound how good any such
//! rate can be across an instance family: the problem complexity H(θ),
//! the Pinsker lower bound Γ* ≥ 1/(4H), and the Carpentier–Locatelli
//! fixed-budget bound whose exponent caps the achievable rate at
//! (C / log k)·Γ* with C = 800 over their hard family.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};

use crate::model::Instance;
use crate::{Error, Result};

/// Constant in the exponent of the Carpentier–Locatelli Theorem 2 bound.
pub const CL_INNER_CONSTANT: f64 = 200.0;

/// Constant C in the rate cap (C / log k)·Γ* that results from chaining
/// the Pinsker bound through the Carpentier–Locatelli bound.
pub const RATE_CAP_CONSTANT: f64 = 800.0;

/// Bernoulli KL divergence d(p, q) = p·log(p/q) + (1−p)·log((1−p)/(1−q)).
///
/// `p` may sit on the boundary (0·log 0 = 0); `q` may not, since the
/// divergence is infinite there.
pub fn bernoulli_kl(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { arm: 0, value: p });
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DivergentReference { q });
    }
    let mut kl = 0.0;
    if p > 0.0 {
        kl += p * log(p / q);
    }
    if p < 1.0 {
        kl += (1.0 - p) * log((1.0 - p) / (1.0 - q));
    }
    // Clamp the tiny negative noise from cancellation at p ≈ q.
    Ok(kl.max(0.0))
}

#[inline]
fn logit(x: f64) -> f64 {
    log(x / (1.0 - x))
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

fn check_rate_args(rho1: f64, rhoj: f64, theta1: f64, thetaj: f64) -> Result<()> {
    if !(theta1 > 0.0 && theta1 < 1.0 && thetaj > 0.0 && thetaj < 1.0 && theta1 > thetaj) {
        return Err(Error::ThetaOrderViolated { theta1, thetaj });
    }
    if rho1 < 0.0 {
        return Err(Error::NonPositiveParameter {
            name: "rho1",
            value: rho1,
        });
    }
    if rhoj < 0.0 {
        return Err(Error::NonPositiveParameter {
            name: "rhoj",
            value: rhoj,
        });
    }
    Ok(())
}

/// Interior minimizer x* of ρ₁·d(x, θ₁) + ρ_j·d(x, θ_j) over [θ_j, θ₁].
///
/// Stationarity gives logit(x*) as the ρ-weighted average of the two
/// logits, so x* is available in closed form. With ρ₁ = ρ_j = 0 every
/// point is a minimizer and θ_j is returned.
pub fn rate_g_minimizer(rho1: f64, rhoj: f64, theta1: f64, thetaj: f64) -> Result<f64> {
    check_rate_args(rho1, rhoj, theta1, thetaj)?;
    // With one weight zero the single remaining KL term attains 0 at its
    // own reference point; return it exactly rather than round-tripping
    // through logits.
    if rho1 == 0.0 {
        return Ok(thetaj);
    }
    if rhoj == 0.0 {
        return Ok(theta1);
    }
    let z = (rho1 * logit(theta1) + rhoj * logit(thetaj)) / (rho1 + rhoj);
    let x = sigmoid(z);
    Ok(x.clamp(thetaj, theta1))
}

/// Pairwise large-deviations rate G_j(ρ₁, ρ_j) for means θ₁ > θ_j.
pub fn rate_g(rho1: f64, rhoj: f64, theta1: f64, thetaj: f64) -> Result<f64> {
    let x = rate_g_minimizer(rho1, rhoj, theta1, thetaj)?;
    if rho1 == 0.0 || rhoj == 0.0 {
        return Ok(0.0);
    }
    Ok(rho1 * bernoulli_kl(x, theta1)? + rhoj * bernoulli_kl(x, thetaj)?)
}

/// Solution of the constrained rate-optimization program.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSolution {
    /// Optimal worst-case decay rate Γ* (nats per subject), under the
    /// constraint that the best arm's share is fixed at 1/2.
    pub gamma_star: f64,
    /// Optimal allocation over arms in input order; `rho[best] = 1/2`.
    pub rho: Vec<f64>,
    /// Per-suboptimal-arm slack G_j(1/2, ρ_j) − Γ*, paired with the arm
    /// index; all entries are zero up to the solver tolerance.
    pub residuals: Vec<(usize, f64)>,
}

/// Maximize Γ subject to G_j(ρ₁, ρ_j) ≥ Γ for every suboptimal arm,
/// Σρ = 1, ρ_best = 1/2, ρ_j ≥ 0.
///
/// G_j(1/2, ·) is continuous and strictly increasing, so the minimal
/// share ρ_j(Γ) reaching a target rate Γ is a bisection, and feasibility
/// of Γ reduces to Σ_j ρ_j(Γ) ≤ 1/2 — monotone in Γ, hence a second,
/// outer bisection. Both bisections run to floating-point exhaustion
/// (they are cheap); `tol` is the guarantee checked on the way out, not
/// the step size. With two arms the constraints pin ρ = (1/2, 1/2) and
/// Γ* = G₂(1/2, 1/2) directly.
pub fn solve_gamma_star(instance: &Instance, tol: f64) -> GammaSolution {
    let k = instance.k();
    let best = instance.best_arm();
    let theta1 = instance.theta()[best];
    let subs: Vec<usize> = (0..k).filter(|&d| d != best).collect();

    let g_at = |j: usize, rho: f64| -> f64 {
        rate_g(0.5, rho, theta1, instance.theta()[j]).expect("validated instance")
    };

    // Γ can never exceed the rate either arm achieves with the whole
    // remaining half-budget.
    let gamma_ub = subs
        .iter()
        .map(|&j| g_at(j, 0.5))
        .fold(f64::INFINITY, f64::min);

    // Minimal share reaching rate `gamma` for suboptimal arm j.
    let rho_for = |j: usize, gamma: f64| -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if g_at(j, mid) >= gamma {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let gamma_star;
    let mut shares: Vec<f64>;
    if k == 2 {
        gamma_star = gamma_ub;
        shares = alloc::vec![0.5];
    } else {
        let (mut lo, mut hi) = (0.0f64, gamma_ub);
        for _ in 0..110 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let sum: f64 = subs.iter().map(|&j| rho_for(j, mid)).sum();
            if sum <= 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        gamma_star = lo;
        shares = subs.iter().map(|&j| rho_for(j, gamma_star)).collect();
        // Spread the bisection slack so the shares sum to exactly 1/2.
        let sum: f64 = shares.iter().sum();
        if sum > 0.0 {
            for s in shares.iter_mut() {
                *s *= 0.5 / sum;
            }
        }
    }

    let mut rho = alloc::vec![0.0f64; k];
    rho[best] = 0.5;
    for (&j, &s) in subs.iter().zip(&shares) {
        rho[j] = s;
    }
    let residuals: Vec<(usize, f64)> = subs
        .iter()
        .map(|&j| (j, g_at(j, rho[j]) - gamma_star))
        .collect();
    debug_assert!(residuals.iter().all(|&(_, r)| r >= -tol));
    GammaSolution {
        gamma_star,
        rho,
        residuals,
    }
}

/// Problem complexity H(θ) = Σ_{d ≠ best} 1/gap(d)².
pub fn complexity_h(instance: &Instance) -> f64 {
    let best = instance.best_arm();
    (0..instance.k())
        .filter(|&d| d != best)
        .map(|d| {
            let gap = instance.gap(d);
            1.0 / (gap * gap)
        })
        .sum()
}

/// Pinsker lower bound on the optimal rate: Γ*(θ) ≥ 1 / (4·H(θ)).
pub fn pinsker_bound(instance: &Instance) -> f64 {
    1.0 / (4.0 * complexity_h(instance))
}

/// Log of the Carpentier–Locatelli fixed-budget regret bound:
///
/// ```text
/// log[(1/6k)·exp(−200·T/((log k)·H) + 2·√(T·log(6·T·k)))]
///   = −log(6k) − 200·T/((log k)·H) + 2·√(T·log(6·T·k))
/// ```
///
/// Kept in log space; for small T the bound exceeds 1 (it only binds a
/// probability-weighted regret asymptotically) and is reported unclamped.
pub fn cl_regret_bound_log(k: usize, t: u64, h: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::TooFewArms { k });
    }
    if t == 0 {
        return Err(Error::ZeroParameter { name: "t" });
    }
    if h.is_nan() || h <= 0.0 {
        return Err(Error::NonPositiveParameter {
            name: "h",
            value: h,
        });
    }
    let kf = k as f64;
    let tf = t as f64;
    Ok(-log(6.0 * kf) - CL_INNER_CONSTANT * tf / (log(kf) * h)
        + 2.0 * sqrt(tf * log(6.0 * tf * kf)))
}

/// Side-by-side rate diagnostics for one instance and budget.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityReport {
    /// Problem complexity H(θ).
    pub h: f64,
    /// Pinsker lower bound 1/(4H) on Γ*.
    pub pinsker_bound: f64,
    /// Optimal constrained rate Γ* (best-arm share fixed at 1/2).
    pub gamma_star: f64,
    /// Log of the Carpentier–Locatelli regret bound at budget T.
    pub cl_bound_log: f64,
    /// The decay rate claimed optimal for exploration sampling: Γ* itself.
    pub kasy_rate: f64,
    /// Fastest decay rate the hard-family bound permits: (800/log k)·Γ*.
    /// For small k this exceeds Γ* (the cap only binds once log k > 800).
    pub capped_rate: f64,
    /// kasy_rate / capped_rate = log(k)/800; grows with k, shrinking the
    /// permitted rate relative to the claimed one.
    pub exponent_ratio: f64,
}

/// Assemble the rate comparison for an instance at budget `t` waves.
pub fn bound_report(instance: &Instance, t: u64) -> Result<ComplexityReport> {
    let k = instance.k();
    let h = complexity_h(instance);
    let gamma = solve_gamma_star(instance, 1e-9);
    let cl_bound_log = cl_regret_bound_log(k, t, h)?;
    let log_k = log(k as f64);
    Ok(ComplexityReport {
        h,
        pinsker_bound: pinsker_bound(instance),
        gamma_star: gamma.gamma_star,
        cl_bound_log,
        kasy_rate: gamma.gamma_star,
        capped_rate: RATE_CAP_CONSTANT / log_k * gamma.gamma_star,
        exponent_ratio: log_k / RATE_CAP_CONSTANT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    // Reference values computed independently with 50-digit arithmetic.
    const KL_HALF_QUARTER: f64 = 0.143_841_036_225_890_46;
    const RATE_G_EXAMPLE: f64 = 0.067_372_481_989_948_91;
    const RATE_G_EXAMPLE_X: f64 = 0.786_061_230_866_018_6;
    const CL_BOUND_EXAMPLE: f64 = -168.983_446_191_632;

    #[test]
    fn kl_examples() {
        assert_eq!(bernoulli_kl(0.5, 0.5).unwrap(), 0.0);
        assert!((bernoulli_kl(0.5, 0.25).unwrap() - KL_HALF_QUARTER).abs() < 1e-15);
        assert!((bernoulli_kl(0.0, 0.5).unwrap() - 2.0f64.ln()).abs() < 1e-15);
        assert!((bernoulli_kl(1.0, 0.5).unwrap() - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn kl_rejects_divergent_reference() {
        assert!(matches!(
            bernoulli_kl(0.5, 0.0),
            Err(Error::DivergentReference { .. })
        ));
        assert!(matches!(
            bernoulli_kl(0.5, 1.0),
            Err(Error::DivergentReference { .. })
        ));
        assert!(bernoulli_kl(-0.1, 0.5).is_err());
        assert!(bernoulli_kl(1.1, 0.5).is_err());
    }

    #[test]
    fn kl_nonnegative_zero_iff_equal() {
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            for j in 1..20 {
                let q = j as f64 / 20.0;
                let kl = bernoulli_kl(p, q).unwrap();
                assert!(kl >= 0.0);
                if p == q {
                    assert_eq!(kl, 0.0);
                } else {
                    assert!(kl > 0.0, "p={p} q={q}");
                }
            }
        }
    }

    #[test]
    fn kl_convex_in_p() {
        let q = 0.3;
        let h = 0.01;
        for i in 1..99 {
            let p = i as f64 / 100.0;
            let second_diff = bernoulli_kl(p - h, q).unwrap() - 2.0 * bernoulli_kl(p, q).unwrap()
                + bernoulli_kl(p + h, q).unwrap();
            assert!(second_diff >= -1e-9, "p={p}");
        }
    }

    #[test]
    fn rate_g_reference_point() {
        let g = rate_g(0.5, 0.5, 0.9, 0.6).unwrap();
        assert!((g - RATE_G_EXAMPLE).abs() < 1e-12, "{g}");
        let x = rate_g_minimizer(0.5, 0.5, 0.9, 0.6).unwrap();
        assert!((x - RATE_G_EXAMPLE_X).abs() < 1e-12, "{x}");
    }

    #[test]
    fn rate_g_zero_weights() {
        // Only the j-term remains; its minimum over the interval is 0.
        assert_eq!(rate_g(0.0, 1.0, 0.9, 0.6).unwrap(), 0.0);
        assert_eq!(rate_g(1.0, 0.0, 0.9, 0.6).unwrap(), 0.0);
        assert_eq!(rate_g(0.0, 0.0, 0.9, 0.6).unwrap(), 0.0);
    }

    #[test]
    fn rate_g_vanishes_with_the_gap() {
        let g = rate_g(0.5, 0.5, 0.6 + 1e-9, 0.6).unwrap();
        assert!(g >= 0.0 && g < 1e-12, "{g}");
    }

    #[test]
    fn rate_g_rejects_bad_arguments() {
        assert!(rate_g(0.5, 0.5, 0.6, 0.9).is_err());
        assert!(rate_g(0.5, 0.5, 0.9, 0.9).is_err());
        assert!(rate_g(-0.1, 0.5, 0.9, 0.6).is_err());
        assert!(rate_g(0.5, 0.5, 1.0, 0.6).is_err());
    }

    #[test]
    fn rate_g_monotone_in_shares() {
        let (t1, tj) = (0.8, 0.45);
        let mut prev = 0.0;
        for i in 0..=40 {
            let rho = i as f64 / 40.0;
            let g = rate_g(0.5, rho, t1, tj).unwrap();
            assert!(g >= prev - 1e-14);
            prev = g;
        }
        let mut prev = 0.0;
        for i in 0..=40 {
            let rho1 = i as f64 / 40.0;
            let g = rate_g(rho1, 0.3, t1, tj).unwrap();
            assert!(g >= prev - 1e-14);
            prev = g;
        }
    }

    #[test]
    fn gamma_two_arms_is_forced() {
        let inst = Instance::new(vec![0.9, 0.6]).unwrap();
        let sol = solve_gamma_star(&inst, 1e-9);
        assert_eq!(sol.rho, vec![0.5, 0.5]);
        assert!((sol.gamma_star - RATE_G_EXAMPLE).abs() < 1e-12);
        assert_eq!(sol.residuals.len(), 1);
        assert!(sol.residuals[0].1.abs() < 1e-12);
    }

    #[test]
    fn gamma_symmetric_suboptimal_arms_split_evenly() {
        let inst = Instance::new(vec![0.5, 0.3, 0.3 - 1e-6]).unwrap();
        let sol = solve_gamma_star(&inst, 1e-9);
        assert!((sol.rho[1] - 0.25).abs() < 1e-3, "{:?}", sol.rho);
        assert!((sol.rho[2] - 0.25).abs() < 1e-3, "{:?}", sol.rho);
    }

    #[test]
    fn gamma_solution_is_consistent() {
        let inst = Instance::new(vec![0.9, 0.6, 0.3]).unwrap();
        let sol = solve_gamma_star(&inst, 1e-9);
        assert!(sol.gamma_star > 0.0);
        let total: f64 = sol.rho.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
        assert_eq!(sol.rho[inst.best_arm()], 0.5);
        for &(_, r) in &sol.residuals {
            assert!(r.abs() < 1e-9, "{:?}", sol.residuals);
        }
        // The harder (closer) arm needs the bigger share.
        assert!(sol.rho[1] > sol.rho[2]);
    }

    #[test]
    fn gamma_permutation_equivariant() {
        let base = Instance::new(vec![0.9, 0.6, 0.3]).unwrap();
        let permuted = Instance::new(vec![0.3, 0.9, 0.6]).unwrap();
        let a = solve_gamma_star(&base, 1e-9);
        let b = solve_gamma_star(&permuted, 1e-9);
        assert!((a.gamma_star - b.gamma_star).abs() < 1e-12);
        // base arm d sits at permuted position (d + 1) % 3
        for d in 0..3 {
            assert!((a.rho[d] - b.rho[(d + 1) % 3]).abs() < 1e-9);
        }
    }

    #[test]
    fn complexity_examples() {
        let h = complexity_h(&Instance::new(vec![0.5, 0.25]).unwrap());
        assert_eq!(h, 16.0);
        let h = complexity_h(&Instance::new(vec![0.5, 0.25, 0.25]).unwrap());
        assert_eq!(h, 32.0);
        let h = complexity_h(&Instance::carpentier_locatelli(4, 1).unwrap());
        assert!((h - 976.0 / 9.0).abs() < 1e-10, "{h}");
    }

    #[test]
    fn pinsker_examples() {
        let inst = Instance::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(pinsker_bound(&inst), 1.0 / 64.0);
        let inst = Instance::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert_eq!(pinsker_bound(&inst), 1.0 / 128.0);
    }

    #[test]
    fn pinsker_below_gamma_star_spot_checks() {
        for theta in [
            vec![0.9, 0.6],
            vec![0.5, 0.25],
            vec![0.7, 0.5, 0.3],
            vec![0.55, 0.45, 0.35, 0.25],
        ] {
            let inst = Instance::new(theta).unwrap();
            let sol = solve_gamma_star(&inst, 1e-9);
            assert!(
                pinsker_bound(&inst) <= sol.gamma_star + 1e-12,
                "{:?}",
                inst.theta()
            );
        }
    }

    #[test]
    fn cl_bound_reference_point() {
        let v = cl_regret_bound_log(2, 10, 16.0).unwrap();
        assert!((v - CL_BOUND_EXAMPLE).abs() < 1e-9, "{v}");
    }

    #[test]
    fn cl_bound_monotone_in_h() {
        let mut prev = f64::NEG_INFINITY;
        for h in [1.0, 4.0, 16.0, 64.0, 256.0] {
            let v = cl_regret_bound_log(2, 10, h).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn cl_bound_eventually_linear_in_t() {
        // For large T the linear KL term dominates the square-root term.
        let h = 16.0;
        let slope_at = |t: u64| {
            cl_regret_bound_log(2, t + 1, h).unwrap() - cl_regret_bound_log(2, t, h).unwrap()
        };
        let asymptote = -CL_INNER_CONSTANT / (2.0f64.ln() * h);
        assert!((slope_at(1_000_000) - asymptote).abs() < 0.01 * asymptote.abs());
    }

    #[test]
    fn cl_bound_rejects_bad_input() {
        assert!(matches!(
            cl_regret_bound_log(1, 10, 16.0),
            Err(Error::TooFewArms { k: 1 })
        ));
        assert!(cl_regret_bound_log(2, 0, 16.0).is_err());
        assert!(cl_regret_bound_log(2, 10, 0.0).is_err());
    }

    #[test]
    fn report_composes_the_calculators() {
        let inst = Instance::new(vec![0.5, 0.25]).unwrap();
        let report = bound_report(&inst, 10).unwrap();
        assert_eq!(report.h, 16.0);
        assert_eq!(report.pinsker_bound, 1.0 / 64.0);
        assert!((report.cl_bound_log - CL_BOUND_EXAMPLE).abs() < 1e-9);
        assert!(report.pinsker_bound <= report.gamma_star);
        assert_eq!(report.kasy_rate, report.gamma_star);
        let want_ratio = 2.0f64.ln() / RATE_CAP_CONSTANT;
        assert!((report.exponent_ratio - want_ratio).abs() < 1e-15);
        assert!((report.kasy_rate / report.capped_rate - want_ratio).abs() < 1e-12);
    }

    #[test]
    fn report_ratio_grows_with_k() {
        let mut prev = 0.0;
        for k in [2usize, 10, 100] {
            let inst = Instance::carpentier_locatelli(k, 1).unwrap();
            let report = bound_report(&inst, 10).unwrap();
            assert!((report.exponent_ratio - (k as f64).ln() / 800.0).abs() < 1e-15);
            assert!(report.exponent_ratio > prev);
            prev = report.exponent_ratio;
        }
    }
}
