//! Exact misidentification oracle for the static uniform rule.
//!
//! With N = 1 and the uniform rule, the final counts are deterministic:
//! m = (T/2, T/2) for two arms. The terminal choice compares posterior
//! means (1 + r_d) / (2 + m_d), so with equal counts the experiment errs
//! exactly when the worse arm collects strictly more successes (ties go
//! to the lower index, the best arm here). That makes the error
//! probability a finite double sum of Binomial terms — an exact target
//! the Monte Carlo estimate must hit.

use bailab_core::allocate::AllocationRule;
use bailab_core::harness::estimate_regret;
use bailab_core::model::{ExperimentConfig, Instance};

fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    let ln_choose = |n: u64, k: u64| -> f64 {
        fn ln_factorial(x: u64) -> f64 {
            (1..=x).map(|i| (i as f64).ln()).sum()
        }
        ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
    };
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

#[test]
fn uniform_error_rate_matches_exact_enumeration() {
    let theta = [0.5, 0.25];
    let instance = Instance::new(theta.to_vec()).unwrap();
    let waves = 40u32;
    let per_arm = waves as u64 / 2;

    // P(error) = P(r_worse > r_best) with r_d ~ Binomial(20, theta_d).
    let mut exact = 0.0;
    for best_successes in 0..=per_arm {
        let p_best = binomial_pmf(per_arm, theta[0], best_successes);
        for worse_successes in (best_successes + 1)..=per_arm {
            exact += p_best * binomial_pmf(per_arm, theta[1], worse_successes);
        }
    }

    let reps = 100_000u64;
    let config = ExperimentConfig::new(2, 1, waves, 0xEAC7).unwrap();
    let estimate = estimate_regret(&instance, &config, AllocationRule::Uniform, reps);

    // Sanity: the allocation really is deterministic and balanced.
    assert_eq!(estimate.share_best_mean, 0.5);

    let se = (exact * (1.0 - exact) / reps as f64).sqrt();
    assert!(
        (estimate.err_prob_hat - exact).abs() < 3.0 * se,
        "estimated {} vs exact {exact} (se {se})",
        estimate.err_prob_hat
    );
    // And the k = 2 regret identity ties the regret to the same oracle.
    assert_eq!(
        estimate.regret_hat,
        (theta[0] - theta[1]) * estimate.err_prob_hat
    );
}
