//! Property tests for the structural invariants.

use bailab_core::allocate::{argmax_tie_low, exploration_shares, shares_to_counts};
use bailab_core::ldp::{bernoulli_kl, rate_g};
use bailab_core::model::{simulate_wave, Instance, SufficientStats};
use bailab_core::posterior::{beta_binomial_pmf, BetaPosterior};
use bailab_core::rng::RngStream;
use proptest::prelude::*;

/// Quarter-integer Beta parameters: exactly representable, so conjugate
/// updates stay exact integer arithmetic in the significand.
fn dyadic_param() -> impl Strategy<Value = f64> {
    (1u32..=256).prop_map(|q| q as f64 / 4.0)
}

proptest! {
    #[test]
    fn conjugate_update_matches_formula_and_is_additive(
        params in proptest::collection::vec((dyadic_param(), dyadic_param()), 1..6),
        seed in any::<u64>(),
    ) {
        let k = params.len();
        let (alpha0, beta0): (Vec<f64>, Vec<f64>) = params.into_iter().unzip();
        let prior = BetaPosterior::new(alpha0.clone(), beta0.clone()).unwrap();

        let mut stream = RngStream::new(seed);
        let draw_stats = |stream: &mut RngStream| {
            let m: Vec<u64> = (0..k).map(|_| stream.next_u64() % 1_000_000).collect();
            let r: Vec<u64> = m.iter().map(|&md| if md == 0 { 0 } else { stream.next_u64() % (md + 1) }).collect();
            SufficientStats::from_counts(m, r).unwrap()
        };
        let first = draw_stats(&mut stream);
        let second = draw_stats(&mut stream);

        // Update formula, exactly.
        let post = prior.updated(&first).unwrap();
        for d in 0..k {
            prop_assert_eq!(post.alpha()[d], alpha0[d] + first.successes()[d] as f64);
            prop_assert_eq!(
                post.beta()[d],
                beta0[d] + (first.assignments()[d] - first.successes()[d]) as f64
            );
        }

        // Additivity: two-step equals one-step on the summed stats, exactly.
        let two_step = post.updated(&second).unwrap();
        let summed = SufficientStats::from_counts(
            first.assignments().iter().zip(second.assignments()).map(|(&a, &b)| a + b).collect(),
            first.successes().iter().zip(second.successes()).map(|(&a, &b)| a + b).collect(),
        ).unwrap();
        let one_step = prior.updated(&summed).unwrap();
        prop_assert_eq!(two_step, one_step);
    }

    #[test]
    fn beta_binomial_pmf_normalizes(
        alpha in 0.05f64..60.0,
        beta in 0.05f64..60.0,
        n in 0u64..=50,
    ) {
        let total: f64 = (0..=n).map(|s| beta_binomial_pmf(alpha, beta, n, s).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "total {}", total);
    }

    #[test]
    fn prob_best_is_probability_vector(
        params in proptest::collection::vec((0.3f64..30.0, 0.3f64..30.0), 1..6),
        seed in any::<u64>(),
    ) {
        let (alpha, beta): (Vec<f64>, Vec<f64>) = params.into_iter().unzip();
        let post = BetaPosterior::new(alpha, beta).unwrap();
        let p = post.prob_best(500, &mut RngStream::new(seed));
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert_eq!(p.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn counts_sum_to_wave_and_respect_floors(
        weights in proptest::collection::vec(0.01f64..10.0, 1..7),
        n in 1u64..2000,
    ) {
        let total: f64 = weights.iter().sum();
        let q: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let counts = shares_to_counts(&q, n);
        prop_assert_eq!(counts.iter().sum::<u64>(), n);
        for (d, &c) in counts.iter().enumerate() {
            let floor = (q[d] * n as f64).floor() as u64;
            prop_assert!(c == floor || c == floor + 1);
        }
    }

    #[test]
    fn exploration_shares_are_permutation_equivariant(
        mut p in proptest::collection::vec(0.01f64..1.0, 2..6),
        rotation in 0usize..5,
    ) {
        let total: f64 = p.iter().sum();
        for x in p.iter_mut() {
            *x /= total;
        }
        let k = p.len();
        let rot = rotation % k;
        let rotated: Vec<f64> = (0..k).map(|i| p[(i + rot) % k]).collect();
        let base = exploration_shares(&p).unwrap();
        let shuffled = exploration_shares(&rotated).unwrap();
        for i in 0..k {
            prop_assert!((shuffled.q()[i] - base.q()[(i + rot) % k]).abs() < 1e-13);
        }
    }

    #[test]
    fn argmax_survives_increasing_affine_maps(
        xs in proptest::collection::vec(0.0f64..1.0, 1..8),
        scale in 0.001f64..100.0,
        shift in -5.0f64..5.0,
    ) {
        let mapped: Vec<f64> = xs.iter().map(|&x| scale * x + shift).collect();
        prop_assert_eq!(argmax_tie_low(&mapped), argmax_tie_low(&xs));
    }

    #[test]
    fn kl_positive_definite(p in 0.0f64..=1.0, q in 0.001f64..0.999) {
        let kl = bernoulli_kl(p, q).unwrap();
        prop_assert!(kl >= 0.0);
        if (p - q).abs() > 1e-12 {
            prop_assert!(kl > 0.0);
        }
    }

    #[test]
    fn rate_g_nondecreasing_in_each_share(
        thetaj in 0.05f64..0.9,
        gap in 0.01f64..0.5,
        rho_lo in 0.0f64..1.0,
        bump in 0.0f64..1.0,
        other in 0.0f64..1.0,
    ) {
        let theta1 = (thetaj + gap).min(0.99);
        let lo = rate_g(other, rho_lo, theta1, thetaj).unwrap();
        let hi = rate_g(other, rho_lo + bump, theta1, thetaj).unwrap();
        prop_assert!(hi >= lo - 1e-14);
        let lo1 = rate_g(rho_lo, other, theta1, thetaj).unwrap();
        let hi1 = rate_g(rho_lo + bump, other, theta1, thetaj).unwrap();
        prop_assert!(hi1 >= lo1 - 1e-14);
    }

    #[test]
    fn simulated_waves_accumulate_within_bounds(
        counts in proptest::collection::vec(0u64..200, 2..5),
        seed in any::<u64>(),
    ) {
        let k = counts.len();
        let theta: Vec<f64> = (0..k).map(|d| 0.2 + 0.5 * d as f64 / k as f64).collect();
        let inst = Instance::new(theta).unwrap();
        let mut stats = SufficientStats::new(k);
        let mut stream = RngStream::new(seed);
        for _ in 0..3 {
            let s = simulate_wave(&inst, &counts, &mut stream);
            stats.record_wave(&counts, &s).unwrap();
        }
        for d in 0..k {
            prop_assert!(stats.successes()[d] <= stats.assignments()[d]);
            prop_assert_eq!(stats.assignments()[d], 3 * counts[d]);
        }
    }
}
