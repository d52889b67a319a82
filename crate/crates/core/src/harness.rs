//! Monte Carlo replication engine for batched adaptive experiments.
//!
//! A replication plays the full adaptive loop: update the posterior on
//! cumulative counts, estimate the probability-of-best vector, turn it
//! into wave shares under the chosen rule, round to integer counts, draw
//! outcomes, accumulate, and finally pick the arm with the highest
//! posterior mean. Every random draw comes from a counter-based stream
//! derived from `(master seed, purpose, replication, wave)`, so a
//! replication is a pure function of its index and results never depend
//! on execution order or worker count.

use alloc::vec::Vec;

use libm::{log, sqrt};

use crate::allocate::{
    argmax_tie_low, choose_policy, exploration_shares, pinned_exploration_shares,
    shares_to_counts, thompson_shares, uniform_wave_counts, AllocationRule,
};
use crate::model::{simulate_wave, ExperimentConfig, Instance, SufficientStats};
use crate::rng::{derive_key, RngStream};
use crate::{Error, Result};

// Stream-derivation purpose tags.
const STREAM_PROB_BEST: u64 = 1;
const STREAM_OUTCOMES: u64 = 2;
const STREAM_HORIZON_SPLIT: u64 = 3;

/// Outcome of one replication.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationResult {
    /// Arm chosen by the terminal policy rule.
    pub chosen_arm: usize,
    /// Gap of the chosen arm: 0 iff the best arm was found.
    pub regret: f64,
    /// Final cumulative counts.
    pub final_stats: SufficientStats,
    /// Fraction of the budget the best arm received.
    pub share_best: f64,
}

/// Aggregated estimates over replications at one horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretEstimate {
    pub waves: u32,
    pub reps: u64,
    /// Mean policy regret Σ_d gap(d)·P̂(chosen = d).
    pub regret_hat: f64,
    /// Standard error of the mean regret.
    pub regret_se: f64,
    /// Fraction of replications that missed the best arm.
    pub err_prob_hat: f64,
    /// −log(regret_hat) / (N·T); `None` when no replication erred.
    pub exponent_point: Option<f64>,
    pub share_best_mean: f64,
    pub share_best_se: f64,
    /// Mean budget share of every arm, for comparison against the
    /// optimal-allocation solution (reported, never asserted).
    pub share_by_arm: Vec<f64>,
}

/// Decide the counts for one wave under `rule`.
///
/// Finite Monte Carlo produces a degenerate probability-of-best vector
/// (every entry exactly 0 or 1) once beliefs concentrate beyond 1/draws.
/// Exploration sampling then switches to its own limiting allocation:
/// the certain arm keeps the half share it converges to and the rest
/// splits evenly. With two arms this is the same (1/2, 1/2) the rule
/// produces anyway.
fn wave_counts(
    rule: AllocationRule,
    config: &ExperimentConfig,
    stats: &SufficientStats,
    rep_index: u64,
    wave: u32,
) -> Vec<u64> {
    let k = config.k();
    match rule {
        AllocationRule::Uniform => uniform_wave_counts(k, config.wave_size, wave),
        AllocationRule::Exploration | AllocationRule::Thompson => {
            let post = config
                .prior
                .updated(stats)
                .expect("stats dimension fixed by config");
            let mut stream = RngStream::derive(
                config.seed,
                &[STREAM_PROB_BEST, rep_index, wave as u64],
            );
            let p = post.prob_best(config.posterior_draws, &mut stream);
            let shares = match rule {
                AllocationRule::Thompson => thompson_shares(&p),
                AllocationRule::Exploration => match exploration_shares(&p) {
                    Ok(shares) => shares,
                    Err(Error::DegenerateBelief) => {
                        pinned_exploration_shares(k, argmax_tie_low(&p))
                    }
                    Err(_) => unreachable!("exploration_shares only fails on degeneracy"),
                },
                AllocationRule::Uniform => unreachable!(),
            };
            shares_to_counts(shares.q(), config.wave_size)
        }
    }
}

/// Play one full experiment; deterministic given `(config.seed, rep_index)`.
pub fn run_replication(
    instance: &Instance,
    config: &ExperimentConfig,
    rule: AllocationRule,
    rep_index: u64,
) -> ReplicationResult {
    let trajectory = run_trajectory(instance, config, rule, rep_index, &[config.waves]);
    trajectory.into_iter().next().expect("one checkpoint")
}

/// Run to the last checkpoint, snapshotting the replication state at each.
///
/// Allocation rules are horizon-free, so the state at wave t of a long
/// run is distributed exactly as a run stopped at t; checkpoints share
/// one trajectory. Checkpoints must be increasing and non-empty.
pub fn run_trajectory(
    instance: &Instance,
    config: &ExperimentConfig,
    rule: AllocationRule,
    rep_index: u64,
    checkpoints: &[u32],
) -> Vec<ReplicationResult> {
    let k = instance.k();
    debug_assert_eq!(config.k(), k);
    debug_assert!(!checkpoints.is_empty());
    debug_assert!(checkpoints.windows(2).all(|w| w[0] < w[1]));

    let mut stats = SufficientStats::new(k);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0;
    let last = *checkpoints.last().unwrap();
    for wave in 1..=last {
        let counts = wave_counts(rule, config, &stats, rep_index, wave);
        let mut stream = RngStream::derive(
            config.seed,
            &[STREAM_OUTCOMES, rep_index, wave as u64],
        );
        let successes = simulate_wave(instance, &counts, &mut stream);
        stats
            .record_wave(&counts, &successes)
            .expect("simulated outcomes are within counts");
        while next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] == wave {
            out.push(snapshot(instance, config, &stats, wave));
            next_checkpoint += 1;
        }
    }
    out
}

fn snapshot(
    instance: &Instance,
    config: &ExperimentConfig,
    stats: &SufficientStats,
    wave: u32,
) -> ReplicationResult {
    let post = config
        .prior
        .updated(stats)
        .expect("stats dimension fixed by config");
    let chosen_arm = choose_policy(&post);
    let budget = (config.wave_size * wave as u64) as f64;
    ReplicationResult {
        chosen_arm,
        regret: instance.gap(chosen_arm),
        final_stats: stats.clone(),
        share_best: stats.assignments()[instance.best_arm()] as f64 / budget,
    }
}

/// Run `reps` replications sequentially, indexed 0..reps.
pub fn replicate(
    instance: &Instance,
    config: &ExperimentConfig,
    rule: AllocationRule,
    reps: u64,
) -> Vec<ReplicationResult> {
    (0..reps)
        .map(|rep| run_replication(instance, config, rule, rep))
        .collect()
}

/// Aggregate replication results into point estimates.
///
/// Regret statistics are computed from the per-arm choice frequencies, so
/// they are exact functions of the tally: for two arms,
/// `regret_hat = gap(1)·err_prob_hat` identically. `share_best` moments
/// sum in replication order, fixed regardless of how the results were
/// produced.
pub fn aggregate(
    instance: &Instance,
    config: &ExperimentConfig,
    waves: u32,
    results: &[ReplicationResult],
) -> RegretEstimate {
    let reps = results.len() as u64;
    assert!(reps > 0, "no replications to aggregate");
    let k = instance.k();
    let mut chosen_counts = alloc::vec![0u64; k];
    for r in results {
        chosen_counts[r.chosen_arm] += 1;
    }
    let n = reps as f64;
    let freqs: Vec<f64> = chosen_counts.iter().map(|&c| c as f64 / n).collect();
    let best = instance.best_arm();
    let regret_hat: f64 = (0..k)
        .filter(|&d| d != best)
        .map(|d| instance.gap(d) * freqs[d])
        .sum();
    // Counted directly so that with two arms regret_hat is exactly
    // gap * err_prob_hat (both reduce to the same expression).
    let err_prob_hat = (reps - chosen_counts[best]) as f64 / n;
    let regret_var: f64 = (0..k)
        .map(|d| {
            let dev = instance.gap(d) - regret_hat;
            freqs[d] * dev * dev
        })
        .sum();
    let regret_se = if reps > 1 {
        sqrt(regret_var * n / (n - 1.0) / n)
    } else {
        0.0
    };

    let share_mean = results.iter().map(|r| r.share_best).sum::<f64>() / n;
    let share_var = results
        .iter()
        .map(|r| {
            let dev = r.share_best - share_mean;
            dev * dev
        })
        .sum::<f64>()
        / if reps > 1 { n - 1.0 } else { 1.0 };
    let share_se = if reps > 1 { sqrt(share_var / n) } else { 0.0 };

    let budget = (config.wave_size * waves as u64) as f64;
    let exponent_point = if regret_hat > 0.0 {
        Some(-log(regret_hat) / budget)
    } else {
        None
    };

    let mut share_by_arm = alloc::vec![0.0f64; k];
    for result in results {
        for (share, &m) in share_by_arm.iter_mut().zip(result.final_stats.assignments()) {
            *share += m as f64 / budget;
        }
    }
    for share in share_by_arm.iter_mut() {
        *share /= n;
    }

    RegretEstimate {
        waves,
        reps,
        regret_hat,
        regret_se,
        err_prob_hat,
        exponent_point,
        share_best_mean: share_mean,
        share_best_se: share_se,
        share_by_arm,
    }
}

/// Estimate expected policy regret at the configured horizon.
pub fn estimate_regret(
    instance: &Instance,
    config: &ExperimentConfig,
    rule: AllocationRule,
    reps: u64,
) -> RegretEstimate {
    let results = replicate(instance, config, rule, reps);
    aggregate(instance, config, config.waves, &results)
}

/// Configuration for one horizon of a grid: same parameters, with a
/// horizon-specific sub-seed so grid points are independent rather than
/// prefixes of one another.
pub fn horizon_config(config: &ExperimentConfig, waves: u32) -> ExperimentConfig {
    let mut sub = config.clone();
    sub.waves = waves;
    sub.seed = derive_key(config.seed, &[STREAM_HORIZON_SPLIT, waves as u64]);
    sub
}

/// Ordinary least squares of y on x. Returns `(slope, intercept, slope_se)`;
/// the standard error needs at least three points (it is `None` for two).
pub fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64, Option<f64>)> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            usable: n,
        });
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let se = if n > 2 {
        let ssr: f64 = points
            .iter()
            .map(|p| {
                let resid = p.1 - (intercept + slope * p.0);
                resid * resid
            })
            .sum();
        Some(sqrt(ssr / (nf - 2.0) / sxx))
    } else {
        None
    };
    Ok((slope, intercept, se))
}

/// Empirical decay exponent of the regret over a horizon grid.
#[derive(Clone, Debug)]
pub struct ExponentFit {
    /// −slope of log(regret_hat) against the budget N·T.
    pub exponent: f64,
    /// OLS standard error of the exponent (needs ≥ 3 usable points).
    pub se: Option<f64>,
    pub intercept: f64,
    /// (budget, regret_hat) pairs used in the fit.
    pub points: Vec<(f64, f64)>,
    /// Horizons dropped because every replication found the best arm.
    pub dropped: Vec<u32>,
}

/// Fit log(regret) against budget over a grid of horizons.
///
/// Each horizon runs its own replication set under a sub-seed derived
/// from `(config.seed, T)`, so grid points are independent. Horizons with
/// zero estimated regret carry no log value and are dropped (reported in
/// `dropped`), never smoothed; at least two horizons must survive.
pub fn estimate_exponent(
    instance: &Instance,
    config: &ExperimentConfig,
    t_grid: &[u32],
    rule: AllocationRule,
    reps: u64,
) -> Result<ExponentFit> {
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for &waves in t_grid {
        let sub = horizon_config(config, waves);
        let estimate = estimate_regret(instance, &sub, rule, reps);
        if estimate.regret_hat > 0.0 {
            points.push((sub.budget() as f64, estimate.regret_hat));
        } else {
            dropped.push(waves);
        }
    }
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            usable: points.len(),
        });
    }
    let logged: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, log(y))).collect();
    let (slope, intercept, se) = fit_line(&logged)?;
    Ok(ExponentFit {
        exponent: -slope,
        se,
        intercept,
        points,
        dropped,
    })
}

/// Mean and standard error of the best arm's cumulative share at one horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct SharePoint {
    pub waves: u32,
    pub mean: f64,
    pub se: f64,
}

/// Mean cumulative best-arm share at each checkpoint horizon.
///
/// One trajectory per replication serves every checkpoint: the rules are
/// horizon-free, so the prefix of a long run is distributed as a short
/// run.
pub fn share_trajectory(
    instance: &Instance,
    config: &ExperimentConfig,
    t_grid: &[u32],
    rule: AllocationRule,
    reps: u64,
) -> Vec<SharePoint> {
    assert!(reps > 0);
    let mut per_checkpoint: Vec<Vec<f64>> = alloc::vec![Vec::new(); t_grid.len()];
    for rep in 0..reps {
        let snapshots = run_trajectory(instance, config, rule, rep, t_grid);
        for (i, snap) in snapshots.iter().enumerate() {
            per_checkpoint[i].push(snap.share_best);
        }
    }
    t_grid
        .iter()
        .zip(per_checkpoint)
        .map(|(&waves, shares)| {
            let n = shares.len() as f64;
            let mean = shares.iter().sum::<f64>() / n;
            let var = shares.iter().map(|&s| (s - mean) * (s - mean)).sum::<f64>()
                / if shares.len() > 1 { n - 1.0 } else { 1.0 };
            SharePoint {
                waves,
                mean,
                se: if shares.len() > 1 { sqrt(var / n) } else { 0.0 },
            }
        })
        .collect()
}
