//! Problem instances, experiment state, and outcome simulation.
//!
//! An [`Instance`] is a vector of true Bernoulli means with a unique best
//! arm. [`SufficientStats`] carries cumulative assignment and success
//! counts, which under i.i.d. Bernoulli outcomes summarize everything the
//! experimenter has seen. [`simulate_wave`] draws one batch of outcomes
//! from an explicit random stream.

use alloc::vec;
use alloc::vec::Vec;

use crate::posterior::BetaPosterior;
use crate::rng::RngStream;
use crate::{Error, Result};

/// A fixed-budget identification problem: true means and the unique best arm.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    theta: Vec<f64>,
    best_arm: usize,
}

impl Instance {
    /// Validate a mean vector and locate its unique best arm.
    ///
    /// Rejects fewer than two arms, any mean on or outside the boundary of
    /// (0, 1), and ties for the maximum.
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::TooFewArms { k: theta.len() });
        }
        for (arm, &value) in theta.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::OutOfRange { arm, value });
            }
        }
        let mut best_arm = 0;
        for (arm, &value) in theta.iter().enumerate().skip(1) {
            if value > theta[best_arm] {
                best_arm = arm;
            }
        }
        for (arm, &value) in theta.iter().enumerate() {
            if arm != best_arm && value == theta[best_arm] {
                return Err(Error::TiedBestArm {
                    first: best_arm.min(arm),
                    second: best_arm.max(arm),
                });
            }
        }
        Ok(Instance { theta, best_arm })
    }

    /// The hard instance family of Carpentier & Locatelli (2016).
    ///
    /// With `f(d) = d / (4k)`: instance 1 has means
    /// `(1/2, 1/2 - f(2), ..., 1/2 - f(k))`, and instance `label > 1`
    /// flips arm `label` (1-based) to `1/2 + f(label)` so that it becomes
    /// the best arm. Any algorithm loses a `log k` factor in its error
    /// exponent on at least one member of the family.
    pub fn carpentier_locatelli(k: usize, label: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewArms { k });
        }
        if label < 1 || label > k {
            return Err(Error::LabelOutOfRange { label, k });
        }
        let f = |d: usize| d as f64 / (4.0 * k as f64);
        let mut theta: Vec<f64> = (0..k)
            .map(|arm| if arm == 0 { 0.5 } else { 0.5 - f(arm + 1) })
            .collect();
        if label > 1 {
            theta[label - 1] = 0.5 + f(label);
        }
        Instance::new(theta)
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Index of the unique best arm (0-based).
    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    /// Policy regret of choosing `arm`: `theta[best] - theta[arm]`.
    pub fn gap(&self, arm: usize) -> f64 {
        self.theta[self.best_arm] - self.theta[arm]
    }

    /// Largest gap over arms.
    pub fn max_gap(&self) -> f64 {
        self.theta
            .iter()
            .map(|&t| self.theta[self.best_arm] - t)
            .fold(0.0, f64::max)
    }
}

/// Cumulative per-arm assignment counts `m` and success counts `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SufficientStats {
    m: Vec<u64>,
    r: Vec<u64>,
}

impl SufficientStats {
    /// Empty statistics for `k` arms.
    pub fn new(k: usize) -> Self {
        SufficientStats {
            m: vec![0; k],
            r: vec![0; k],
        }
    }

    /// Build from explicit count vectors, checking `r[d] <= m[d]`.
    pub fn from_counts(m: Vec<u64>, r: Vec<u64>) -> Result<Self> {
        if m.len() != r.len() {
            return Err(Error::LengthMismatch {
                expected: m.len(),
                got: r.len(),
            });
        }
        for (&md, &rd) in m.iter().zip(&r) {
            if rd > md {
                return Err(Error::InvalidCounts {
                    successes: rd,
                    trials: md,
                });
            }
        }
        Ok(SufficientStats { m, r })
    }

    pub fn k(&self) -> usize {
        self.m.len()
    }

    /// Cumulative assignments per arm.
    pub fn assignments(&self) -> &[u64] {
        &self.m
    }

    /// Cumulative successes per arm.
    pub fn successes(&self) -> &[u64] {
        &self.r
    }

    /// Total subjects observed so far.
    pub fn total(&self) -> u64 {
        self.m.iter().sum()
    }

    /// Fold one wave of assignments and outcomes into the cumulative state.
    pub fn record_wave(&mut self, counts: &[u64], successes: &[u64]) -> Result<()> {
        if counts.len() != self.m.len() || successes.len() != self.m.len() {
            return Err(Error::LengthMismatch {
                expected: self.m.len(),
                got: counts.len().max(successes.len()),
            });
        }
        for d in 0..self.m.len() {
            if successes[d] > counts[d] {
                return Err(Error::InvalidCounts {
                    successes: successes[d],
                    trials: counts[d],
                });
            }
        }
        for d in 0..self.m.len() {
            self.m[d] += counts[d];
            self.r[d] += successes[d];
        }
        Ok(())
    }
}

/// Parameters of one batched experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Subjects per wave, fixed across waves (`N >= 1`).
    pub wave_size: u64,
    /// Number of waves `T`.
    pub waves: u32,
    /// Prior belief, one Beta per arm.
    pub prior: BetaPosterior,
    /// Master seed; every stream in a run derives from it.
    pub seed: u64,
    /// Monte Carlo draws used per wave to estimate the
    /// probability-of-best vector.
    pub posterior_draws: u32,
}

impl ExperimentConfig {
    /// Uniform Beta(1,1) prior, 10,000 posterior draws per wave.
    pub fn new(k: usize, wave_size: u64, waves: u32, seed: u64) -> Result<Self> {
        if wave_size == 0 {
            return Err(Error::ZeroParameter { name: "wave_size" });
        }
        if waves == 0 {
            return Err(Error::ZeroParameter { name: "waves" });
        }
        Ok(ExperimentConfig {
            wave_size,
            waves,
            prior: BetaPosterior::uniform(k)?,
            seed,
            posterior_draws: 10_000,
        })
    }

    pub fn k(&self) -> usize {
        self.prior.k()
    }

    /// Total budget `N * T`.
    pub fn budget(&self) -> u64 {
        self.wave_size * self.waves as u64
    }
}

/// Draw one wave of Bernoulli outcomes: `s[d] ~ Binomial(counts[d], theta[d])`.
///
/// Consumes exactly `counts[d]` values from the stream per arm, in arm
/// order, so the stream position after a wave is a deterministic function
/// of the assignment counts.
pub fn simulate_wave(instance: &Instance, counts: &[u64], stream: &mut RngStream) -> Vec<u64> {
    debug_assert_eq!(counts.len(), instance.k());
    counts
        .iter()
        .zip(instance.theta())
        .map(|(&n, &theta)| stream.binomial(n, theta))
        .collect()
}
