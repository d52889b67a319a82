//! Wave-level allocation rules and the terminal policy choice.
//!
//! Exploration sampling (Kasy & Sautmann 2021) reweights the posterior
//! probability-of-best vector p to q ∝ p(1−p), damping the runaway
//! concentration of plain Thompson assignment; with two arms it always
//! splits a wave exactly in half. Shares become integer counts by
//! largest-remainder apportionment so a wave always sums to its size.

use alloc::vec::Vec;

use crate::posterior::BetaPosterior;
use crate::{Error, Result};

/// Which rule produced a share vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AllocationRule {
    Exploration,
    Thompson,
    Uniform,
}

impl AllocationRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            AllocationRule::Exploration => "exploration",
            AllocationRule::Thompson => "thompson",
            AllocationRule::Uniform => "uniform",
        }
    }
}

impl core::str::FromStr for AllocationRule {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "exploration" => Ok(AllocationRule::Exploration),
            "thompson" => Ok(AllocationRule::Thompson),
            "uniform" => Ok(AllocationRule::Uniform),
            _ => Err(()),
        }
    }
}

/// A probability vector of per-arm shares for one wave.
#[derive(Clone, Debug, PartialEq)]
pub struct AllocationShares {
    q: Vec<f64>,
    rule: AllocationRule,
}

impl AllocationShares {
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn rule(&self) -> AllocationRule {
        self.rule
    }

    /// Integer counts for a wave of `n` subjects (largest remainder).
    pub fn to_counts(&self, n: u64) -> Vec<u64> {
        shares_to_counts(&self.q, n)
    }
}

/// Exploration-sampling shares: `q[d] ∝ p[d]·(1−p[d])`.
///
/// `1−p[d]` is computed as the sum of the other entries, which is the
/// same thing for a probability vector but keeps the two-arm case exactly
/// symmetric in floating point: both weights are then the identical
/// product, so q = (1/2, 1/2) bit-for-bit.
///
/// Errors with [`Error::DegenerateBelief`] when every entry of `p` is
/// exactly 0 or 1 (the normalizer vanishes); callers decide the fallback.
pub fn exploration_shares(p: &[f64]) -> Result<AllocationShares> {
    let k = p.len();
    let mut weights = alloc::vec![0.0f64; k];
    let mut total = 0.0;
    for d in 0..k {
        let mut others = 0.0;
        for (j, &pj) in p.iter().enumerate() {
            if j != d {
                others += pj;
            }
        }
        weights[d] = p[d] * others;
        total += weights[d];
    }
    if total <= 0.0 {
        return Err(Error::DegenerateBelief);
    }
    let mut q: Vec<f64> = weights.iter().map(|&w| w / total).collect();
    // Pin the sum to exactly 1 by giving the heaviest arm the remainder.
    let top = argmax_tie_low(&q);
    let others: f64 = q
        .iter()
        .enumerate()
        .filter(|&(d, _)| d != top)
        .map(|(_, &x)| x)
        .sum();
    q[top] = 1.0 - others;
    Ok(AllocationShares {
        q,
        rule: AllocationRule::Exploration,
    })
}

/// Limiting exploration shares once belief in `winner` is beyond Monte
/// Carlo resolution: the certain arm keeps its limiting half share and
/// the other half splits evenly (the p-ratios that would decide the
/// ideal split are no longer estimable). Coincides with
/// [`exploration_shares`] for two arms.
pub fn pinned_exploration_shares(k: usize, winner: usize) -> AllocationShares {
    debug_assert!(k >= 2 && winner < k);
    let rest = 0.5 / (k - 1) as f64;
    let mut q = alloc::vec![rest; k];
    q[winner] = 0.5;
    AllocationShares {
        q,
        rule: AllocationRule::Exploration,
    }
}

/// Thompson-proportion shares: q = p unchanged.
pub fn thompson_shares(p: &[f64]) -> AllocationShares {
    AllocationShares {
        q: p.to_vec(),
        rule: AllocationRule::Thompson,
    }
}

/// Equal shares 1/k.
pub fn uniform_shares(k: usize) -> AllocationShares {
    AllocationShares {
        q: alloc::vec![1.0 / k as f64; k],
        rule: AllocationRule::Uniform,
    }
}

/// Round shares to integer counts summing exactly to `n`.
///
/// Each arm receives at least `⌊q[d]·n⌋`; leftover units go to arms in
/// decreasing order of fractional remainder `q[d]·n − ⌊q[d]·n⌋`, ties to
/// the lowest index (largest-remainder apportionment).
pub fn shares_to_counts(q: &[f64], n: u64) -> Vec<u64> {
    let k = q.len();
    let mut counts = alloc::vec![0u64; k];
    let mut order: Vec<(usize, f64)> = Vec::with_capacity(k);
    let mut assigned = 0u64;
    for d in 0..k {
        let target = q[d] * n as f64;
        let floor = libm::floor(target);
        counts[d] = floor as u64;
        assigned += counts[d];
        order.push((d, target - floor));
    }
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut idx = 0;
    while assigned < n {
        counts[order[idx % k].0] += 1;
        assigned += 1;
        idx += 1;
    }
    counts
}

/// Counts for wave `wave_index` (1-based) of the uniform rule.
///
/// Balances cumulative assignments rather than rounding each wave in
/// isolation; the cumulative allocation after wave t is the
/// largest-remainder rounding of (N·t/k, ..., N·t/k), so every arm's
/// total stays within one unit of N·t/k even when N < k.
pub fn uniform_wave_counts(k: usize, wave_size: u64, wave_index: u32) -> Vec<u64> {
    let desired = |total: u64| -> Vec<u64> {
        let base = total / k as u64;
        let extra = (total % k as u64) as usize;
        (0..k)
            .map(|d| base + if d < extra { 1 } else { 0 })
            .collect()
    };
    let now = desired(wave_size * wave_index as u64);
    let before = desired(wave_size * (wave_index as u64 - 1));
    now.iter().zip(&before).map(|(&a, &b)| a - b).collect()
}

/// Terminal policy choice: the arm with the highest posterior mean,
/// ties to the lowest index.
pub fn choose_policy(post: &BetaPosterior) -> usize {
    let means: Vec<f64> = (0..post.k()).map(|d| post.mean(d)).collect();
    argmax_tie_low(&means)
}

/// Index of the maximum, lowest index on ties.
pub fn argmax_tie_low(xs: &[f64]) -> usize {
    let mut best = 0;
    for (d, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exploration_symmetric() {
        let shares = exploration_shares(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        for &q in shares.q() {
            assert!((q - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exploration_two_arms_always_half() {
        for &p in &[0.9999, 0.75, 0.5, 0.1, 0.0001] {
            let shares = exploration_shares(&[p, 1.0 - p]).unwrap();
            assert_eq!(shares.q(), &[0.5, 0.5], "p = {p}");
        }
    }

    #[test]
    fn exploration_worked_example() {
        // weights 0.25, 0.21, 0.16 normalized by 0.62
        let shares = exploration_shares(&[0.5, 0.3, 0.2]).unwrap();
        let want = [25.0 / 62.0, 21.0 / 62.0, 16.0 / 62.0];
        for (got, want) in shares.q().iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(shares.q().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn exploration_degenerate_belief() {
        assert!(matches!(
            exploration_shares(&[1.0, 0.0, 0.0]),
            Err(Error::DegenerateBelief)
        ));
        assert!(matches!(
            exploration_shares(&[0.0, 1.0]),
            Err(Error::DegenerateBelief)
        ));
    }

    #[test]
    fn exploration_never_gives_everything_to_one_arm() {
        let shares = exploration_shares(&[0.98, 0.01, 0.01]).unwrap();
        assert!(shares.q().iter().all(|&q| q < 1.0));
    }

    #[test]
    fn exploration_is_permutation_equivariant() {
        let p = [0.55, 0.25, 0.15, 0.05];
        let base = exploration_shares(&p).unwrap();
        let perm = [2usize, 0, 3, 1];
        let permuted: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        let shuffled = exploration_shares(&permuted).unwrap();
        for (pos, &src) in perm.iter().enumerate() {
            assert!((shuffled.q()[pos] - base.q()[src]).abs() < 1e-14);
        }
    }

    #[test]
    fn pinned_shares_keep_the_half_limit() {
        let shares = pinned_exploration_shares(3, 0);
        assert_eq!(shares.q(), &[0.5, 0.25, 0.25]);
        let shares = pinned_exploration_shares(2, 1);
        assert_eq!(shares.q(), &[0.5, 0.5]);
        assert_eq!(shares.rule(), AllocationRule::Exploration);
        assert_eq!(shares.q().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn thompson_is_identity() {
        for p in [&[0.6, 0.4][..], &[1.0, 0.0][..], &[0.5, 0.3, 0.2][..]] {
            let shares = thompson_shares(p);
            assert_eq!(shares.q(), p);
            assert_eq!(shares.rule(), AllocationRule::Thompson);
        }
    }

    #[test]
    fn counts_worked_examples() {
        let q = [25.0 / 62.0, 21.0 / 62.0, 16.0 / 62.0];
        assert_eq!(shares_to_counts(&q, 10), vec![4, 3, 3]);
        assert_eq!(shares_to_counts(&[0.5, 0.5], 10), vec![5, 5]);
        // equal remainders 1/3: ties go to the lowest index
        assert_eq!(
            shares_to_counts(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 10),
            vec![4, 3, 3]
        );
    }

    #[test]
    fn counts_sum_and_stay_near_floor() {
        let qs = [
            alloc::vec![0.2, 0.5, 0.3],
            alloc::vec![0.999, 0.001],
            alloc::vec![0.15, 0.15, 0.35, 0.35],
        ];
        for q in &qs {
            for n in [1u64, 7, 100, 1003] {
                let counts = shares_to_counts(q, n);
                assert_eq!(counts.iter().sum::<u64>(), n);
                for (d, &c) in counts.iter().enumerate() {
                    let floor = (q[d] * n as f64).floor() as u64;
                    assert!(c == floor || c == floor + 1, "q={q:?} n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn uniform_wave_counts_balance_cumulatively() {
        // N = 1, k = 2 must alternate rather than starve arm 2.
        let mut m = [0u64; 2];
        for t in 1..=10u32 {
            let n = uniform_wave_counts(2, 1, t);
            assert_eq!(n.iter().sum::<u64>(), 1);
            for d in 0..2 {
                m[d] += n[d];
            }
        }
        assert_eq!(m, [5, 5]);

        // N = 10, k = 3: cumulative totals stay within one of N*t/3.
        let mut m = [0u64; 3];
        for t in 1..=7u32 {
            let n = uniform_wave_counts(3, 10, t);
            assert_eq!(n.iter().sum::<u64>(), 10);
            for d in 0..3 {
                m[d] += n[d];
            }
            let target = 10.0 * t as f64 / 3.0;
            for &md in &m {
                assert!((md as f64 - target).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn policy_choice_examples() {
        let p = BetaPosterior::new(vec![8.0, 1.0], vec![4.0, 1.0]).unwrap();
        assert_eq!(choose_policy(&p), 0);
        let p = BetaPosterior::uniform(2).unwrap();
        assert_eq!(choose_policy(&p), 0);
        let p = BetaPosterior::new(vec![1.0, 3.0], vec![3.0, 1.0]).unwrap();
        assert_eq!(choose_policy(&p), 1);
    }

    #[test]
    fn argmax_invariant_under_monotone_maps() {
        let xs = [0.2, 0.7, 0.7, 0.1];
        let base = argmax_tie_low(&xs);
        let exp: Vec<f64> = xs.iter().map(|&x| libm::exp(3.0 * x) - 1.0).collect();
        assert_eq!(argmax_tie_low(&exp), base);
        let affine: Vec<f64> = xs.iter().map(|&x| 0.01 * x + 5.0).collect();
        assert_eq!(argmax_tie_low(&affine), base);
    }
}
