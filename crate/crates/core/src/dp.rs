//! Exact finite-horizon design by backward induction, at toy scale.
//!
//! States are the sufficient statistics (m, r) after each wave; actions
//! are the compositions of the wave size over arms; transitions follow
//! the Beta-Binomial predictive law of the current posterior. Full
//! enumeration is exponential in every direction — that intractability is
//! the reason heuristic allocation rules exist — so the solver refuses
//! state spaces beyond a cap and serves as ground truth for small cases.
//!
//! Two terminal objectives are supported: expected welfare of the
//! terminal policy choice, E[max_d posterior mean], to be maximized; and
//! Bayesian simple regret, E[max_d θ_d | data] − max_d posterior mean, to
//! be minimized. The objectives differ per state by the posterior
//! expected maximum, whose prior expectation is plan-independent; optimal
//! plans coincide and the two optimal values sum to E[max_d θ_d] under
//! the prior.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::posterior::{beta_binomial_pmf, BetaPosterior};
use crate::quad;
use crate::special::beta_cdf;
use crate::{Error, Result};

/// Refuse state spaces larger than this.
pub const DEFAULT_STATE_CAP: u64 = 10_000_000;

/// Refuse outcome-path enumerations larger than this.
pub const DEFAULT_PATH_CAP: u64 = 1_000_000;

/// Sufficient statistics plus the wave index they were observed at.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DpState {
    pub m: Vec<u64>,
    pub r: Vec<u64>,
    pub t: u32,
}

impl DpState {
    fn root(k: usize) -> Self {
        DpState {
            m: vec![0; k],
            r: vec![0; k],
            t: 0,
        }
    }
}

/// Terminal objective of the design problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Expected posterior mean of the chosen policy (maximized).
    Welfare,
    /// Bayesian expected simple regret (minimized).
    BayesRegret,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::Welfare => "welfare",
            Objective::BayesRegret => "bayes_regret",
        }
    }
}

/// Output of the exact solver.
#[derive(Clone, Debug)]
pub struct DpSolution {
    /// Optimal expected terminal objective from the empty state.
    pub value: f64,
    pub objective: Objective,
    /// Number of reachable post-wave states (the size of the problem).
    pub states: u64,
    /// Optimal assignment per decision state, ties resolved to the
    /// lexicographically smallest count vector.
    pub policy: BTreeMap<DpState, Vec<u64>>,
}

/// Count reachable (m, r, t) states for t = 1..=waves.
///
/// Any m ≥ 0 with Σm = N·t is reachable by some assignment sequence, and
/// every r ≤ m has positive probability, so the level-t count is
/// Σ_{Σm = N·t} Π_d (m_d + 1). Errors once the running total exceeds
/// [`DEFAULT_STATE_CAP`].
pub fn enumerate_states(k: usize, wave_size: u64, waves: u32) -> Result<u64> {
    enumerate_states_with_cap(k, wave_size, waves, DEFAULT_STATE_CAP)
}

/// [`enumerate_states`] with an explicit cap.
pub fn enumerate_states_with_cap(k: usize, wave_size: u64, waves: u32, cap: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::ZeroParameter { name: "k" });
    }
    if wave_size == 0 {
        return Err(Error::ZeroParameter { name: "wave_size" });
    }
    let mut total: u64 = 0;
    for t in 1..=waves {
        let budget = wave_size * t as u64;
        let mut stack: Vec<(usize, u64, u64)> = vec![(0, budget, 1)];
        while let Some((arm, remaining, product)) = stack.pop() {
            if arm == k - 1 {
                let contribution = product
                    .checked_mul(remaining + 1)
                    .ok_or(Error::StateSpaceTooLarge { states: u64::MAX, cap })?;
                total = total
                    .checked_add(contribution)
                    .ok_or(Error::StateSpaceTooLarge { states: u64::MAX, cap })?;
                if total > cap {
                    return Err(Error::StateSpaceTooLarge { states: total, cap });
                }
                continue;
            }
            for take in 0..=remaining {
                let product = match product.checked_mul(take + 1) {
                    Some(p) => p,
                    None => return Err(Error::StateSpaceTooLarge { states: u64::MAX, cap }),
                };
                stack.push((arm + 1, remaining - take, product));
            }
        }
    }
    Ok(total)
}

/// All ways to split `total` units over `k` arms, in lexicographic order.
fn compositions(total: u64, k: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = vec![0u64; k];
    fn rec(out: &mut Vec<Vec<u64>>, current: &mut Vec<u64>, arm: usize, left: u64, k: usize) {
        if arm == k - 1 {
            current[arm] = left;
            out.push(current.clone());
            return;
        }
        for take in 0..=left {
            current[arm] = take;
            rec(out, current, arm + 1, left - take, k);
        }
    }
    rec(&mut out, &mut current, 0, total, k);
    out
}

/// E[max_d θ_d] under independent Beta marginals, by quadrature of
/// ∫ (1 − Π_d CDF_d(x)) dx to 1e-10.
pub fn expected_max_theta(prior: &BetaPosterior) -> f64 {
    let k = prior.k();
    quad::integrate(
        |x| {
            let mut prod = 1.0;
            for d in 0..k {
                prod *= beta_cdf(prior.alpha()[d], prior.beta()[d], x);
            }
            1.0 - prod
        },
        0.0,
        1.0,
        quad::DEFAULT_QUAD_TOL,
    )
}

struct Solver<'a> {
    prior: &'a BetaPosterior,
    wave_size: u64,
    waves: u32,
    objective: Objective,
    actions: Vec<Vec<u64>>,
    symmetric_prior: bool,
    memo: BTreeMap<Vec<(u64, u64)>, f64>,
}

impl<'a> Solver<'a> {
    fn new(wave_size: u64, waves: u32, prior: &'a BetaPosterior, objective: Objective) -> Self {
        let k = prior.k();
        let symmetric_prior = prior
            .alpha()
            .iter()
            .all(|&a| a == prior.alpha()[0])
            && prior.beta().iter().all(|&b| b == prior.beta()[0]);
        Solver {
            prior,
            wave_size,
            waves,
            objective,
            actions: compositions(wave_size, k),
            symmetric_prior,
            memo: BTreeMap::new(),
        }
    }

    /// Memo key: states that differ only by an arm permutation have the
    /// same value when the prior is exchangeable.
    fn key(&self, m: &[u64], r: &[u64]) -> Vec<(u64, u64)> {
        let mut pairs: Vec<(u64, u64)> = m.iter().copied().zip(r.iter().copied()).collect();
        if self.symmetric_prior {
            pairs.sort_unstable();
        }
        pairs
    }

    fn posterior_at(&self, m: &[u64], r: &[u64]) -> BetaPosterior {
        let alpha: Vec<f64> = self
            .prior
            .alpha()
            .iter()
            .zip(r)
            .map(|(&a, &rd)| a + rd as f64)
            .collect();
        let beta: Vec<f64> = self
            .prior
            .beta()
            .iter()
            .zip(m.iter().zip(r))
            .map(|(&b, (&md, &rd))| b + (md - rd) as f64)
            .collect();
        BetaPosterior::new(alpha, beta).expect("posterior parameters stay positive")
    }

    fn terminal(&self, m: &[u64], r: &[u64]) -> f64 {
        let post = self.posterior_at(m, r);
        let best_mean = (0..post.k()).map(|d| post.mean(d)).fold(f64::MIN, f64::max);
        match self.objective {
            Objective::Welfare => best_mean,
            Objective::BayesRegret => expected_max_theta(&post) - best_mean,
        }
    }

    fn better(&self, candidate: f64, incumbent: f64) -> bool {
        match self.objective {
            Objective::Welfare => candidate > incumbent,
            Objective::BayesRegret => candidate < incumbent,
        }
    }

    /// Expected continuation value of playing `action` in state (m, r, t).
    fn action_value(&mut self, m: &[u64], r: &[u64], t: u32, action: &[u64]) -> f64 {
        let post = self.posterior_at(m, r);
        let mut next_m: Vec<u64> = m.iter().zip(action).map(|(&a, &b)| a + b).collect();
        let mut next_r = r.to_vec();
        let mut total = 0.0;

        // Depth-first product over per-arm Beta-Binomial outcomes.
        #[allow(clippy::too_many_arguments)]
        fn outcomes(
            solver: &mut Solver,
            post: &BetaPosterior,
            action: &[u64],
            next_m: &mut Vec<u64>,
            next_r: &mut Vec<u64>,
            arm: usize,
            prob: f64,
            t: u32,
            total: &mut f64,
        ) {
            let k = action.len();
            if arm == k {
                *total += prob * solver.value(next_m.clone(), next_r.clone(), t + 1);
                return;
            }
            for s in 0..=action[arm] {
                let p = beta_binomial_pmf(post.alpha()[arm], post.beta()[arm], action[arm], s)
                    .expect("valid predictive parameters");
                next_r[arm] += s;
                outcomes(solver, post, action, next_m, next_r, arm + 1, prob * p, t, total);
                next_r[arm] -= s;
            }
        }
        outcomes(
            self,
            &post,
            action,
            &mut next_m,
            &mut next_r,
            0,
            1.0,
            t,
            &mut total,
        );
        total
    }

    fn value(&mut self, m: Vec<u64>, r: Vec<u64>, t: u32) -> f64 {
        if t == self.waves {
            return self.terminal(&m, &r);
        }
        let key = self.key(&m, &r);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let actions = self.actions.clone();
        let mut best = f64::NAN;
        for action in &actions {
            let v = self.action_value(&m, &r, t, action);
            if best.is_nan() || self.better(v, best) {
                best = v;
            }
        }
        self.memo.insert(key, best);
        best
    }

    /// Optimal action in actual (unpermuted) coordinates, lex-smallest on
    /// ties, so the recorded policy respects the documented tie rule even
    /// when the value memo collapses symmetric states.
    fn best_action(&mut self, state: &DpState) -> Vec<u64> {
        let actions = self.actions.clone();
        let mut best_action = actions[0].clone();
        let mut best = f64::NAN;
        for action in &actions {
            let v = self.action_value(&state.m, &state.r, state.t, action);
            if best.is_nan() || self.better(v, best) {
                best = v;
                best_action = action.clone();
            }
        }
        best_action
    }
}

/// Solve the T-wave design problem exactly by backward induction.
///
/// `waves` may be 0, in which case the value is the terminal objective of
/// the prior itself. Errors if the reachable state space exceeds
/// [`DEFAULT_STATE_CAP`].
pub fn solve_dp(
    wave_size: u64,
    waves: u32,
    prior: &BetaPosterior,
    objective: Objective,
) -> Result<DpSolution> {
    if wave_size == 0 {
        return Err(Error::ZeroParameter { name: "wave_size" });
    }
    let k = prior.k();
    let states = enumerate_states(k, wave_size, waves)?;
    let mut solver = Solver::new(wave_size, waves, prior, objective);
    let root = DpState::root(k);
    let value = solver.value(root.m.clone(), root.r.clone(), 0);

    // Forward pass over every decision state reachable under any plan,
    // recording the optimal assignment for each.
    let actions = solver.actions.clone();
    let mut policy = BTreeMap::new();
    let mut level: BTreeSet<DpState> = BTreeSet::new();
    level.insert(root);
    for _ in 0..waves {
        let mut next: BTreeSet<DpState> = BTreeSet::new();
        for state in &level {
            for action in &actions {
                for outcome in compositions_up_to(action) {
                    let mut m = state.m.clone();
                    let mut r = state.r.clone();
                    for d in 0..k {
                        m[d] += action[d];
                        r[d] += outcome[d];
                    }
                    next.insert(DpState {
                        m,
                        r,
                        t: state.t + 1,
                    });
                }
            }
            let chosen = solver.best_action(state);
            policy.insert(state.clone(), chosen);
        }
        level = next;
    }

    Ok(DpSolution {
        value,
        objective,
        states,
        policy,
    })
}

/// All outcome vectors s with 0 <= s[d] <= action[d].
fn compositions_up_to(action: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &cap in action {
        let mut next = Vec::new();
        for prefix in &out {
            for s in 0..=cap {
                let mut v = prefix.clone();
                v.push(s);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Exact expected terminal objective of a fixed assignment plan, by
/// summing Beta-Binomial probabilities over every outcome path.
///
/// The plan maps each decision state to a wave assignment; a
/// non-adaptive plan simply ignores the counts. Errors if the number of
/// outcome paths exceeds [`DEFAULT_PATH_CAP`].
pub fn brute_force_value<F>(
    wave_size: u64,
    waves: u32,
    prior: &BetaPosterior,
    objective: Objective,
    plan: F,
) -> Result<f64>
where
    F: Fn(&DpState) -> Vec<u64>,
{
    if wave_size == 0 {
        return Err(Error::ZeroParameter { name: "wave_size" });
    }
    let k = prior.k();
    let solver = Solver::new(wave_size, waves, prior, objective);
    let mut paths: u64 = 0;

    fn walk<F: Fn(&DpState) -> Vec<u64>>(
        solver: &Solver,
        plan: &F,
        state: DpState,
        prob: f64,
        paths: &mut u64,
    ) -> Result<f64> {
        if state.t == solver.waves {
            *paths += 1;
            if *paths > DEFAULT_PATH_CAP {
                return Err(Error::PathSpaceTooLarge {
                    cap: DEFAULT_PATH_CAP,
                });
            }
            return Ok(prob * solver.terminal(&state.m, &state.r));
        }
        let action = plan(&state);
        debug_assert_eq!(action.iter().sum::<u64>(), solver.wave_size);
        let post = solver.posterior_at(&state.m, &state.r);
        let k = action.len();
        let mut total = 0.0;
        for outcome in compositions_up_to(&action) {
            let mut p = prob;
            for d in 0..k {
                p *= beta_binomial_pmf(post.alpha()[d], post.beta()[d], action[d], outcome[d])
                    .expect("valid predictive parameters");
            }
            let mut m = state.m.clone();
            let mut r = state.r.clone();
            for d in 0..k {
                m[d] += action[d];
                r[d] += outcome[d];
            }
            total += walk(
                solver,
                plan,
                DpState {
                    m,
                    r,
                    t: state.t + 1,
                },
                p,
                paths,
            )?;
        }
        Ok(total)
    }

    walk(&solver, &plan, DpState::root(k), 1.0, &mut paths)
}
