//! Inverse reinforcement learning: maximum-entropy reward recovery, the
//! step-wise exponential-reward likelihood, a checker for its coincidence
//! with the ordinal event-model likelihood, and greedy policy extraction.
//!
//! Rewards are linear in state features, `R(s) = theta . f(s)`, and accrue
//! on the state being entered. The equivalence checker views an event
//! history as a trajectory through history-states: from any prefix the
//! reachable successor states are the |A| one-event extensions, each scored
//! by the realized prefix's statistics, and normalizing the step likelihood
//! over that successor set reproduces the ordinal likelihood term for term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{ActionSpace, EventHistory};
use crate::mdp::{Mdp, Trajectory};
use crate::numeric::{log_sum_exp, KahanSum};
use crate::rem::{Design, LikelihoodMode, RemModel};

/// Feature weights and discount factor defining `R(s) = theta . f(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardModel {
    pub theta: Vec<f64>,
    pub gamma: f64,
}

impl RewardModel {
    pub fn new(theta: Vec<f64>, gamma: f64) -> Self {
        assert!((0.0..1.0).contains(&gamma), "discount must lie in [0, 1)");
        assert!(theta.iter().all(|t| t.is_finite()));
        Self { theta, gamma }
    }

    pub fn state_rewards(&self, mdp: &Mdp) -> Vec<f64> {
        mdp.state_rewards(&self.theta)
    }

    /// Serializable report with per-state rewards resolved against an MDP.
    pub fn report(&self, mdp: &Mdp) -> RewardReport {
        RewardReport {
            theta: self.theta.clone(),
            gamma: self.gamma,
            state_rewards: self.state_rewards(mdp),
            state_labels: mdp.state_labels.clone(),
        }
    }
}

/// The JSON document for a recovered reward: weights, discount, and the
/// induced per-state rewards with their labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardReport {
    pub theta: Vec<f64>,
    pub gamma: f64,
    pub state_rewards: Vec<f64>,
    pub state_labels: Vec<String>,
}

/// A stochastic policy: `probs[s][a]`, rows summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftPolicy {
    probs: Vec<Vec<f64>>,
}

impl SoftPolicy {
    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.probs[state]
    }

    /// Highest-probability action with lowest-index tie-breaking.
    pub fn argmax(&self, state: usize) -> usize {
        let row = &self.probs[state];
        let mut best = 0;
        for (a, p) in row.iter().enumerate().skip(1) {
            if *p > row[best] {
                best = a;
            }
        }
        best
    }
}

/// Settings for [`maxent_irl`].
#[derive(Debug, Clone)]
pub struct MaxEntConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Soft-recursion depth; raised to the longest demonstration when shorter.
    pub horizon: Option<usize>,
    /// Early-stop threshold on the gradient infinity norm.
    pub convergence_tol: f64,
    /// Carried alongside for reproducibility bookkeeping; the algorithm
    /// itself is deterministic.
    pub seed: u64,
}

impl Default for MaxEntConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 2000,
            horizon: None,
            convergence_tol: 1e-6,
            seed: 0,
        }
    }
}

/// Finite-horizon soft (maximum-entropy) backward recursion.
///
/// With terminal values zero, each level computes
/// `Q(s, a) = sum_s' P_a(s, s') (R(s') + V(s'))` and
/// `V(s) = logsumexp_a Q(s, a)`; the returned policy is the local softmax
/// `exp(Q - V)` of the deepest level. Rewards accrue on arrival and no
/// discounting is applied inside the recursion.
pub fn soft_backward_pass(mdp: &Mdp, reward: &[f64], horizon: usize) -> SoftPolicy {
    assert_eq!(reward.len(), mdp.n_states);
    assert!(horizon >= 1, "the soft recursion needs at least one level");
    assert!(reward.iter().all(|r| r.is_finite()));
    let mut values = vec![0.0; mdp.n_states];
    let mut q = vec![vec![0.0; mdp.n_actions]; mdp.n_states];
    for _ in 0..horizon {
        for s in 0..mdp.n_states {
            for a in 0..mdp.n_actions {
                let row = &mdp.transitions[a][s];
                q[s][a] = row
                    .iter()
                    .enumerate()
                    .map(|(next, p)| p * (reward[next] + values[next]))
                    .sum();
            }
        }
        for s in 0..mdp.n_states {
            values[s] = log_sum_exp(&q[s]);
        }
    }
    let probs = (0..mdp.n_states)
        .map(|s| q[s].iter().map(|qa| (qa - values[s]).exp()).collect())
        .collect();
    SoftPolicy { probs }
}

/// Expected state-visitation frequencies over a horizon:
/// `D = sum_{t=0..horizon-1} D_t` with `D_0` the start distribution and
/// `D_{t+1}[s'] = sum_{s,a} D_t[s] pi[s][a] P_a(s, s')`. Total mass equals
/// the horizon.
pub fn expected_svf(
    mdp: &Mdp,
    policy: &SoftPolicy,
    start_distribution: &[f64],
    horizon: usize,
) -> Vec<f64> {
    assert_eq!(start_distribution.len(), mdp.n_states);
    assert!(horizon >= 1);
    debug_assert!((start_distribution.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let mut current = start_distribution.to_vec();
    let mut total = current.clone();
    for _ in 1..horizon {
        let mut next = vec![0.0; mdp.n_states];
        for s in 0..mdp.n_states {
            if current[s] == 0.0 {
                continue;
            }
            for a in 0..mdp.n_actions {
                let weight = current[s] * policy.row(s)[a];
                if weight == 0.0 {
                    continue;
                }
                for (succ, p) in mdp.transitions[a][s].iter().enumerate() {
                    next[succ] += weight * p;
                }
            }
        }
        for s in 0..mdp.n_states {
            total[s] += next[s];
        }
        current = next;
    }
    total
}

/// Maximum-entropy reward recovery from demonstrations.
///
/// Gradient ascent on the feature weights with gradient
/// `(mean demonstration feature counts) - (feature expectation under the
/// current soft policy's visitation)`; the start distribution is the
/// empirical distribution of demonstration initial states. Returns after
/// `epochs` epochs or earlier once the gradient infinity norm drops below
/// the tolerance. The returned discount is zero: the step-wise view this
/// recovery feeds is myopic.
pub fn maxent_irl(mdp: &Mdp, trajectories: &[Trajectory], config: &MaxEntConfig) -> Result<RewardModel> {
    let demos: Vec<&Trajectory> = trajectories.iter().filter(|t| !t.is_empty()).collect();
    if demos.is_empty() {
        return Err(Error::EmptyDemonstrations);
    }
    let d = mdp.n_features();
    let n = demos.len() as f64;
    let longest = demos.iter().map(|t| t.len()).max().unwrap();
    let horizon = config.horizon.unwrap_or(0).max(longest);

    let mut empirical = vec![0.0; d];
    let mut start = vec![0.0; mdp.n_states];
    for demo in &demos {
        start[demo.steps()[0].0] += 1.0 / n;
        for state in demo.states() {
            for (j, f) in mdp.features[state].iter().enumerate() {
                empirical[j] += f / n;
            }
        }
    }

    let mut theta = vec![0.0; d];
    for _ in 0..config.epochs {
        let rewards = mdp.state_rewards(&theta);
        let policy = soft_backward_pass(mdp, &rewards, horizon);
        let visitation = expected_svf(mdp, &policy, &start, horizon);
        let mut gradient = empirical.clone();
        for s in 0..mdp.n_states {
            for (j, f) in mdp.features[s].iter().enumerate() {
                gradient[j] -= visitation[s] * f;
            }
        }
        let gnorm = gradient.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        if gnorm <= config.convergence_tol {
            break;
        }
        for (t, g) in theta.iter_mut().zip(&gradient) {
            *t += config.learning_rate * g;
        }
    }
    Ok(RewardModel::new(theta, 0.0))
}

/// Step-wise log-likelihood of a realized state sequence under
/// exponential-of-reward choice: each step contributes
/// `R(s_i) - ln sum_{s' in candidates_i} exp(R(s'))`.
pub fn birl_trajectory_loglik(
    realized_states: &[usize],
    state_rewards: &[f64],
    candidates_per_step: &[Vec<usize>],
) -> Result<f64> {
    assert_eq!(realized_states.len(), candidates_per_step.len());
    let mut acc = KahanSum::new();
    for (step, (&state, candidates)) in realized_states
        .iter()
        .zip(candidates_per_step)
        .enumerate()
    {
        if !candidates.contains(&state) {
            return Err(Error::RealizedStateNotInCandidates { step, state });
        }
        let scores: Vec<f64> = candidates.iter().map(|&c| state_rewards[c]).collect();
        acc.add(state_rewards[state] - log_sum_exp(&scores));
    }
    Ok(acc.value())
}

/// The literal all-states normalization: every step's candidate set is the
/// whole state space.
pub fn birl_trajectory_loglik_all_states(
    realized_states: &[usize],
    state_rewards: &[f64],
) -> Result<f64> {
    let all: Vec<usize> = (0..state_rewards.len()).collect();
    let candidates = vec![all; realized_states.len()];
    birl_trajectory_loglik(realized_states, state_rewards, &candidates)
}

/// Both sides of the likelihood identity for one history and model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub rem_loglik: f64,
    pub birl_loglik: f64,
    pub abs_diff: f64,
}

/// Evaluate the ordinal event-model log-likelihood and the step-wise
/// exponential-reward log-likelihood of the same history under the
/// history-as-state view, and report both with their absolute difference.
///
/// At step `i` the candidate successor states are the |A| one-event
/// extensions of the realized prefix; the reward of extension `a'` is
/// `theta . u(a', A_{i-1})`. Normalizing over that reachable successor set
/// makes the two likelihoods coincide.
pub fn rem_birl_equivalence(
    history: &EventHistory,
    model: &RemModel,
    space: &ActionSpace,
) -> Result<EquivalenceReport> {
    let rem_loglik = crate::rem::ordinal_loglik(history, model, space)?;

    let design = Design::build(history, &model.specs, space, LikelihoodMode::Ordinal)?;
    let n_actions = space.len();
    let n_steps = design.n_steps();
    let mut rewards = Vec::with_capacity(n_steps * n_actions);
    let mut candidates = Vec::with_capacity(n_steps);
    let mut realized = Vec::with_capacity(n_steps);
    for i in 0..n_steps {
        rewards.extend(design.scores(i, &model.theta));
        candidates.push((i * n_actions..(i + 1) * n_actions).collect());
        realized.push(i * n_actions + design.realized()[i]);
    }
    let birl_loglik = birl_trajectory_loglik(&realized, &rewards, &candidates)?;

    Ok(EquivalenceReport {
        rem_loglik,
        birl_loglik,
        abs_diff: (rem_loglik - birl_loglik).abs(),
    })
}

/// A deterministic policy with its value function.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyResult {
    pub policy: Vec<usize>,
    pub values: Vec<f64>,
    pub iterations: usize,
}

/// Value iteration to the fixed point of
/// `V(s) = max_a sum_s' P_a(s, s') (R(s') + gamma V(s'))`, then the greedy
/// policy with lowest-index tie-breaking. At `gamma = 0` this is the myopic
/// rule: pick the action maximizing expected immediate next-state reward.
pub fn optimal_policy(mdp: &Mdp, reward: &[f64], gamma: f64, tol: f64) -> PolicyResult {
    assert!((0.0..1.0).contains(&gamma), "discount must lie in [0, 1)");
    assert_eq!(reward.len(), mdp.n_states);
    let q_value = |s: usize, a: usize, values: &[f64]| -> f64 {
        mdp.transitions[a][s]
            .iter()
            .enumerate()
            .map(|(next, p)| p * (reward[next] + gamma * values[next]))
            .sum()
    };
    let mut values = vec![0.0; mdp.n_states];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut delta = 0.0_f64;
        let mut next = vec![0.0; mdp.n_states];
        for s in 0..mdp.n_states {
            let mut best = f64::NEG_INFINITY;
            for a in 0..mdp.n_actions {
                best = best.max(q_value(s, a, &values));
            }
            delta = delta.max((best - values[s]).abs());
            next[s] = best;
        }
        values = next;
        if delta <= tol || iterations >= 1_000_000 {
            break;
        }
    }
    let policy = (0..mdp.n_states)
        .map(|s| {
            let mut best_action = 0;
            let mut best_q = q_value(s, 0, &values);
            for a in 1..mdp.n_actions {
                let q = q_value(s, a, &values);
                if q > best_q {
                    best_q = q;
                    best_action = a;
                }
            }
            best_action
        })
        .collect();
    PolicyResult {
        policy,
        values,
        iterations,
    }
}
