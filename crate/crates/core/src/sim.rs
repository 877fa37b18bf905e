//! Seeded generators for synthetic data: event histories from known
//! coefficients under configurable action-choice rules, and MDP
//! trajectories from known rewards. These are the oracles behind every
//! closed-loop recovery test.
//!
//! All randomness flows through an explicitly seeded counter-based stream
//! cipher; distributions are derived from raw 64-bit draws in-crate, so a
//! (seed, stream) pair reproduces output byte for byte on any platform.
//! Independent trajectories draw from independent streams, which keeps
//! output stable under any future parallel generation.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::event::{ActionSpace, DyadicEvent, EventHistory};
use crate::irl::soft_backward_pass;
use crate::mdp::{Mdp, Trajectory};
use crate::numeric::log_sum_exp;
use crate::stats::{StatisticsAccumulator, StatisticSpec};

/// How the next action is chosen from the candidate rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChoiceRule {
    /// Sample an action with probability proportional to its rate.
    ProbabilityMatching,
    /// Take the highest-rate action (lowest index on ties) with
    /// probability 1 - epsilon; otherwise sample uniformly.
    EpsilonGreedy(f64),
}

/// Settings for [`simulate_events`].
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub rule: ChoiceRule,
    pub theta: Vec<f64>,
    pub specs: Vec<StatisticSpec>,
    pub n_events: usize,
    pub seed: u64,
    /// Draw exponential waiting times (total-rate parameter) and stamp
    /// events with cumulative times.
    pub timestamps: bool,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Counter-based generator for a (seed, stream) pair. The 32-byte cipher
/// key is expanded from the two integers with splitmix64, keeping seeding
/// independent of any library default.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = seed ^ 0x6a09e667f3bcc908u64.wrapping_mul(stream.wrapping_add(1));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw in [0, 1) from the top 53 bits of one 64-bit output.
pub fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exponential waiting time with the given rate, by inversion.
fn sample_exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    -(1.0 - uniform_f64(rng)).ln() / rate
}

/// Sample an index with probability proportional to `exp(log_weights)`,
/// stably via max-subtraction and a cumulative scan.
fn sample_categorical_log(rng: &mut ChaCha8Rng, log_weights: &[f64]) -> usize {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let target = uniform_f64(rng) * total;
    let mut cumulative = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cumulative += w;
        if target < cumulative {
            return i;
        }
    }
    weights.len() - 1
}

fn sample_uniform_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    ((uniform_f64(rng) * n as f64) as usize).min(n - 1)
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Generate an event history from known coefficients.
///
/// Each step computes every candidate's rate given the realized prefix and
/// picks the next event by the configured rule; with timestamps enabled the
/// waiting time is exponential with the total rate, matching the survival
/// structure of the timestamped likelihood, and the observation window
/// closes at the last event. Output is fully determined by the seed.
pub fn simulate_events(space: &ActionSpace, config: &SimConfig) -> Result<EventHistory> {
    assert_eq!(config.theta.len(), config.specs.len());
    if let ChoiceRule::EpsilonGreedy(eps) = config.rule {
        assert!((0.0..=1.0).contains(&eps), "epsilon must lie in [0, 1]");
    }
    let mut rng = seeded_rng(config.seed, 0);
    let mut acc = StatisticsAccumulator::new(space, &config.specs, space.action_covariates())?;
    let mut events = Vec::with_capacity(config.n_events);
    let mut now = 0.0;
    for _ in 0..config.n_events {
        let matrix = acc.matrix();
        let log_rates: Vec<f64> = (0..space.len())
            .map(|a| {
                matrix
                    .row(a)
                    .iter()
                    .zip(&config.theta)
                    .map(|(u, t)| u * t)
                    .sum()
            })
            .collect();
        let choice = match config.rule {
            ChoiceRule::ProbabilityMatching => sample_categorical_log(&mut rng, &log_rates),
            ChoiceRule::EpsilonGreedy(eps) => {
                if uniform_f64(&mut rng) < eps {
                    sample_uniform_index(&mut rng, space.len())
                } else {
                    argmax_lowest(&log_rates)
                }
            }
        };
        let triple = space.action(choice);
        let mut event = DyadicEvent::new(triple.sender, triple.receiver, triple.action_type);
        if config.timestamps {
            let total_rate = log_sum_exp(&log_rates).exp();
            now += sample_exponential(&mut rng, total_rate);
            event.timestamp = Some(now);
        }
        acc.push(event.clone());
        events.push(event);
    }
    let end_time = config.timestamps.then_some(now);
    EventHistory::validate(events, end_time)
}

/// Sample demonstration trajectories from the soft policy induced by a
/// reward vector at the given temperature. Start states come from
/// `start_distribution` (uniform when absent); trajectory `i` draws from
/// stream `i + 1` of the seed, so trajectories are independent and the
/// output ordering is by index.
pub fn simulate_mdp(
    mdp: &Mdp,
    reward: &[f64],
    n_trajectories: usize,
    horizon: usize,
    temperature: f64,
    seed: u64,
    start_distribution: Option<&[f64]>,
) -> Vec<Trajectory> {
    assert!(temperature > 0.0, "temperature must be positive");
    assert!(horizon >= 1);
    let tempered: Vec<f64> = reward.iter().map(|r| r / temperature).collect();
    let policy = soft_backward_pass(mdp, &tempered, horizon);
    let uniform = vec![1.0 / mdp.n_states as f64; mdp.n_states];
    let start = start_distribution.unwrap_or(&uniform);
    assert_eq!(start.len(), mdp.n_states);

    let mut trajectories = Vec::with_capacity(n_trajectories);
    for t in 0..n_trajectories {
        let mut rng = seeded_rng(seed, t as u64 + 1);
        let mut state = sample_from_distribution(&mut rng, start);
        let mut steps = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let action = sample_from_distribution(&mut rng, policy.row(state));
            steps.push((state, action));
            state = sample_from_distribution(&mut rng, &mdp.transitions[action][state]);
        }
        trajectories.push(Trajectory::new(steps));
    }
    trajectories
}

fn sample_from_distribution(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let target = uniform_f64(rng);
    let mut cumulative = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cumulative += p;
        if target < cumulative {
            return i;
        }
    }
    probs.len() - 1
}
