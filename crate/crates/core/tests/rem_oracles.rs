//! Brute-force reference implementations of both likelihoods, kept fully
//! independent of the library's evaluation path: statistics are re-counted
//! from their definitions and probabilities built with naive exp/sum
//! arithmetic, including a whole-sequence enumeration for small instances.

use remirl_core::event::{ActionSpace, ActionTriple, DyadicEvent, EventHistory};
use remirl_core::rem::{self, LikelihoodMode, RemModel};
use remirl_core::sim::{self, ChoiceRule, SimConfig};
use remirl_core::stats::StatisticSpec;

/// Reciprocity and inertia re-counted from scratch.
fn oracle_statistics(candidate: &ActionTriple, prefix: &[DyadicEvent]) -> [f64; 2] {
    let reciprocity = match prefix.last() {
        Some(last) if last.receiver == candidate.sender && last.sender == candidate.receiver => 1.0,
        _ => 0.0,
    };
    let inertia = if prefix.is_empty() {
        0.0
    } else {
        let repeats = prefix
            .iter()
            .filter(|e| {
                e.sender == candidate.sender
                    && e.receiver == candidate.receiver
                    && e.action_type == candidate.action_type
            })
            .count();
        repeats as f64 / prefix.len() as f64
    };
    [reciprocity, inertia]
}

fn oracle_rates(space: &ActionSpace, prefix: &[DyadicEvent], theta: &[f64; 2]) -> Vec<f64> {
    space
        .actions()
        .iter()
        .map(|candidate| {
            let u = oracle_statistics(candidate, prefix);
            (theta[0] * u[0] + theta[1] * u[1]).exp()
        })
        .collect()
}

fn oracle_ordinal_loglik(space: &ActionSpace, events: &[DyadicEvent], theta: &[f64; 2]) -> f64 {
    let mut loglik = 0.0;
    for i in 0..events.len() {
        let rates = oracle_rates(space, &events[..i], theta);
        let total: f64 = rates.iter().sum();
        let realized = space.index_of(&events[i].triple()).unwrap();
        loglik += (rates[realized] / total).ln();
    }
    loglik
}

fn oracle_timestamped_loglik(
    space: &ActionSpace,
    events: &[DyadicEvent],
    end_time: f64,
    theta: &[f64; 2],
) -> f64 {
    let mut loglik = 0.0;
    let mut previous = 0.0;
    for i in 0..events.len() {
        let rates = oracle_rates(space, &events[..i], theta);
        let total: f64 = rates.iter().sum();
        let realized = space.index_of(&events[i].triple()).unwrap();
        let t = events[i].timestamp.unwrap();
        loglik += rates[realized].ln() - (t - previous) * total;
        previous = t;
    }
    let rates = oracle_rates(space, events, theta);
    loglik -= (end_time - previous) * rates.iter().sum::<f64>();
    loglik
}

/// Probability of one concrete action sequence under the per-step softmax.
fn sequence_probability(space: &ActionSpace, sequence: &[usize], theta: &[f64; 2]) -> f64 {
    let mut prefix: Vec<DyadicEvent> = Vec::new();
    let mut probability = 1.0;
    for &choice in sequence {
        let rates = oracle_rates(space, &prefix, theta);
        let total: f64 = rates.iter().sum();
        probability *= rates[choice] / total;
        let t = space.action(choice);
        prefix.push(DyadicEvent::new(t.sender, t.receiver, t.action_type));
    }
    probability
}

/// Recursively enumerate every length-m sequence and its probability.
fn enumerate_sequences(
    space: &ActionSpace,
    length: usize,
    sequence: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, f64)>,
    theta: &[f64; 2],
) {
    if sequence.len() == length {
        out.push((sequence.clone(), sequence_probability(space, sequence, theta)));
        return;
    }
    for choice in 0..space.len() {
        sequence.push(choice);
        enumerate_sequences(space, length, sequence, out, theta);
        sequence.pop();
    }
}

fn specs() -> Vec<StatisticSpec> {
    vec![StatisticSpec::reciprocity(), StatisticSpec::inertia()]
}

fn simulate(space: &ActionSpace, theta: [f64; 2], n: usize, seed: u64, timestamps: bool) -> EventHistory {
    let config = SimConfig {
        rule: ChoiceRule::ProbabilityMatching,
        theta: theta.to_vec(),
        specs: specs(),
        n_events: n,
        seed,
        timestamps,
    };
    sim::simulate_events(space, &config).unwrap()
}

#[test]
fn ordinal_loglik_matches_naive_recount() {
    for seed in 0..8u64 {
        let n_actors = 3 + (seed % 2) as usize;
        let space = ActionSpace::unconstrained(n_actors, 1);
        let theta = [0.9 - 0.3 * seed as f64, -0.5 + 0.2 * seed as f64];
        let history = simulate(&space, theta, 40, seed, false);
        let oracle = oracle_ordinal_loglik(&space, history.events(), &theta);
        let model = RemModel::new(specs(), theta.to_vec());
        let library = rem::ordinal_loglik(&history, &model, &space).unwrap();
        assert!(
            (library - oracle).abs() < 1e-10,
            "seed {seed}: {library} vs {oracle}"
        );
    }
}

#[test]
fn ordinal_likelihood_agrees_with_full_enumeration() {
    // Three-action masked space so the tree stays tiny; four steps.
    let space = ActionSpace::with_mask(3, 1, |t| t.receiver.0 == (t.sender.0 + 1) % 3).unwrap();
    assert_eq!(space.len(), 3);
    let theta = [1.2, -0.7];
    let history = simulate(&space, theta, 4, 5, false);
    let observed: Vec<usize> = history
        .events()
        .iter()
        .map(|e| space.index_of(&e.triple()).unwrap())
        .collect();

    let mut all = Vec::new();
    enumerate_sequences(&space, 4, &mut Vec::new(), &mut all, &theta);
    let total: f64 = all.iter().map(|(_, p)| p).sum();
    assert!((total - 1.0).abs() < 1e-9, "sequence probabilities sum to {total}");

    let enumerated = all
        .iter()
        .find(|(s, _)| *s == observed)
        .map(|(_, p)| *p)
        .unwrap();
    let model = RemModel::new(specs(), theta.to_vec());
    let library = rem::ordinal_loglik(&history, &model, &space).unwrap();
    assert!((library.exp() - enumerated).abs() < 1e-12);
}

#[test]
fn timestamped_loglik_matches_naive_recount() {
    for seed in 0..8u64 {
        let space = ActionSpace::unconstrained(3, 1);
        let theta = [0.4 + 0.1 * seed as f64, 0.3];
        let history = simulate(&space, theta, 30, seed + 100, true);
        let end = history.end_time().unwrap() + 0.75; // open observation window
        let reopened = EventHistory::validate(history.events().to_vec(), Some(end)).unwrap();
        let oracle = oracle_timestamped_loglik(&space, reopened.events(), end, &theta);
        let model = RemModel::new(specs(), theta.to_vec());
        let library = rem::timestamped_loglik(&reopened, &model, &space).unwrap();
        assert!(
            (library - oracle).abs() < 1e-9 * oracle.abs().max(1.0),
            "seed {seed}: {library} vs {oracle}"
        );
    }
}

#[test]
fn rescaled_timestamps_match_direct_reevaluation() {
    let space = ActionSpace::unconstrained(3, 1);
    let theta = [0.8, -0.2];
    let history = simulate(&space, theta, 25, 9, true);
    let scale = 3.5;
    let rescaled_events: Vec<DyadicEvent> = history
        .events()
        .iter()
        .map(|e| {
            let mut out = e.clone();
            out.timestamp = Some(e.timestamp.unwrap() * scale);
            out
        })
        .collect();
    let end = history.end_time().unwrap() * scale;
    let rescaled = EventHistory::validate(rescaled_events, Some(end)).unwrap();
    let model = RemModel::new(specs(), theta.to_vec());
    let library = rem::timestamped_loglik(&rescaled, &model, &space).unwrap();
    let oracle = oracle_timestamped_loglik(&space, rescaled.events(), end, &theta);
    assert!((library - oracle).abs() < 1e-9 * oracle.abs().max(1.0));
}

#[test]
fn analytic_gradients_match_finite_differences_on_simulated_data() {
    for seed in 0..5u64 {
        let space = ActionSpace::unconstrained(3, 1);
        let theta = [0.6, -0.9];
        let history = simulate(&space, theta, 20, seed + 40, true);
        for mode in [LikelihoodMode::Ordinal, LikelihoodMode::Timestamped] {
            let model = RemModel::new(specs(), theta.to_vec());
            let analytic = rem::loglik_gradient(&history, &model, &space, mode).unwrap();
            let h = 1e-5;
            for j in 0..2 {
                let mut plus = theta;
                plus[j] += h;
                let mut minus = theta;
                minus[j] -= h;
                let eval = |t: [f64; 2]| -> f64 {
                    let m = RemModel::new(specs(), t.to_vec());
                    match mode {
                        LikelihoodMode::Ordinal => rem::ordinal_loglik(&history, &m, &space).unwrap(),
                        LikelihoodMode::Timestamped => {
                            rem::timestamped_loglik(&history, &m, &space).unwrap()
                        }
                    }
                };
                let numeric = (eval(plus) - eval(minus)) / (2.0 * h);
                let relative = (analytic[j] - numeric).abs() / analytic[j].abs().max(1.0);
                assert!(relative < 1e-6, "seed {seed} mode {mode:?} coord {j}");
            }
        }
    }
}
