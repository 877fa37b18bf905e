//! Finite MDP construction from event histories.
//!
//! Two constructions are provided. The egocentric one re-reads a four-actor
//! radio-team event log from one captain's perspective: the latest group
//! communication defines one of 5 states and the ego's next message (or
//! lack of one) defines one of 3 actions. The group-level one takes
//! truncated windows of recent actions as states, which makes states
//! revisitable and the state space finite; its transitions are
//! deterministic window arithmetic. Transition probabilities for observed
//! trajectories are estimated empirically with add-one smoothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{ActionSpace, ActorId, DyadicEvent, EventHistory};
use crate::stats::{self, StatisticSpec};

/// Row-sum tolerance for transition matrices.
const ROW_SUM_TOL: f64 = 1e-12;

/// Default cap on group-MDP state counts.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// A finite Markov decision process with state features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `transitions[a][s][s']` = P(s' | s, a).
    pub transitions: Vec<Vec<Vec<f64>>>,
    /// `features[s]` = f(s).
    pub features: Vec<Vec<f64>>,
    pub state_labels: Vec<String>,
    pub action_labels: Vec<String>,
}

impl Mdp {
    /// Validate shapes and row-stochasticity.
    pub fn new(
        transitions: Vec<Vec<Vec<f64>>>,
        features: Vec<Vec<f64>>,
        state_labels: Vec<String>,
        action_labels: Vec<String>,
    ) -> Result<Self> {
        let n_states = state_labels.len();
        let n_actions = action_labels.len();
        assert_eq!(transitions.len(), n_actions);
        assert_eq!(features.len(), n_states);
        for (a, per_state) in transitions.iter().enumerate() {
            assert_eq!(per_state.len(), n_states);
            for (s, row) in per_state.iter().enumerate() {
                assert_eq!(row.len(), n_states);
                if row.iter().any(|p| *p < 0.0) {
                    return Err(Error::NonStochasticRow {
                        action: a,
                        state: s,
                        sum: f64::NAN,
                    });
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::NonStochasticRow { action: a, state: s, sum });
                }
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            transitions,
            features,
            state_labels,
            action_labels,
        })
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// State rewards `theta . f(s)` for a weight vector.
    pub fn state_rewards(&self, theta: &[f64]) -> Vec<f64> {
        self.features
            .iter()
            .map(|f| f.iter().zip(theta).map(|(x, t)| x * t).sum())
            .collect()
    }
}

/// An observed state-action sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    steps: Vec<(usize, usize)>,
}

impl Trajectory {
    pub fn new(steps: Vec<(usize, usize)>) -> Self {
        Self { steps }
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|&(s, _)| s)
    }
}

/// States of the egocentric radio-team MDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgoState {
    /// The ego itself spoke last (no one has chimed in since).
    Silence = 0,
    FromOwnDriver = 1,
    FromOtherCaptain = 2,
    OtherCaptainToDriver = 3,
    OtherDriverToCaptain = 4,
}

/// Actions available to the ego at every decision point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgoAction {
    Noop = 0,
    ToOwnDriver = 1,
    ToOtherCaptain = 2,
}

/// Role assignment for the egocentric view: the ego captain, its own
/// driver, the other team's captain, and the other team's driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EgoScheme {
    pub ego: ActorId,
    pub own_driver: ActorId,
    pub other_captain: ActorId,
    pub other_driver: ActorId,
}

impl EgoScheme {
    pub const N_STATES: usize = 5;
    pub const N_ACTIONS: usize = 3;

    pub fn new(
        ego: ActorId,
        own_driver: ActorId,
        other_captain: ActorId,
        other_driver: ActorId,
    ) -> Self {
        let ids = [ego, own_driver, other_captain, other_driver];
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                assert_ne!(ids[i], ids[j], "ego scheme roles must be distinct actors");
            }
        }
        Self {
            ego,
            own_driver,
            other_captain,
            other_driver,
        }
    }

    pub fn state_labels() -> Vec<String> {
        [
            "silence",
            "fromOwnDriver",
            "fromOtherCaptain",
            "otherCaptainToDriver",
            "otherDriverToCaptain",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    pub fn action_labels() -> Vec<String> {
        ["noop", "toOwnDriver", "toOtherCaptain"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    /// The state an event leaves the ego in, or `None` for a pair outside
    /// the radio-team permissibility rules.
    pub fn classify_state(&self, event: &DyadicEvent) -> Option<EgoState> {
        let (s, r) = (event.sender, event.receiver);
        if s == self.ego && (r == self.own_driver || r == self.other_captain) {
            Some(EgoState::Silence)
        } else if s == self.own_driver && r == self.ego {
            Some(EgoState::FromOwnDriver)
        } else if s == self.other_captain && r == self.ego {
            Some(EgoState::FromOtherCaptain)
        } else if s == self.other_captain && r == self.other_driver {
            Some(EgoState::OtherCaptainToDriver)
        } else if s == self.other_driver && r == self.other_captain {
            Some(EgoState::OtherDriverToCaptain)
        } else {
            None
        }
    }

    /// The decision an event reveals: the ego's message, or a noop when
    /// some other actor moved next.
    fn classify_action(&self, event: &DyadicEvent) -> Option<EgoAction> {
        if event.sender != self.ego {
            return Some(EgoAction::Noop);
        }
        if event.receiver == self.own_driver {
            Some(EgoAction::ToOwnDriver)
        } else if event.receiver == self.other_captain {
            Some(EgoAction::ToOtherCaptain)
        } else {
            None
        }
    }
}

/// Convert an event history into the ego's state-action trajectory.
///
/// After each event the ego observes the state that event defines and its
/// next move (the following event, or a noop when another actor spoke
/// next) is the action taken in that state. The final event reveals no
/// subsequent decision and emits no step, so a history of M classifiable
/// events yields M - 1 steps.
pub fn build_ego_trajectory(history: &EventHistory, scheme: &EgoScheme) -> Result<Trajectory> {
    let events = history.events();
    // Validate every event up front, including the final one.
    for (index, event) in events.iter().enumerate() {
        if scheme.classify_state(event).is_none() {
            return Err(Error::UnclassifiableEvent {
                index,
                sender: event.sender.0,
                receiver: event.receiver.0,
            });
        }
    }
    let mut steps = Vec::with_capacity(events.len().saturating_sub(1));
    for pair in events.windows(2) {
        let state = scheme
            .classify_state(&pair[0])
            .expect("validated above");
        let action = scheme
            .classify_action(&pair[1])
            .expect("validated above");
        steps.push((state as usize, action as usize));
    }
    Ok(Trajectory::new(steps))
}

/// Empirical transition probabilities with additive smoothing:
/// `P[a][s][s'] = (count(s,a,s') + smoothing) / (count(s,a,.) + smoothing * n_states)`.
///
/// With `smoothing = 0` every (state, action) pair must have at least one
/// observed outgoing transition.
pub fn estimate_transitions(
    trajectories: &[Trajectory],
    n_states: usize,
    n_actions: usize,
    smoothing: f64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    assert!(smoothing >= 0.0, "smoothing must be non-negative");
    assert!(n_states > 0 && n_actions > 0);
    let mut counts = vec![vec![vec![0u64; n_states]; n_states]; n_actions];
    for trajectory in trajectories {
        for pair in trajectory.steps().windows(2) {
            let (s, a) = pair[0];
            let (next, _) = pair[1];
            assert!(s < n_states && a < n_actions && next < n_states);
            counts[a][s][next] += 1;
        }
    }
    let mut transitions = vec![vec![vec![0.0; n_states]; n_states]; n_actions];
    for a in 0..n_actions {
        for s in 0..n_states {
            let total: u64 = counts[a][s].iter().sum();
            if smoothing == 0.0 && total == 0 {
                return Err(Error::UnobservedStateAction { state: s, action: a });
            }
            let denominator = total as f64 + smoothing * n_states as f64;
            for next in 0..n_states {
                transitions[a][s][next] = (counts[a][s][next] as f64 + smoothing) / denominator;
            }
        }
    }
    Ok(transitions)
}

/// Identity feature matrix: one indicator feature per state.
pub fn one_hot_features(n_states: usize) -> Vec<Vec<f64>> {
    (0..n_states)
        .map(|s| {
            let mut row = vec![0.0; n_states];
            row[s] = 1.0;
            row
        })
        .collect()
}

/// Enumerate all windows of at most `k` action indices,
/// length-lexicographically: the empty window first, then length 1 in
/// action order, then length 2, and so on.
fn state_windows(n_actions: usize, k: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    let mut total: usize = 0;
    let mut block: usize = 1;
    for _ in 0..=k {
        total = total.saturating_add(block);
        block = block.saturating_mul(n_actions);
        if total > cap {
            return Err(Error::StateSpaceTooLarge {
                k,
                n_actions,
                states: total,
                cap,
            });
        }
    }
    let mut windows: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(frontier.len() * n_actions);
        for w in &frontier {
            for a in 0..n_actions {
                let mut grown = w.clone();
                grown.push(a);
                next.push(grown);
            }
        }
        windows.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(windows)
}

fn window_index(window: &[usize], n_actions: usize) -> usize {
    let mut offset = 0;
    let mut block = 1;
    for _ in 0..window.len() {
        offset += block;
        block *= n_actions;
    }
    let mut rank = 0;
    for &a in window {
        rank = rank * n_actions + a;
    }
    offset + rank
}

fn group_state_label(window: &[usize], space: &ActionSpace) -> String {
    if window.is_empty() {
        return "start".to_string();
    }
    window
        .iter()
        .map(|&a| group_action_label(a, space))
        .collect::<Vec<_>>()
        .join("|")
}

fn group_action_label(position: usize, space: &ActionSpace) -> String {
    let t = space.action(position);
    if space.n_types() == 1 {
        format!("{}->{}", t.sender.0, t.receiver.0)
    } else {
        format!("{}->{}:{}", t.sender.0, t.receiver.0, t.action_type)
    }
}

/// Group-level MDP over truncated history windows with one-hot features.
///
/// States are all sequences of at most `k` actions (shorter ones cover the
/// start of a history); taking action `a` in window `w` moves with
/// probability 1 to `(w + a)` truncated to the `k` most recent actions.
/// Note the dense transition tensor costs `|A| * states^2` floats.
pub fn build_group_mdp(space: &ActionSpace, k: usize) -> Result<Mdp> {
    build_group_mdp_with_cap(space, k, DEFAULT_STATE_CAP)
}

/// [`build_group_mdp`] with an explicit state-count cap.
pub fn build_group_mdp_with_cap(space: &ActionSpace, k: usize, cap: usize) -> Result<Mdp> {
    let mdp = group_mdp_skeleton(space, k, cap)?;
    Ok(mdp)
}

fn group_mdp_skeleton(space: &ActionSpace, k: usize, cap: usize) -> Result<Mdp> {
    let n_actions = space.len();
    let windows = state_windows(n_actions, k, cap)?;
    let n_states = windows.len();
    let mut transitions = vec![vec![vec![0.0; n_states]; n_states]; n_actions];
    for (s, w) in windows.iter().enumerate() {
        for a in 0..n_actions {
            let mut successor = w.clone();
            successor.push(a);
            if successor.len() > k {
                successor.remove(0);
            }
            transitions[a][s][window_index(&successor, n_actions)] = 1.0;
        }
    }
    let state_labels: Vec<String> = windows.iter().map(|w| group_state_label(w, space)).collect();
    let action_labels: Vec<String> = (0..n_actions)
        .map(|a| group_action_label(a, space))
        .collect();
    Mdp::new(
        transitions,
        one_hot_features(n_states),
        state_labels,
        action_labels,
    )
}

/// Group-level MDP whose state features are the sufficient statistics of
/// the most recent action in each window, evaluated against the window
/// contents before it. The empty window gets zero features. `k` should be
/// large enough to cover every spec's memory window.
pub fn rem_feature_mdp(space: &ActionSpace, k: usize, specs: &[StatisticSpec]) -> Result<Mdp> {
    rem_feature_mdp_with_cap(space, k, specs, DEFAULT_STATE_CAP)
}

/// [`rem_feature_mdp`] with an explicit state-count cap.
pub fn rem_feature_mdp_with_cap(
    space: &ActionSpace,
    k: usize,
    specs: &[StatisticSpec],
    cap: usize,
) -> Result<Mdp> {
    let mut mdp = group_mdp_skeleton(space, k, cap)?;
    let windows = state_windows(space.len(), k, cap)?;
    let mut features = Vec::with_capacity(windows.len());
    for w in &windows {
        if w.is_empty() {
            features.push(vec![0.0; specs.len()]);
            continue;
        }
        let last = space.action(w[w.len() - 1]);
        let prefix: Vec<DyadicEvent> = w[..w.len() - 1]
            .iter()
            .map(|&a| {
                let t = space.action(a);
                DyadicEvent::new(t.sender, t.receiver, t.action_type)
            })
            .collect();
        features.push(
            specs
                .iter()
                .map(|spec| stats::evaluate(spec, &last, &prefix))
                .collect(),
        );
    }
    mdp.features = features;
    Ok(mdp)
}
