//! Sufficient statistics of candidate actions given a history prefix.
//!
//! Each statistic scores one candidate (sender, receiver, type) triple
//! against the events realized so far; a statistic matrix stacks those
//! scores for every action in a space. The scalar functions here are the
//! defining forms (direct counting over the prefix); the
//! [`StatisticsAccumulator`] computes the same values incrementally in one
//! pass over a history, which is what the likelihood and simulation code
//! uses. The two paths are checked against each other in tests.

use std::fmt;

use crate::error::{Error, Result};
use crate::event::{window, ActionSpace, ActionTriple, DyadicEvent, EventHistory};

/// Which statistic to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticKind {
    /// 1 when the candidate reverses the most recent event's sender and
    /// receiver (action type ignored), else 0.
    Reciprocity,
    /// Fraction of prefix events equal to the candidate in sender,
    /// receiver, and type.
    Inertia,
    /// Fraction of prefix events sent by the candidate's sender.
    SenderActivity,
    /// Fraction of prefix events received by the candidate's receiver.
    ReceiverPopularity,
    /// Copy of the candidate action's j-th covariate (0 when absent).
    Covariate(usize),
}

/// A statistic plus its memory parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatisticSpec {
    pub kind: StatisticKind,
    /// Number of most recent events visible to the statistic.
    /// `None` means the full history.
    pub window: Option<usize>,
    /// When false, count-based statistics report raw counts instead of
    /// prefix-length fractions.
    pub normalized: bool,
}

impl StatisticSpec {
    pub fn new(kind: StatisticKind) -> Self {
        Self {
            kind,
            window: None,
            normalized: true,
        }
    }

    pub fn reciprocity() -> Self {
        Self::new(StatisticKind::Reciprocity)
    }

    pub fn inertia() -> Self {
        Self::new(StatisticKind::Inertia)
    }

    pub fn sender_activity() -> Self {
        Self::new(StatisticKind::SenderActivity)
    }

    pub fn receiver_popularity() -> Self {
        Self::new(StatisticKind::ReceiverPopularity)
    }

    pub fn covariate(index: usize) -> Self {
        Self::new(StatisticKind::Covariate(index))
    }

    pub fn with_window(mut self, k: usize) -> Self {
        self.window = Some(k);
        self
    }

    /// Switch count-based statistics to raw counts.
    pub fn raw_counts(mut self) -> Self {
        self.normalized = false;
        self
    }
}

impl fmt::Display for StatisticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StatisticKind::Reciprocity => write!(f, "reciprocity")?,
            StatisticKind::Inertia => write!(f, "inertia")?,
            StatisticKind::SenderActivity => write!(f, "sender_activity")?,
            StatisticKind::ReceiverPopularity => write!(f, "receiver_popularity")?,
            StatisticKind::Covariate(j) => write!(f, "cov{j}")?,
        }
        if let Some(k) = self.window {
            write!(f, "@{k}")?;
        }
        Ok(())
    }
}

/// Parse a comma-separated spec list such as `reciprocity,inertia@50`.
/// Names: `reciprocity`, `inertia`, `sender_activity`, `receiver_popularity`,
/// `cov<j>`; an optional `@k` suffix bounds the memory window.
pub fn parse_spec_list(text: &str) -> Result<Vec<StatisticSpec>> {
    let mut specs = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, win) = match part.split_once('@') {
            Some((n, w)) => {
                let k = w.parse::<usize>().map_err(|_| Error::UnknownStatistic {
                    spec: part.to_owned(),
                })?;
                (n, Some(k))
            }
            None => (part, None),
        };
        let mut spec = match name {
            "reciprocity" => StatisticSpec::reciprocity(),
            "inertia" => StatisticSpec::inertia(),
            "sender_activity" => StatisticSpec::sender_activity(),
            "receiver_popularity" => StatisticSpec::receiver_popularity(),
            other => {
                let j = other
                    .strip_prefix("cov")
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| Error::UnknownStatistic {
                        spec: part.to_owned(),
                    })?;
                StatisticSpec::covariate(j)
            }
        };
        spec.window = win;
        specs.push(spec);
    }
    if specs.is_empty() {
        return Err(Error::UnknownStatistic { spec: text.into() });
    }
    Ok(specs)
}

/// 1 iff the most recent prefix event exists and the candidate reverses its
/// sender and receiver; the action type plays no role.
pub fn reciprocity(candidate: &ActionTriple, prefix: &[DyadicEvent]) -> f64 {
    match prefix.last() {
        Some(last) if candidate.sender == last.receiver && candidate.receiver == last.sender => 1.0,
        _ => 0.0,
    }
}

/// Fraction of prefix events matching the candidate in sender, receiver,
/// and type; 0 on an empty prefix.
pub fn inertia(candidate: &ActionTriple, prefix: &[DyadicEvent]) -> f64 {
    fraction(prefix, |e| e.triple() == *candidate)
}

/// Fraction of prefix events whose sender is the candidate's sender;
/// 0 on an empty prefix.
pub fn sender_activity(candidate: &ActionTriple, prefix: &[DyadicEvent]) -> f64 {
    fraction(prefix, |e| e.sender == candidate.sender)
}

/// Fraction of prefix events whose receiver is the candidate's receiver;
/// 0 on an empty prefix.
pub fn receiver_popularity(candidate: &ActionTriple, prefix: &[DyadicEvent]) -> f64 {
    fraction(prefix, |e| e.receiver == candidate.receiver)
}

fn fraction<F: Fn(&DyadicEvent) -> bool>(prefix: &[DyadicEvent], pred: F) -> f64 {
    if prefix.is_empty() {
        return 0.0;
    }
    prefix.iter().filter(|e| pred(e)).count() as f64 / prefix.len() as f64
}

/// One spec for one candidate against one prefix, with the spec's window
/// applied. Covariate specs evaluate to 0 here; per-action covariates only
/// exist on the vectorized path.
pub fn evaluate(spec: &StatisticSpec, candidate: &ActionTriple, prefix: &[DyadicEvent]) -> f64 {
    let effective = match spec.window {
        Some(k) => window(prefix, k, prefix.len()),
        None => prefix,
    };
    scalar_value(spec, candidate, effective, 0, None)
        .expect("covariate-free scalar evaluation cannot fail")
}

/// The |A| x d matrix of statistic values for one history prefix:
/// a row per candidate action in space order, a column per spec.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticMatrix {
    values: Vec<f64>, // row-major
    n_actions: usize,
    n_stats: usize,
}

impl StatisticMatrix {
    fn zeros(n_actions: usize, n_stats: usize) -> Self {
        Self {
            values: vec![0.0; n_actions * n_stats],
            n_actions,
            n_stats,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_stats(&self) -> usize {
        self.n_stats
    }

    pub fn get(&self, action: usize, stat: usize) -> f64 {
        self.values[action * self.n_stats + stat]
    }

    fn set(&mut self, action: usize, stat: usize, value: f64) {
        self.values[action * self.n_stats + stat] = value;
    }

    /// Statistic vector u(a, ·) for one candidate action.
    pub fn row(&self, action: usize) -> &[f64] {
        &self.values[action * self.n_stats..(action + 1) * self.n_stats]
    }
}

fn scalar_value(
    spec: &StatisticSpec,
    candidate: &ActionTriple,
    effective_prefix: &[DyadicEvent],
    position: usize,
    covariates: Option<&[Vec<f64>]>,
) -> Result<f64> {
    let value = match spec.kind {
        StatisticKind::Reciprocity => reciprocity(candidate, effective_prefix),
        StatisticKind::Inertia => denormalize(inertia(candidate, effective_prefix), spec, effective_prefix),
        StatisticKind::SenderActivity => {
            denormalize(sender_activity(candidate, effective_prefix), spec, effective_prefix)
        }
        StatisticKind::ReceiverPopularity => {
            denormalize(receiver_popularity(candidate, effective_prefix), spec, effective_prefix)
        }
        StatisticKind::Covariate(j) => match covariates {
            None => 0.0,
            Some(rows) => {
                let row = &rows[position];
                if j >= row.len() {
                    return Err(Error::CovariateDimensionMismatch {
                        index: j,
                        dim: row.len(),
                    });
                }
                row[j]
            }
        },
    };
    Ok(value)
}

fn denormalize(fraction: f64, spec: &StatisticSpec, prefix: &[DyadicEvent]) -> f64 {
    if spec.normalized {
        fraction
    } else {
        // Undo the division; counts are exactly representable so this is exact.
        (fraction * prefix.len() as f64).round()
    }
}

/// Evaluate every spec for every action in the space against one history
/// prefix. Per-spec windows are applied by truncating the prefix to its
/// most recent events. `covariates`, when given, holds one vector per
/// action in space order.
pub fn statistics_matrix(
    space: &ActionSpace,
    prefix: &[DyadicEvent],
    specs: &[StatisticSpec],
    covariates: Option<&[Vec<f64>]>,
) -> Result<StatisticMatrix> {
    assert!(!specs.is_empty(), "at least one statistic spec is required");
    if let Some(rows) = covariates {
        assert_eq!(
            rows.len(),
            space.len(),
            "per-action covariates must cover the whole action space"
        );
    }
    let mut matrix = StatisticMatrix::zeros(space.len(), specs.len());
    for (col, spec) in specs.iter().enumerate() {
        let effective = match spec.window {
            Some(k) => window(prefix, k, prefix.len()),
            None => prefix,
        };
        for (pos, candidate) in space.actions().iter().enumerate() {
            let value = scalar_value(spec, candidate, effective, pos, covariates)?;
            matrix.set(pos, col, value);
        }
    }
    Ok(matrix)
}

enum Counter {
    Reciprocity,
    Triples { counts: Vec<u32> },
    Senders { counts: Vec<u32> },
    Receivers { counts: Vec<u32> },
    Covariate { index: usize },
}

/// One-pass incremental statistics over a growing history. Push events in
/// order and ask for the matrix of the current prefix at any point; values
/// are identical to [`statistics_matrix`] on the same prefix.
pub struct StatisticsAccumulator<'a> {
    space: &'a ActionSpace,
    specs: &'a [StatisticSpec],
    covariates: Option<&'a [Vec<f64>]>,
    events: Vec<DyadicEvent>,
    counters: Vec<Counter>,
}

impl<'a> StatisticsAccumulator<'a> {
    pub fn new(
        space: &'a ActionSpace,
        specs: &'a [StatisticSpec],
        covariates: Option<&'a [Vec<f64>]>,
    ) -> Result<Self> {
        assert!(!specs.is_empty(), "at least one statistic spec is required");
        if let Some(rows) = covariates {
            assert_eq!(rows.len(), space.len());
            for row in rows {
                for spec in specs {
                    if let StatisticKind::Covariate(j) = spec.kind {
                        if j >= row.len() {
                            return Err(Error::CovariateDimensionMismatch {
                                index: j,
                                dim: row.len(),
                            });
                        }
                    }
                }
            }
        }
        let n = space.n_actors();
        let counters = specs
            .iter()
            .map(|spec| match spec.kind {
                StatisticKind::Reciprocity => Counter::Reciprocity,
                StatisticKind::Inertia => Counter::Triples {
                    counts: vec![0; n * n * space.n_types()],
                },
                StatisticKind::SenderActivity => Counter::Senders { counts: vec![0; n] },
                StatisticKind::ReceiverPopularity => Counter::Receivers { counts: vec![0; n] },
                StatisticKind::Covariate(index) => Counter::Covariate { index },
            })
            .collect();
        Ok(Self {
            space,
            specs,
            covariates,
            events: Vec::new(),
            counters,
        })
    }

    fn triple_slot(&self, t: &ActionTriple) -> usize {
        (t.sender.0 * self.space.n_actors() + t.receiver.0) * self.space.n_types() + t.action_type
    }

    /// Append one realized event to the prefix.
    pub fn push(&mut self, event: DyadicEvent) {
        self.events.push(event);
        let len = self.events.len();
        for (spec, counter) in self.specs.iter().zip(&mut self.counters) {
            // Event entering this spec's window, and the one leaving it.
            let entering = self.events[len - 1].clone();
            let leaving = match spec.window {
                Some(w) if len > w => {
                    if w == 0 {
                        continue; // window of zero never sees any event
                    }
                    Some(self.events[len - 1 - w].clone())
                }
                _ => None,
            };
            match counter {
                Counter::Reciprocity | Counter::Covariate { .. } => {}
                Counter::Triples { counts } => {
                    let slot = (entering.sender.0 * self.space.n_actors() + entering.receiver.0)
                        * self.space.n_types()
                        + entering.action_type;
                    counts[slot] += 1;
                    if let Some(old) = leaving {
                        let slot = (old.sender.0 * self.space.n_actors() + old.receiver.0)
                            * self.space.n_types()
                            + old.action_type;
                        counts[slot] -= 1;
                    }
                }
                Counter::Senders { counts } => {
                    counts[entering.sender.0] += 1;
                    if let Some(old) = leaving {
                        counts[old.sender.0] -= 1;
                    }
                }
                Counter::Receivers { counts } => {
                    counts[entering.receiver.0] += 1;
                    if let Some(old) = leaving {
                        counts[old.receiver.0] -= 1;
                    }
                }
            }
        }
    }

    pub fn prefix_len(&self) -> usize {
        self.events.len()
    }

    /// Statistic matrix for the current prefix.
    pub fn matrix(&self) -> StatisticMatrix {
        let mut matrix = StatisticMatrix::zeros(self.space.len(), self.specs.len());
        for (col, (spec, counter)) in self.specs.iter().zip(&self.counters).enumerate() {
            let visible = match spec.window {
                Some(w) => w.min(self.events.len()),
                None => self.events.len(),
            };
            for (pos, candidate) in self.space.actions().iter().enumerate() {
                let value = match counter {
                    Counter::Reciprocity => {
                        if visible == 0 {
                            0.0
                        } else {
                            reciprocity(candidate, &self.events)
                        }
                    }
                    Counter::Triples { counts } => {
                        normalize(counts[self.triple_slot(candidate)], visible, spec)
                    }
                    Counter::Senders { counts } => {
                        normalize(counts[candidate.sender.0], visible, spec)
                    }
                    Counter::Receivers { counts } => {
                        normalize(counts[candidate.receiver.0], visible, spec)
                    }
                    Counter::Covariate { index } => self
                        .covariates
                        .map_or(0.0, |rows| rows[pos][*index]),
                };
                matrix.set(pos, col, value);
            }
        }
        matrix
    }
}

fn normalize(count: u32, visible: usize, spec: &StatisticSpec) -> f64 {
    if spec.normalized {
        if visible == 0 {
            0.0
        } else {
            count as f64 / visible as f64
        }
    } else {
        count as f64
    }
}

/// Statistic matrices for every prefix of a history, one pass.
///
/// Entry `i` is the matrix for the prefix of the first `i` events, so the
/// result has `M + 1` entries; the last one covers the full history (used
/// by the trailing survival term of the timestamped likelihood).
pub fn history_design(
    space: &ActionSpace,
    history: &EventHistory,
    specs: &[StatisticSpec],
    covariates: Option<&[Vec<f64>]>,
) -> Result<Vec<StatisticMatrix>> {
    let mut acc = StatisticsAccumulator::new(space, specs, covariates)?;
    let mut matrices = Vec::with_capacity(history.len() + 1);
    for event in history.events() {
        matrices.push(acc.matrix());
        acc.push(event.clone());
    }
    matrices.push(acc.matrix());
    Ok(matrices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::ActorId;

    fn ev(s: usize, r: usize) -> DyadicEvent {
        DyadicEvent::new(ActorId(s), ActorId(r), 0)
    }

    fn triple(s: usize, r: usize) -> ActionTriple {
        ActionTriple {
            sender: ActorId(s),
            receiver: ActorId(r),
            action_type: 0,
        }
    }

    #[test]
    fn reciprocity_flags_reversed_pair_only() {
        let prefix = vec![ev(0, 1)];
        assert_eq!(reciprocity(&triple(1, 0), &prefix), 1.0);
        assert_eq!(reciprocity(&triple(0, 1), &prefix), 0.0);
        assert_eq!(reciprocity(&triple(1, 0), &[]), 0.0);
    }

    #[test]
    fn reciprocity_ignores_action_type() {
        let mut e = ev(0, 1);
        e.action_type = 1;
        let space_candidate = triple(1, 0); // type 0
        assert_eq!(reciprocity(&space_candidate, &[e]), 1.0);
    }

    #[test]
    fn inertia_counts_exact_triple_repeats() {
        let prefix = vec![ev(0, 1), ev(0, 1), ev(1, 0), ev(2, 0)];
        assert_eq!(inertia(&triple(0, 1), &prefix), 0.5);
        assert_eq!(inertia(&triple(0, 1), &[]), 0.0);
        let all_same = vec![ev(0, 1), ev(0, 1), ev(0, 1)];
        assert_eq!(inertia(&triple(0, 1), &all_same), 1.0);
    }

    #[test]
    fn sender_activity_counts_sender_share() {
        let prefix = vec![ev(0, 1), ev(0, 2), ev(1, 0)];
        assert!((sender_activity(&triple(0, 2), &prefix) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(sender_activity(&triple(0, 1), &[]), 0.0);
        let only_a = vec![ev(0, 1), ev(0, 2)];
        assert_eq!(sender_activity(&triple(0, 1), &only_a), 1.0);
    }

    #[test]
    fn receiver_popularity_counts_receiver_share() {
        let prefix = vec![ev(0, 1), ev(2, 1), ev(1, 0)];
        assert!((receiver_popularity(&triple(2, 1), &prefix) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_reciprocity_column_for_two_actions() {
        let space = ActionSpace::unconstrained(2, 1);
        let prefix = vec![ev(0, 1)];
        let m = statistics_matrix(&space, &prefix, &[StatisticSpec::reciprocity()], None).unwrap();
        // Space order is [(0->1), (1->0)].
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(1, 0), 1.0);
    }

    #[test]
    fn matrix_on_empty_prefix_is_zero() {
        let space = ActionSpace::unconstrained(3, 1);
        let specs = [StatisticSpec::reciprocity(), StatisticSpec::inertia()];
        let m = statistics_matrix(&space, &[], &specs, None).unwrap();
        for a in 0..space.len() {
            assert_eq!(m.row(a), &[0.0, 0.0]);
        }
    }

    #[test]
    fn windowed_inertia_sees_only_recent_events() {
        let space = ActionSpace::unconstrained(3, 1);
        let prefix = vec![ev(0, 1), ev(0, 1), ev(1, 0), ev(2, 0)];
        let spec = StatisticSpec::inertia().with_window(2);
        let m = statistics_matrix(&space, &prefix, &[spec], None).unwrap();
        let pos = space.index_of(&triple(0, 1)).unwrap();
        // Last two events are (1->0) and (2->0): no (0->1) in window.
        assert_eq!(m.get(pos, 0), 0.0);
        let pos_back = space.index_of(&triple(1, 0)).unwrap();
        assert_eq!(m.get(pos_back, 0), 0.5);
    }

    #[test]
    fn raw_count_variant_returns_counts() {
        let space = ActionSpace::unconstrained(2, 1);
        let prefix = vec![ev(0, 1), ev(0, 1), ev(1, 0)];
        let spec = StatisticSpec::inertia().raw_counts();
        let m = statistics_matrix(&space, &prefix, &[spec], None).unwrap();
        let pos = space.index_of(&triple(0, 1)).unwrap();
        assert_eq!(m.get(pos, 0), 2.0);
    }

    #[test]
    fn covariate_column_copies_per_action_values() {
        let space = ActionSpace::unconstrained(2, 1);
        let covs = vec![vec![0.7], vec![-1.25]];
        let m = statistics_matrix(&space, &[], &[StatisticSpec::covariate(0)], Some(&covs))
            .unwrap();
        assert_eq!(m.get(0, 0), 0.7);
        assert_eq!(m.get(1, 0), -1.25);
    }

    #[test]
    fn covariate_without_vectors_is_zero() {
        let space = ActionSpace::unconstrained(2, 1);
        let m = statistics_matrix(&space, &[], &[StatisticSpec::covariate(0)], None).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn covariate_index_out_of_range_rejected() {
        let space = ActionSpace::unconstrained(2, 1);
        let covs = vec![vec![0.7], vec![-1.25]];
        let err =
            statistics_matrix(&space, &[], &[StatisticSpec::covariate(3)], Some(&covs))
                .unwrap_err();
        assert!(matches!(err, Error::CovariateDimensionMismatch { index: 3, dim: 1 }));
    }

    #[test]
    fn accumulator_matches_direct_evaluation_at_every_step() {
        let space = ActionSpace::unconstrained(3, 2);
        let mut events = Vec::new();
        // Deterministic pseudo-random-ish walk over the space.
        for i in 0..40usize {
            let t = space.action((i * 7 + 3) % space.len());
            let mut e = DyadicEvent::new(t.sender, t.receiver, t.action_type);
            e.timestamp = None;
            events.push(e);
        }
        let history = EventHistory::validate(events.clone(), None).unwrap();
        let specs = [
            StatisticSpec::reciprocity(),
            StatisticSpec::inertia(),
            StatisticSpec::inertia().with_window(5),
            StatisticSpec::sender_activity().with_window(3),
            StatisticSpec::receiver_popularity(),
            StatisticSpec::inertia().raw_counts().with_window(4),
        ];
        let design = history_design(&space, &history, &specs, None).unwrap();
        assert_eq!(design.len(), events.len() + 1);
        for (i, matrix) in design.iter().enumerate() {
            let direct = statistics_matrix(&space, &events[..i], &specs, None).unwrap();
            assert_eq!(matrix, &direct, "mismatch at prefix length {i}");
        }
    }

    #[test]
    fn realized_row_matches_scalar_functions() {
        let space = ActionSpace::unconstrained(3, 1);
        let events = vec![ev(0, 1), ev(1, 0), ev(1, 2), ev(0, 1)];
        let specs = [
            StatisticSpec::reciprocity(),
            StatisticSpec::inertia(),
            StatisticSpec::sender_activity(),
        ];
        for i in 0..events.len() {
            let prefix = &events[..i];
            let m = statistics_matrix(&space, prefix, &specs, None).unwrap();
            let t = events[i].triple();
            let pos = space.index_of(&t).unwrap();
            assert_eq!(m.get(pos, 0), reciprocity(&t, prefix));
            assert_eq!(m.get(pos, 1), inertia(&t, prefix));
            assert_eq!(m.get(pos, 2), sender_activity(&t, prefix));
        }
    }

    #[test]
    fn spec_list_parses_names_and_windows() {
        let specs = parse_spec_list("reciprocity,inertia@50, sender_activity ,cov2").unwrap();
        assert_eq!(specs.len(), 4);
        assert_eq!(specs[0], StatisticSpec::reciprocity());
        assert_eq!(specs[1], StatisticSpec::inertia().with_window(50));
        assert_eq!(specs[2], StatisticSpec::sender_activity());
        assert_eq!(specs[3], StatisticSpec::covariate(2));
        assert!(parse_spec_list("transitivity").is_err());
        assert!(parse_spec_list("").is_err());
    }

    #[test]
    fn spec_display_round_trips() {
        let specs = [
            StatisticSpec::reciprocity(),
            StatisticSpec::inertia().with_window(50),
            StatisticSpec::covariate(1),
        ];
        let joined = specs
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",");
        assert_eq!(joined, "reciprocity,inertia@50,cov1");
        assert_eq!(parse_spec_list(&joined).unwrap(), specs.to_vec());
    }
}
