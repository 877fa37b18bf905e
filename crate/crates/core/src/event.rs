//! Dyadic-action events, validated event histories, actor rosters, and
//! enumerable action spaces.
//!
//! A dyadic action is a directed interaction: a sender, a receiver, an
//! action type, an optional timestamp, and optional covariates. Histories
//! are time-ordered sequences of such actions starting from an origin at
//! time zero. An action space enumerates every legal (sender, receiver,
//! type) triple in a deterministic order so that statistic matrices and
//! likelihood terms index candidates consistently everywhere.

use crate::error::{Error, Result};

/// Dense index of an actor in a [`Roster`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActorId(pub usize);

/// Actor labels interned in first-appearance order. All internal computation
/// uses the dense [`ActorId`] indices; labels exist for I/O.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Roster {
    labels: Vec<String>,
}

impl Roster {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a roster from distinct labels.
    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut roster = Roster::new();
        for label in labels {
            let label = label.into();
            if roster.get(&label).is_some() {
                return Err(Error::UnknownActor { label });
            }
            roster.labels.push(label);
        }
        Ok(roster)
    }

    /// Return the id for `label`, interning it if unseen.
    pub fn intern(&mut self, label: &str) -> ActorId {
        if let Some(id) = self.get(label) {
            return id;
        }
        self.labels.push(label.to_owned());
        ActorId(self.labels.len() - 1)
    }

    pub fn get(&self, label: &str) -> Option<ActorId> {
        self.labels.iter().position(|l| l == label).map(ActorId)
    }

    /// Like [`Roster::get`] but with a typed error for unknown labels.
    pub fn resolve(&self, label: &str) -> Result<ActorId> {
        self.get(label).ok_or_else(|| Error::UnknownActor {
            label: label.to_owned(),
        })
    }

    pub fn label(&self, id: ActorId) -> &str {
        &self.labels[id.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// One directed interaction event.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicEvent {
    pub sender: ActorId,
    pub receiver: ActorId,
    pub action_type: usize,
    pub timestamp: Option<f64>,
    pub covariates: Option<Vec<f64>>,
}

impl DyadicEvent {
    /// Untimestamped, covariate-free event.
    pub fn new(sender: ActorId, receiver: ActorId, action_type: usize) -> Self {
        Self {
            sender,
            receiver,
            action_type,
            timestamp: None,
            covariates: None,
        }
    }

    pub fn at(mut self, timestamp: f64) -> Self {
        self.timestamp = Some(timestamp);
        self
    }

    pub fn triple(&self) -> ActionTriple {
        ActionTriple {
            sender: self.sender,
            receiver: self.receiver,
            action_type: self.action_type,
        }
    }
}

/// A validated, time-ordered sequence of dyadic events observed from an
/// origin at time zero up to an optional window end.
#[derive(Debug, Clone, PartialEq)]
pub struct EventHistory {
    events: Vec<DyadicEvent>,
    end_time: Option<f64>,
}

impl EventHistory {
    /// Validate raw events into a history.
    ///
    /// Rejects self-directed events, mixed timestamp presence, decreasing
    /// timestamps (including a first timestamp before the origin at 0), an
    /// end time before the last event, and inconsistent covariate lengths.
    /// Equal timestamps are allowed; ties keep their input order.
    pub fn validate(events: Vec<DyadicEvent>, end_time: Option<f64>) -> Result<Self> {
        let timestamped = events.first().map_or(false, |e| e.timestamp.is_some());
        let covariate_dim = events
            .first()
            .map_or(0, |e| e.covariates.as_ref().map_or(0, Vec::len));
        let mut previous = 0.0; // origin τ(a_0) = 0
        for (index, event) in events.iter().enumerate() {
            if event.sender == event.receiver {
                return Err(Error::SelfDirectedEvent {
                    index,
                    actor: event.sender.0,
                });
            }
            if event.timestamp.is_some() != timestamped {
                return Err(Error::MixedTimestampPresence { index });
            }
            if let Some(t) = event.timestamp {
                if t < previous {
                    return Err(Error::NonMonotoneTimestamps {
                        index,
                        previous,
                        timestamp: t,
                    });
                }
                previous = t;
            }
            let dim = event.covariates.as_ref().map_or(0, Vec::len);
            if dim != covariate_dim {
                return Err(Error::CovariateDimensionMismatch {
                    index: dim,
                    dim: covariate_dim,
                });
            }
        }
        if timestamped {
            if let Some(end) = end_time {
                if end < previous {
                    return Err(Error::EndTimeBeforeLastEvent {
                        end_time: end,
                        last_timestamp: previous,
                    });
                }
            }
        }
        Ok(Self { events, end_time })
    }

    pub fn events(&self) -> &[DyadicEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Observed origin; the history always starts at time zero.
    pub fn origin_time(&self) -> f64 {
        0.0
    }

    pub fn end_time(&self) -> Option<f64> {
        self.end_time
    }

    /// True when every event carries a timestamp (and the history is
    /// nonempty; an empty history has no timestamps to speak of).
    pub fn is_timestamped(&self) -> bool {
        self.events.first().map_or(false, |e| e.timestamp.is_some())
    }

    /// Covariate dimension shared by all events (0 when absent).
    pub fn covariate_dim(&self) -> usize {
        self.events
            .first()
            .map_or(0, |e| e.covariates.as_ref().map_or(0, Vec::len))
    }

    /// The `min(k, at_index)` most recent events strictly before position
    /// `at_index`, most-recent-last.
    ///
    /// Panics when `at_index` exceeds the history length.
    pub fn window(&self, k: usize, at_index: usize) -> &[DyadicEvent] {
        window(&self.events, k, at_index)
    }
}

/// Truncated history slice: the `min(k, at_index)` events preceding
/// `at_index` in `events`, most-recent-last.
pub fn window(events: &[DyadicEvent], k: usize, at_index: usize) -> &[DyadicEvent] {
    assert!(
        at_index <= events.len(),
        "window position {} out of range for history of length {}",
        at_index,
        events.len()
    );
    let take = k.min(at_index);
    &events[at_index - take..at_index]
}

/// A candidate (sender, receiver, type) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionTriple {
    pub sender: ActorId,
    pub receiver: ActorId,
    pub action_type: usize,
}

/// The ordered set of legal actions for a group.
///
/// Ordering is sender-major, then receiver, then type, with self-directed
/// triples excluded. A permissibility mask may remove further triples; the
/// surviving actions keep their relative order.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpace {
    n_actors: usize,
    n_types: usize,
    actions: Vec<ActionTriple>,
    // (sender * n_actors + receiver) * n_types + type -> position
    index: Vec<Option<usize>>,
    // optional descriptive covariates X_a, one vector per action
    action_covariates: Option<Vec<Vec<f64>>>,
}

impl ActionSpace {
    /// All N(N-1)*|C| directed triples.
    pub fn unconstrained(n_actors: usize, n_types: usize) -> Self {
        Self::with_mask(n_actors, n_types, |_| true)
            .expect("unmasked action space is never empty")
    }

    /// Directed triples surviving the permissibility mask.
    pub fn with_mask<F>(n_actors: usize, n_types: usize, permitted: F) -> Result<Self>
    where
        F: Fn(&ActionTriple) -> bool,
    {
        assert!(n_actors >= 2, "an action space needs at least two actors");
        assert!(n_types >= 1, "an action space needs at least one type");
        let mut actions = Vec::new();
        let mut index = vec![None; n_actors * n_actors * n_types];
        for sender in 0..n_actors {
            for receiver in 0..n_actors {
                if sender == receiver {
                    continue;
                }
                for action_type in 0..n_types {
                    let triple = ActionTriple {
                        sender: ActorId(sender),
                        receiver: ActorId(receiver),
                        action_type,
                    };
                    if !permitted(&triple) {
                        continue;
                    }
                    index[(sender * n_actors + receiver) * n_types + action_type] =
                        Some(actions.len());
                    actions.push(triple);
                }
            }
        }
        if actions.is_empty() {
            return Err(Error::EmptyActionSpace);
        }
        Ok(Self {
            n_actors,
            n_types,
            actions,
            index,
            action_covariates: None,
        })
    }

    /// Attach descriptive covariate vectors, one per action in space order.
    /// All vectors must share one length.
    pub fn with_action_covariates(mut self, covariates: Vec<Vec<f64>>) -> Result<Self> {
        if covariates.len() != self.actions.len() {
            return Err(Error::CovariateDimensionMismatch {
                index: covariates.len(),
                dim: self.actions.len(),
            });
        }
        let dim = covariates.first().map_or(0, Vec::len);
        if let Some(bad) = covariates.iter().find(|v| v.len() != dim) {
            return Err(Error::CovariateDimensionMismatch {
                index: bad.len(),
                dim,
            });
        }
        self.action_covariates = Some(covariates);
        Ok(self)
    }

    pub fn action_covariates(&self) -> Option<&[Vec<f64>]> {
        self.action_covariates.as_deref()
    }

    pub fn n_actors(&self) -> usize {
        self.n_actors
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[ActionTriple] {
        &self.actions
    }

    pub fn action(&self, position: usize) -> ActionTriple {
        self.actions[position]
    }

    /// Position of a triple in the space ordering, if permissible.
    pub fn index_of(&self, triple: &ActionTriple) -> Option<usize> {
        if triple.sender.0 >= self.n_actors
            || triple.receiver.0 >= self.n_actors
            || triple.action_type >= self.n_types
        {
            return None;
        }
        self.index
            [(triple.sender.0 * self.n_actors + triple.receiver.0) * self.n_types
                + triple.action_type]
    }

    /// Position of an event's triple, or a typed error carrying the event
    /// index for likelihood call sites.
    pub fn index_of_event(&self, event: &DyadicEvent, index: usize) -> Result<usize> {
        self.index_of(&event.triple())
            .ok_or(Error::EventOutsideActionSpace { index })
    }
}

/// Radio-team permissibility: each driver speaks only to its own captain;
/// each captain speaks to its own driver and to the other captain.
pub fn team_radio_mask(
    driver1: ActorId,
    captain1: ActorId,
    captain2: ActorId,
    driver2: ActorId,
) -> impl Fn(&ActionTriple) -> bool {
    move |t: &ActionTriple| {
        let pair = (t.sender, t.receiver);
        pair == (driver1, captain1)
            || pair == (captain1, driver1)
            || pair == (captain1, captain2)
            || pair == (captain2, captain1)
            || pair == (captain2, driver2)
            || pair == (driver2, captain2)
    }
}
