//! Property tests over randomly generated histories and spaces.

use proptest::prelude::*;

use remirl_core::csv::{parse_event_csv, write_event_csv};
use remirl_core::event::{ActionSpace, ActorId, DyadicEvent, EventHistory, Roster};
use remirl_core::mdp::build_group_mdp;
use remirl_core::rem::{self, RemModel};
use remirl_core::stats::{history_design, statistics_matrix, StatisticSpec};

#[derive(Debug, Clone)]
struct RawHistory {
    n_actors: usize,
    n_types: usize,
    events: Vec<DyadicEvent>,
}

fn arb_history(max_events: usize) -> impl Strategy<Value = RawHistory> {
    (2usize..=4, 1usize..=2)
        .prop_flat_map(move |(n_actors, n_types)| {
            let event = (0..n_actors, 1..n_actors, 0..n_types).prop_map(
                move |(sender, offset, action_type)| {
                    // Receiver by rotation keeps sender != receiver.
                    (sender, (sender + offset) % n_actors, action_type)
                },
            );
            (
                Just(n_actors),
                Just(n_types),
                prop::collection::vec(event, 0..=max_events),
                prop::bool::ANY,
                prop::collection::vec(0.0f64..10.0, max_events),
            )
        })
        .prop_map(|(n_actors, n_types, triples, timestamped, raw_times)| {
            let mut waits = raw_times;
            waits.truncate(triples.len());
            let mut now = 0.0;
            let events = triples
                .into_iter()
                .enumerate()
                .map(|(i, (s, r, c))| {
                    let mut e = DyadicEvent::new(ActorId(s), ActorId(r), c);
                    if timestamped {
                        now += waits.get(i).copied().unwrap_or(1.0);
                        e.timestamp = Some(now);
                    }
                    e
                })
                .collect();
            RawHistory {
                n_actors,
                n_types,
                events,
            }
        })
}

proptest! {
    #[test]
    fn csv_round_trip_reproduces_history(raw in arb_history(25)) {
        let history = EventHistory::validate(raw.events.clone(), None).unwrap();
        let roster = Roster::from_labels(
            (0..raw.n_actors).map(|i| format!("A{i}"))
        ).unwrap();
        let text = write_event_csv(&history, &roster);
        let parsed = parse_event_csv(&text).unwrap();
        let reparsed = EventHistory::validate(parsed.events, None).unwrap();
        // Actor ids can be re-interned in a different order; map back
        // through labels before comparing.
        let relabel: Vec<usize> = parsed.roster.labels().iter()
            .map(|l| roster.get(l).unwrap().0)
            .collect();
        let restored: Vec<DyadicEvent> = reparsed.events().iter().map(|e| {
            let mut out = e.clone();
            out.sender = ActorId(relabel[e.sender.0]);
            out.receiver = ActorId(relabel[e.receiver.0]);
            out
        }).collect();
        prop_assert_eq!(restored, history.events().to_vec());
    }

    #[test]
    fn window_nests_and_grows_by_at_most_one(raw in arb_history(25), k in 0usize..6) {
        let history = EventHistory::validate(raw.events, None).unwrap();
        for at in 0..=history.len() {
            let small = history.window(k, at);
            let large = history.window(k + 1, at);
            prop_assert!(large.len() - small.len() <= 1);
            // The smaller window is a suffix of the larger one.
            prop_assert_eq!(small, &large[large.len() - small.len()..]);
        }
    }

    #[test]
    fn fraction_statistics_stay_in_unit_interval(raw in arb_history(25)) {
        let space = ActionSpace::unconstrained(raw.n_actors, raw.n_types);
        let specs = [
            StatisticSpec::reciprocity(),
            StatisticSpec::inertia(),
            StatisticSpec::sender_activity(),
            StatisticSpec::receiver_popularity(),
            StatisticSpec::inertia().with_window(3),
        ];
        for i in 0..=raw.events.len() {
            let m = statistics_matrix(&space, &raw.events[..i], &specs, None).unwrap();
            for a in 0..space.len() {
                for (j, v) in m.row(a).iter().enumerate() {
                    prop_assert!((0.0..=1.0).contains(v), "stat {j} = {v}");
                    if j == 0 {
                        prop_assert!(*v == 0.0 || *v == 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn statistics_depend_only_on_the_prefix(raw in arb_history(20)) {
        // Appending more events must not change earlier rows.
        let space = ActionSpace::unconstrained(raw.n_actors, raw.n_types);
        let specs = [StatisticSpec::reciprocity(), StatisticSpec::inertia()];
        let full = EventHistory::validate(raw.events.clone(), None).unwrap();
        let cut = raw.events.len() / 2;
        let half = EventHistory::validate(raw.events[..cut].to_vec(), None).unwrap();
        let design_full = history_design(&space, &full, &specs, None).unwrap();
        let design_half = history_design(&space, &half, &specs, None).unwrap();
        for i in 0..=cut {
            prop_assert_eq!(&design_full[i], &design_half[i]);
        }
    }

    #[test]
    fn reciprocity_needs_only_the_latest_event(raw in arb_history(25)) {
        let space = ActionSpace::unconstrained(raw.n_actors, raw.n_types);
        let full_spec = [StatisticSpec::reciprocity()];
        let windowed = [StatisticSpec::reciprocity().with_window(1)];
        for i in 0..=raw.events.len() {
            let a = statistics_matrix(&space, &raw.events[..i], &full_spec, None).unwrap();
            let b = statistics_matrix(&space, &raw.events[..i], &windowed, None).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn ordinal_loglik_is_nonpositive_and_uniform_at_zero(raw in arb_history(25)) {
        let space = ActionSpace::unconstrained(raw.n_actors, raw.n_types);
        let history = EventHistory::validate(raw.events, None).unwrap();
        let null = RemModel::null(vec![StatisticSpec::reciprocity(), StatisticSpec::inertia()]);
        let at_zero = rem::ordinal_loglik(&history, &null, &space).unwrap();
        let m = history.len() as f64;
        prop_assert!((at_zero - (-m * (space.len() as f64).ln())).abs() < 1e-10);

        let model = RemModel::new(null.specs.clone(), vec![0.8, -1.3]);
        let ll = rem::ordinal_loglik(&history, &model, &space).unwrap();
        prop_assert!(ll <= 1e-12);
    }

    #[test]
    fn step_softmax_probabilities_sum_to_one(raw in arb_history(15), t1 in -2.0f64..2.0, t2 in -2.0f64..2.0) {
        let space = ActionSpace::unconstrained(raw.n_actors, raw.n_types);
        let specs = [StatisticSpec::reciprocity(), StatisticSpec::inertia()];
        let theta = [t1, t2];
        for i in 0..=raw.events.len() {
            let m = statistics_matrix(&space, &raw.events[..i], &specs, None).unwrap();
            let scores: Vec<f64> = (0..space.len())
                .map(|a| m.row(a).iter().zip(&theta).map(|(u, t)| u * t).sum())
                .collect();
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = scores.iter().map(|s| (s - max).exp()).sum();
            let sum: f64 = scores.iter().map(|s| (s - max).exp() / total).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn group_mdp_successors_follow_window_arithmetic(
        n_actions_seed in 2usize..4,
        k in 0usize..3,
        walk in prop::collection::vec(0usize..12, 1..8)
    ) {
        let space = ActionSpace::unconstrained(n_actions_seed, 1);
        let mdp = build_group_mdp(&space, k).unwrap();
        let n = space.len();
        // Independent window bookkeeping.
        let mut window: Vec<usize> = Vec::new();
        let mut state = 0usize;
        for step in walk {
            let action = step % n;
            let row = &mdp.transitions[action][state];
            prop_assert_eq!(row.iter().filter(|p| **p == 1.0).count(), 1);
            let successor = row.iter().position(|p| *p == 1.0).unwrap();
            window.push(action);
            if window.len() > k {
                window.remove(0);
            }
            // Recompute the expected index length-lexicographically.
            let mut offset = 0usize;
            let mut block = 1usize;
            for _ in 0..window.len() {
                offset += block;
                block *= n;
            }
            let mut rank = 0usize;
            for &a in &window {
                rank = rank * n + a;
            }
            prop_assert_eq!(successor, offset + rank);
            state = successor;
        }
    }
}
