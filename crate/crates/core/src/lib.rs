//! Characterize sequences of directed social interaction events two ways:
//! fit relational event models by maximum likelihood over sufficient
//! statistics of the unfolding history, and recover individual behavioral
//! preferences by maximum-entropy inverse reinforcement learning on MDPs
//! built from the same event logs. A seeded simulator closes the loop for
//! recovery testing, and an exact checker verifies that the ordinal
//! event-model likelihood coincides with the step-wise exponential-reward
//! likelihood under the history-as-state view.

pub mod csv;
pub mod error;
pub mod event;
pub mod irl;
pub mod mdp;
pub mod numeric;
pub mod rem;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use event::{ActionSpace, ActionTriple, ActorId, DyadicEvent, EventHistory, Roster};
pub use mdp::{EgoScheme, Mdp, Trajectory};
pub use rem::{FitConfig, FitResult, LikelihoodMode, RemModel};
pub use stats::{StatisticKind, StatisticSpec};
