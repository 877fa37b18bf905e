//! CSV ingestion and serialization.
//!
//! Event logs use the schema `time,sender,receiver,type[,cov_*...]` where
//! the `time` and `type` columns are optional; actor labels are interned in
//! first-appearance order. Trajectories use `step,state_label,action_label`
//! with the step counter resetting to zero at each new trajectory.

use crate::error::{Error, Result};
use crate::event::{DyadicEvent, EventHistory, Roster};
use crate::mdp::Trajectory;

/// Result of parsing an event CSV: raw events plus the label roster.
/// Validation into an [`EventHistory`] is a separate step.
#[derive(Debug, Clone)]
pub struct ParsedEvents {
    pub events: Vec<DyadicEvent>,
    pub roster: Roster,
    pub covariate_names: Vec<String>,
    pub timestamped: bool,
}

struct Header {
    time: Option<usize>,
    sender: usize,
    receiver: usize,
    action_type: Option<usize>,
    covariates: Vec<(usize, String)>,
    n_fields: usize,
}

fn parse_header(line: &str) -> Result<Header> {
    let mut time = None;
    let mut sender = None;
    let mut receiver = None;
    let mut action_type = None;
    let mut covariates = Vec::new();
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    for (pos, name) in fields.iter().enumerate() {
        let duplicate = match *name {
            "time" => time.replace(pos).is_some(),
            "sender" => sender.replace(pos).is_some(),
            "receiver" => receiver.replace(pos).is_some(),
            "type" => action_type.replace(pos).is_some(),
            other if other.starts_with("cov_") => {
                covariates.push((pos, other.to_owned()));
                false
            }
            other => {
                return Err(Error::UnknownColumn {
                    column: other.to_owned(),
                })
            }
        };
        if duplicate {
            return Err(Error::UnknownColumn {
                column: (*name).to_owned(),
            });
        }
    }
    let sender = sender.ok_or_else(|| Error::MalformedRow {
        line: 1,
        reason: "header is missing the sender column".into(),
    })?;
    let receiver = receiver.ok_or_else(|| Error::MalformedRow {
        line: 1,
        reason: "header is missing the receiver column".into(),
    })?;
    Ok(Header {
        time,
        sender,
        receiver,
        action_type,
        covariates,
        n_fields: fields.len(),
    })
}

/// Parse the event-log CSV schema. LF and CRLF are both accepted; blank
/// lines are skipped. Self-directed rows parse fine here and are rejected
/// later by [`EventHistory::validate`].
pub fn parse_event_csv(text: &str) -> Result<ParsedEvents> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(Error::EmptyFile),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break parse_header(l)?,
        }
    };
    let mut roster = Roster::new();
    let mut events = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1; // 1-based, counting the header
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != header.n_fields {
            return Err(Error::MalformedRow {
                line,
                reason: format!(
                    "expected {} fields, found {}",
                    header.n_fields,
                    fields.len()
                ),
            });
        }
        let parse_f64 = |pos: usize, what: &str| -> Result<f64> {
            fields[pos].parse::<f64>().map_err(|_| Error::MalformedRow {
                line,
                reason: format!("{} `{}` is not a number", what, fields[pos]),
            })
        };
        let timestamp = header.time.map(|pos| parse_f64(pos, "time")).transpose()?;
        let label = |pos: usize, what: &str| -> Result<&str> {
            if fields[pos].is_empty() {
                return Err(Error::MalformedRow {
                    line,
                    reason: format!("{} label is empty", what),
                });
            }
            Ok(fields[pos])
        };
        let sender = roster.intern(label(header.sender, "sender")?);
        let receiver = roster.intern(label(header.receiver, "receiver")?);
        let action_type = match header.action_type {
            None => 0,
            Some(pos) => fields[pos].parse::<usize>().map_err(|_| Error::MalformedRow {
                line,
                reason: format!("type `{}` is not a non-negative integer", fields[pos]),
            })?,
        };
        let covariates = if header.covariates.is_empty() {
            None
        } else {
            let mut values = Vec::with_capacity(header.covariates.len());
            for (pos, name) in &header.covariates {
                values.push(parse_f64(*pos, name)?);
            }
            Some(values)
        };
        events.push(DyadicEvent {
            sender,
            receiver,
            action_type,
            timestamp,
            covariates,
        });
    }
    Ok(ParsedEvents {
        events,
        timestamped: header.time.is_some(),
        covariate_names: header.covariates.into_iter().map(|(_, n)| n).collect(),
        roster,
    })
}

/// Serialize events back to the ingestion schema. The `time` column is
/// emitted only for timestamped histories; covariate columns are named
/// `cov_0..`. Floats print in shortest round-trip form.
pub fn write_event_csv(history: &EventHistory, roster: &Roster) -> String {
    let timestamped = history.is_timestamped();
    let cov_dim = history.covariate_dim();
    let mut out = String::new();
    if timestamped {
        out.push_str("time,");
    }
    out.push_str("sender,receiver,type");
    for j in 0..cov_dim {
        out.push_str(&format!(",cov_{j}"));
    }
    out.push('\n');
    for event in history.events() {
        if let Some(t) = event.timestamp {
            out.push_str(&format!("{t},"));
        }
        out.push_str(&format!(
            "{},{},{}",
            roster.label(event.sender),
            roster.label(event.receiver),
            event.action_type
        ));
        if let Some(covs) = &event.covariates {
            for v in covs {
                out.push_str(&format!(",{v}"));
            }
        }
        out.push('\n');
    }
    out
}

/// Serialize trajectories as `step,state_label,action_label`, with the step
/// counter restarting at zero for each trajectory.
pub fn write_trajectories_csv(
    trajectories: &[Trajectory],
    state_labels: &[String],
    action_labels: &[String],
) -> String {
    let mut out = String::from("step,state_label,action_label\n");
    for trajectory in trajectories {
        for (step, &(state, action)) in trajectory.steps().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                step, state_labels[state], action_labels[action]
            ));
        }
    }
    out
}

/// Parse trajectories serialized by [`write_trajectories_csv`]. Labels are
/// resolved against the supplied label lists; a step counter reset marks a
/// new trajectory.
pub fn parse_trajectories_csv(
    text: &str,
    state_labels: &[String],
    action_labels: &[String],
) -> Result<Vec<Trajectory>> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(Error::EmptyFile),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l.trim(),
        }
    };
    if header != "step,state_label,action_label" {
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!("expected header step,state_label,action_label, found `{header}`"),
        });
    }
    let mut trajectories = Vec::new();
    let mut current: Vec<(usize, usize)> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let step: usize = fields[0].parse().map_err(|_| Error::MalformedRow {
            line,
            reason: format!("step `{}` is not a non-negative integer", fields[0]),
        })?;
        let lookup = |labels: &[String], value: &str, what: &str| -> Result<usize> {
            labels
                .iter()
                .position(|l| l == value)
                .ok_or_else(|| Error::MalformedRow {
                    line,
                    reason: format!("unknown {what} label `{value}`"),
                })
        };
        let state = lookup(state_labels, fields[1], "state")?;
        let action = lookup(action_labels, fields[2], "action")?;
        if step == 0 && !current.is_empty() {
            trajectories.push(Trajectory::new(std::mem::take(&mut current)));
        } else if step != current.len() {
            return Err(Error::MalformedRow {
                line,
                reason: format!("step {} out of sequence (expected {})", step, current.len()),
            });
        }
        current.push((state, action));
    }
    if !current.is_empty() {
        trajectories.push(Trajectory::new(current));
    }
    Ok(trajectories)
}
