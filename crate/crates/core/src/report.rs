//! Exploration results shared by the DPOR engine and the brute-force oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::Serialize;

use crate::program::{EventId, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Normal,
    Cap,
}

/// One failing assertion site with the shortest witness found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub event: String,
    pub message: String,
    /// Event names from the initial state; the last one fails.
    pub trace: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExplorationReport {
    pub states: usize,
    pub transitions: usize,
    pub executions: u64,
    pub violations: Vec<Violation>,
    pub wall_time: Duration,
    pub terminated_by: Termination,
}

impl ExplorationReport {
    /// (event, message) pairs of every violation.
    pub fn violation_sites(&self) -> BTreeSet<(String, String)> {
        self.violations
            .iter()
            .map(|v| (v.event.clone(), v.message.clone()))
            .collect()
    }

    pub fn has_witness(&self, trace: &[&str]) -> bool {
        self.violations.iter().any(|v| v.trace == trace)
    }
}

/// Collects failing transitions into one violation per (event, message)
/// site, keeping the shortest witness and breaking ties by event order.
#[derive(Default)]
pub(crate) struct ViolationSet {
    best: BTreeMap<(EventId, String), Vec<EventId>>,
}

impl ViolationSet {
    pub fn offer(&mut self, event: EventId, message: &str, witness: Vec<EventId>) {
        let key = (event, message.to_string());
        match self.best.get(&key) {
            Some(cur) if (cur.len(), cur) <= (witness.len(), &witness) => {}
            _ => {
                self.best.insert(key, witness);
            }
        }
    }

    pub fn into_violations(self, prog: &Program) -> Vec<Violation> {
        self.best
            .into_iter()
            .map(|((event, message), witness)| Violation {
                event: prog.event_name(event).to_string(),
                message,
                trace: witness
                    .into_iter()
                    .map(|e| prog.event_name(e).to_string())
                    .collect(),
            })
            .collect()
    }
}
