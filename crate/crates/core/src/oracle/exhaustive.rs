use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use super::OracleError;
use crate::graph::{render_dot, StateId};
use crate::program::{enabled_events, execute_event, AccessSet, EventId, Program, Valuation};
use crate::report::{ExplorationReport, Termination, ViolationSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleEdge {
    pub src: usize,
    pub event: EventId,
    pub dst: usize,
    pub accesses: AccessSet,
    pub failures: Vec<String>,
}

/// The full reachable state graph.
#[derive(Clone, Debug)]
pub struct Exhaustive {
    pub report: ExplorationReport,
    /// States in breadth-first discovery order; index 0 is the initial state.
    pub states: Vec<Valuation>,
    pub edges: Vec<OracleEdge>,
}

impl Exhaustive {
    pub fn to_dot(&self, prog: &Program) -> String {
        let nodes: Vec<(StateId, &Valuation)> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, v)| (StateId(i as u32), v))
            .collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| (StateId(e.src as u32), e.event, StateId(e.dst as u32)))
            .collect();
        render_dot(prog, &nodes, &edges)
    }
}

/// Breadth-first closure: every enabled event is executed once from every
/// reachable state. The whole sweep counts as one execution in the report.
pub fn exhaustive_explore(prog: &Program, node_cap: usize) -> Result<Exhaustive, OracleError> {
    let started = Instant::now();
    let initial = prog.initial_valuation();
    let mut index: HashMap<Valuation, usize> = HashMap::from([(initial.clone(), 0)]);
    let mut states = vec![initial];
    // Event path from the initial state along the BFS tree.
    let mut paths: Vec<Vec<EventId>> = vec![Vec::new()];
    let mut edges = Vec::new();
    let mut violations = ViolationSet::default();
    let mut queue = VecDeque::from([0usize]);

    while let Some(s) = queue.pop_front() {
        let val = states[s].clone();
        for e in enabled_events(&val) {
            let out = execute_event(prog, &val, e)?;
            let dst = match index.get(&out.valuation) {
                Some(d) => *d,
                None => {
                    if states.len() >= node_cap {
                        return Err(OracleError::NodeCap(node_cap));
                    }
                    let d = states.len();
                    index.insert(out.valuation.clone(), d);
                    states.push(out.valuation.clone());
                    let mut path = paths[s].clone();
                    path.push(e);
                    paths.push(path);
                    queue.push_back(d);
                    d
                }
            };
            if !out.failures.is_empty() {
                let mut witness = paths[s].clone();
                witness.push(e);
                for msg in &out.failures {
                    violations.offer(e, msg, witness.clone());
                }
            }
            edges.push(OracleEdge {
                src: s,
                event: e,
                dst,
                accesses: out.accesses,
                failures: out.failures,
            });
        }
    }

    let report = ExplorationReport {
        states: states.len(),
        transitions: edges.len(),
        executions: 1,
        violations: violations.into_violations(prog),
        wall_time: started.elapsed(),
        terminated_by: Termination::Normal,
    };
    Ok(Exhaustive {
        report,
        states,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{independent_events, bundled_programs};
    use crate::program::parse_program;

    #[test]
    fn independent_events_closure() {
        // Every subset of the five flags is a state; a state with k events
        // already run has 5 - k outgoing edges: 5 * 2^4 = 80.
        let ex = exhaustive_explore(&independent_events(5), 1000).unwrap();
        assert_eq!(ex.report.states, 32);
        assert_eq!(ex.report.transitions, 80);
    }

    #[test]
    fn empty_program() {
        let ex = exhaustive_explore(&parse_program("var x = 0").unwrap(), 10).unwrap();
        assert_eq!((ex.report.states, ex.report.transitions), (1, 0));
        assert!(ex.report.violations.is_empty());
    }

    #[test]
    fn per_memory_violation() {
        let ex = exhaustive_explore(&bundled_programs()["per-memory"], 1000).unwrap();
        assert_eq!(ex.report.violations.len(), 1);
        let v = &ex.report.violations[0];
        assert_eq!((v.event.as_str(), v.message.as_str()), ("e3", "assert(y==1)"));
        assert_eq!(v.trace, ["e2", "e3"]);
    }

    #[test]
    fn missing_exec_closure() {
        // z is never changed and x, y range over {0, 1}: four states, each
        // with all four events enabled.
        let ex = exhaustive_explore(&bundled_programs()["missing-exec"], 1000).unwrap();
        assert_eq!((ex.report.states, ex.report.transitions), (4, 16));
        assert!(ex.report.has_witness(&["e2", "e4"]));
    }

    #[test]
    fn node_cap_is_reported() {
        let p = parse_program("var x = 0\nevent e enabled { x = x + 1; }").unwrap();
        assert_eq!(
            exhaustive_explore(&p, 50).unwrap_err(),
            OracleError::NodeCap(50)
        );
    }
}
