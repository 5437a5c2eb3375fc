//! Hash-consed state store, the explored transition graph, the state
//! history of completed executions and the current transition sequence.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::program::{Access, AccessSet, EventId, Program, Valuation};

/// Dense handle of a canonical state, assigned in discovery order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

/// Dense handle of an explored transition, assigned in insertion order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl TransitionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub type EventSet = BTreeSet<EventId>;

#[derive(Clone, Debug)]
pub struct StateNode {
    pub id: StateId,
    pub valuation: Valuation,
    pub enabled: EventSet,
    pub backtrack: EventSet,
    pub done: EventSet,
    /// (event, access) pairs already propagated through this state; only
    /// populated by the summary-cache search.
    pub summary: BTreeSet<(EventId, Access)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: TransitionId,
    pub src: StateId,
    pub event: EventId,
    pub dst: StateId,
    pub accesses: AccessSet,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error(
        "transition ({src:?}, {event:?}) already leads to {existing:?}, refusing to add edge to {new:?}"
    )]
    InconsistentTransition {
        src: StateId,
        event: EventId,
        existing: StateId,
        new: StateId,
    },
    #[error("transition endpoint {0:?} is not a stored state")]
    UnknownState(StateId),
}

/// The transition graph R together with the state history H.
#[derive(Clone, Debug, Default)]
pub struct StateSpace {
    nodes: Vec<StateNode>,
    index: HashMap<Valuation, StateId>,
    transitions: Vec<Transition>,
    by_key: HashMap<(StateId, EventId), TransitionId>,
    out_edges: Vec<Vec<TransitionId>>,
    in_edges: Vec<Vec<TransitionId>>,
    history: Vec<bool>,
}

impl StateSpace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `val`, allocating a node on first sighting.
    pub fn canonicalize(&mut self, val: &Valuation) -> (StateId, bool) {
        if let Some(id) = self.index.get(val) {
            return (*id, false);
        }
        let id = StateId(self.nodes.len() as u32);
        let enabled = crate::program::enabled_events(val).into_iter().collect();
        self.nodes.push(StateNode {
            id,
            valuation: val.clone(),
            enabled,
            backtrack: EventSet::new(),
            done: EventSet::new(),
            summary: BTreeSet::new(),
        });
        self.index.insert(val.clone(), id);
        self.out_edges.push(Vec::new());
        self.in_edges.push(Vec::new());
        self.history.push(false);
        (id, true)
    }

    pub fn lookup(&self, val: &Valuation) -> Option<StateId> {
        self.index.get(val).copied()
    }

    /// Inserts an explored transition; re-adding the same (src, event) pair
    /// returns the existing handle.
    pub fn add_transition(
        &mut self,
        src: StateId,
        event: EventId,
        dst: StateId,
        accesses: AccessSet,
        failures: Vec<String>,
    ) -> Result<TransitionId, GraphError> {
        for s in [src, dst] {
            if s.index() >= self.nodes.len() {
                return Err(GraphError::UnknownState(s));
            }
        }
        if let Some(&id) = self.by_key.get(&(src, event)) {
            let existing = &self.transitions[id.index()];
            if existing.dst != dst || existing.accesses != accesses {
                return Err(GraphError::InconsistentTransition {
                    src,
                    event,
                    existing: existing.dst,
                    new: dst,
                });
            }
            return Ok(id);
        }
        let id = TransitionId(self.transitions.len() as u32);
        self.transitions.push(Transition {
            id,
            src,
            event,
            dst,
            accesses,
            failures,
        });
        self.by_key.insert((src, event), id);
        self.out_edges[src.index()].push(id);
        self.in_edges[dst.index()].push(id);
        Ok(id)
    }

    pub fn node(&self, s: StateId) -> &StateNode {
        &self.nodes[s.index()]
    }

    pub fn node_mut(&mut self, s: StateId) -> &mut StateNode {
        &mut self.nodes[s.index()]
    }

    pub fn nodes(&self) -> &[StateNode] {
        &self.nodes
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.index()]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn find_transition(&self, src: StateId, event: EventId) -> Option<TransitionId> {
        self.by_key.get(&(src, event)).copied()
    }

    pub fn num_states(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn outgoing(&self, s: StateId) -> &[TransitionId] {
        &self.out_edges[s.index()]
    }

    pub fn incoming(&self, s: StateId) -> &[TransitionId] {
        &self.in_edges[s.index()]
    }

    /// Transitions whose destination is the source of `t`.
    pub fn predecessors(&self, t: TransitionId) -> &[TransitionId] {
        self.incoming(self.transition(t).src)
    }

    /// Every transition leaving a state reachable from `dst(from)`, in id order.
    pub fn reachable_transitions(&self, from: TransitionId) -> Vec<TransitionId> {
        let start = self.transition(from).dst;
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([start]);
        seen[start.index()] = true;
        let mut out = Vec::new();
        while let Some(s) = queue.pop_front() {
            for &t in self.outgoing(s) {
                out.push(t);
                let d = self.transition(t).dst;
                if !seen[d.index()] {
                    seen[d.index()] = true;
                    queue.push_back(d);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn in_history(&self, s: StateId) -> bool {
        self.history[s.index()]
    }

    pub fn add_to_history(&mut self, states: impl IntoIterator<Item = StateId>) {
        for s in states {
            self.history[s.index()] = true;
        }
    }

    pub fn history(&self) -> impl Iterator<Item = StateId> + '_ {
        self.history
            .iter()
            .enumerate()
            .filter(|(_, h)| **h)
            .map(|(i, _)| StateId(i as u32))
    }

    /// Shortest event path from `from` to `to`, preferring lower event order.
    pub fn shortest_path(&self, from: StateId, to: StateId) -> Option<Vec<TransitionId>> {
        let mut parent: Vec<Option<TransitionId>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[from.index()] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            if s == to {
                let mut path = Vec::new();
                let mut cur = to;
                while let Some(t) = parent[cur.index()] {
                    path.push(t);
                    cur = self.transition(t).src;
                }
                path.reverse();
                return Some(path);
            }
            let mut out = self.outgoing(s).to_vec();
            out.sort_by_key(|t| self.transition(*t).event);
            for t in out {
                let d = self.transition(t).dst;
                if !seen[d.index()] {
                    seen[d.index()] = true;
                    parent[d.index()] = Some(t);
                    queue.push_back(d);
                }
            }
        }
        None
    }

    /// Graphviz rendering, stable across runs.
    pub fn to_dot(&self, prog: &Program) -> String {
        let nodes: Vec<(StateId, &Valuation)> =
            self.nodes.iter().map(|n| (n.id, &n.valuation)).collect();
        let edges: Vec<(StateId, EventId, StateId)> = self
            .transitions
            .iter()
            .map(|t| (t.src, t.event, t.dst))
            .collect();
        render_dot(prog, &nodes, &edges)
    }
}

/// Renders a state graph as DOT. Nodes are ordered by id, edges by source id
/// then event order.
pub fn render_dot(
    prog: &Program,
    nodes: &[(StateId, &Valuation)],
    edges: &[(StateId, EventId, StateId)],
) -> String {
    let mut nodes = nodes.to_vec();
    nodes.sort_by_key(|(id, _)| *id);
    let mut edges = edges.to_vec();
    edges.sort();
    let mut out = String::from("digraph states {\n");
    for (id, val) in nodes {
        let label = format!("s{}\\n{}", id.0, val.display(prog));
        let _ = writeln!(out, "  s{} [label=\"{}\"];", id.0, label);
    }
    for (src, event, dst) in edges {
        let _ = writeln!(
            out,
            "  s{} -> s{} [label=\"{}\"];",
            src.0,
            dst.0,
            prog.event_name(event)
        );
    }
    out.push_str("}\n");
    out
}

/// The transition sequence of the current execution.
///
/// `states[0]` is the start state and `states[i]` the destination of the
/// i-th transition.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    steps: Vec<TransitionId>,
    states: Vec<StateId>,
    first: HashMap<StateId, usize>,
}

impl Trace {
    /// A trace with no start state yet; the first pushed transition sets it.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn starting_at(s: StateId) -> Self {
        let mut t = Self::default();
        t.states.push(s);
        t.first.insert(s, 0);
        t
    }

    pub fn push(&mut self, graph: &StateSpace, t: TransitionId) {
        let tr = graph.transition(t);
        if self.states.is_empty() {
            self.states.push(tr.src);
            self.first.insert(tr.src, 0);
        }
        debug_assert_eq!(self.last(), Some(tr.src), "trace must stay consecutive");
        self.steps.push(t);
        self.states.push(tr.dst);
        self.first.entry(tr.dst).or_insert(self.steps.len());
    }

    pub fn clear(&mut self) {
        self.steps.clear();
        self.states.clear();
        self.first.clear();
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[TransitionId] {
        &self.steps
    }

    pub fn contains_state(&self, s: StateId) -> bool {
        self.first.contains_key(&s)
    }

    /// Distinct states traversed, in first-visit order.
    pub fn states(&self) -> Vec<StateId> {
        let mut seen = BTreeSet::new();
        self.states
            .iter()
            .copied()
            .filter(|s| seen.insert(*s))
            .collect()
    }

    /// Position of the first visit of `s`; the start state is position 0.
    ///
    /// Panics if `s` is not on the trace.
    pub fn first(&self, s: StateId) -> usize {
        *self
            .first
            .get(&s)
            .unwrap_or_else(|| panic!("state {s:?} is not on the trace"))
    }

    pub fn last(&self) -> Option<StateId> {
        self.states.last().copied()
    }
}
