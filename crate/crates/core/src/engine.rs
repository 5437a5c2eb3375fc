//! Stateful DPOR search over event-driven programs.
//!
//! The search keeps three structures: the transition graph R with per-state
//! `backtrack`/`done` sets, the history H of states seen in completed
//! executions, and the transition sequence S of the current execution. An
//! execution ends when it reaches a state of H, when it closes a cycle that
//! has executed every event enabled along that cycle, or when no event is
//! enabled. Backtracking points are set by a backwards search over R from
//! each executed transition, tracking conflicts per memory access so that an
//! event touching several locations can set several points. When an
//! execution stops at a previously discovered state, the transitions
//! reachable from that state are re-propagated so that the skipped part of
//! the state space still contributes its backtracking points.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use thiserror::Error;

use crate::graph::{EventSet, GraphError, StateId, StateSpace, Trace, TransitionId};
use crate::program::{
    execute_event, residual, sets_conflict, AccessSet, EventId, ExecError, Program,
};
use crate::report::{ExplorationReport, Termination, ViolationSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Re-run the backwards search for every reachable transition on a state match.
    #[default]
    Dpor,
    /// Cache propagated (event, access) pairs per state and stop the
    /// backwards search once nothing new would be propagated.
    SummaryCache,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StopPolicy {
    FirstViolation,
    #[default]
    Exhaust,
}

/// When an execution that revisits a state of the current trace may stop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Proviso {
    /// Stop only once the cycle has executed every event enabled along it.
    #[default]
    FullCycle,
    /// Stop at any revisit. Unsound on cyclic state spaces; kept as a
    /// baseline for regression tests.
    AnyRevisit,
}

#[derive(Clone, Debug, Default)]
pub struct EngineConfig {
    pub mode: Mode,
    pub stop_policy: StopPolicy,
    pub max_executions: Option<u64>,
    pub max_trace_len: Option<usize>,
    pub proviso: Proviso,
}

impl EngineConfig {
    pub fn with_mode(mode: Mode) -> Self {
        EngineConfig {
            mode,
            ..Default::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("transition graph corrupted: {0}")]
    Graph(#[from] GraphError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Halt {
    Violation,
    Cap,
}

/// Explores `prog` from its initial state and reports what was found.
pub fn explore_all(prog: &Program, cfg: &EngineConfig) -> Result<ExplorationReport, EngineError> {
    let mut engine = Engine::new(prog, cfg.clone())?;
    engine.run()
}

pub struct Engine<'p> {
    prog: &'p Program,
    cfg: EngineConfig,
    graph: StateSpace,
    trace: Trace,
    initial: StateId,
    executions: u64,
    failing: Vec<TransitionId>,
    halt: Option<Halt>,
    /// Last event re-opened at each state during the current execution.
    rotation: HashMap<StateId, EventId>,
}

impl<'p> Engine<'p> {
    pub fn new(prog: &'p Program, cfg: EngineConfig) -> Result<Self, EngineError> {
        if cfg.max_executions == Some(0) {
            return Err(EngineError::Config("max_executions must be at least 1".into()));
        }
        if cfg.max_trace_len == Some(0) {
            return Err(EngineError::Config("max_trace_len must be at least 1".into()));
        }
        let mut graph = StateSpace::new();
        let (initial, _) = graph.canonicalize(&prog.initial_valuation());
        Ok(Engine {
            prog,
            cfg,
            graph,
            trace: Trace::empty(),
            initial,
            executions: 0,
            failing: Vec::new(),
            halt: None,
            rotation: HashMap::new(),
        })
    }

    pub fn graph(&self) -> &StateSpace {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut StateSpace {
        &mut self.graph
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn trace_mut(&mut self) -> &mut Trace {
        &mut self.trace
    }

    /// Appends `t` to the current trace.
    pub fn extend_trace(&mut self, t: TransitionId) {
        self.trace.push(&self.graph, t);
    }

    pub fn initial_state(&self) -> StateId {
        self.initial
    }

    pub fn into_graph(self) -> StateSpace {
        self.graph
    }

    /// Top-level loop: explore from the initial state, then from the
    /// lowest-id state whose backtrack set still exceeds its done set.
    pub fn run(&mut self) -> Result<ExplorationReport, EngineError> {
        let started = Instant::now();
        self.explore(self.initial)?;
        while self.halt.is_none() {
            let pending = self
                .graph
                .nodes()
                .iter()
                .find(|n| n.backtrack != n.done)
                .map(|n| n.id);
            match pending {
                Some(s) => self.explore(s)?,
                None => break,
            }
        }
        Ok(self.report(started.elapsed()))
    }

    fn report(&self, wall_time: std::time::Duration) -> ExplorationReport {
        let mut violations = ViolationSet::default();
        for &t in &self.failing {
            let tr = self.graph.transition(t);
            let Some(path) = self.graph.shortest_path(self.initial, tr.src) else {
                continue;
            };
            let mut witness: Vec<EventId> = path
                .iter()
                .map(|p| self.graph.transition(*p).event)
                .collect();
            witness.push(tr.event);
            for msg in &tr.failures {
                violations.offer(tr.event, msg, witness.clone());
            }
        }
        ExplorationReport {
            states: self.graph.num_states(),
            transitions: self.graph.num_transitions(),
            executions: self.executions,
            violations: violations.into_violations(self.prog),
            wall_time,
            terminated_by: if self.halt == Some(Halt::Cap) {
                Termination::Cap
            } else {
                Termination::Normal
            },
        }
    }

    /// Executes `event` from `src`, recording the transition in R.
    pub fn run_transition(
        &mut self,
        src: StateId,
        event: EventId,
    ) -> Result<TransitionId, EngineError> {
        let outcome = execute_event(self.prog, &self.graph.node(src).valuation, event)?;
        let (dst, _) = self.graph.canonicalize(&outcome.valuation);
        Ok(self
            .graph
            .add_transition(src, event, dst, outcome.accesses, outcome.failures)?)
    }

    fn finish_execution(&mut self) {
        let states = self.trace.states();
        self.graph.add_to_history(states);
        self.trace.clear();
        self.rotation.clear();
        self.executions += 1;
    }

    /// Runs one exploration from `s`. The recursion of the textbook
    /// formulation is unrolled onto an explicit stack of states.
    pub fn explore(&mut self, s: StateId) -> Result<(), EngineError> {
        if self.trace.is_empty() {
            if self.cap_reached() {
                return Ok(());
            }
            self.trace = Trace::starting_at(s);
        }
        if !self.enter(s) {
            return Ok(());
        }
        let mut stack = vec![s];
        while let Some(&s) = stack.last() {
            if self.halt.is_some() {
                break;
            }
            let node = self.graph.node(s);
            let Some(b) = node.backtrack.difference(&node.done).next().copied() else {
                stack.pop();
                continue;
            };
            if self.trace.is_empty() {
                if self.cap_reached() {
                    break;
                }
                self.trace = Trace::starting_at(s);
            }

            self.graph.node_mut(s).done.insert(b);
            let t = self.run_transition(s, b)?;
            let dst = self.graph.transition(t).dst;
            if !self.graph.transition(t).failures.is_empty() {
                self.failing.push(t);
                if self.cfg.stop_policy == StopPolicy::FirstViolation {
                    self.halt = Some(Halt::Violation);
                    self.executions += 1;
                    break;
                }
            }

            let lost: Vec<EventId> = self
                .graph
                .node(s)
                .enabled
                .difference(&self.graph.node(dst).enabled)
                .copied()
                .collect();
            self.graph.node_mut(s).backtrack.extend(lost);

            self.update_backtrack_set(t);

            let revisit = self.trace.contains_state(dst);
            let stop = self.graph.in_history(dst)
                || match self.cfg.proviso {
                    Proviso::FullCycle => is_full_cycle(&self.graph, &self.trace, t),
                    Proviso::AnyRevisit => revisit,
                };
            if stop {
                self.update_backtrack_sets_from_graph(t);
                self.finish_execution();
            } else {
                if revisit {
                    self.update_backtrack_sets_from_graph(t);
                }
                self.extend_trace(t);
                if self
                    .cfg
                    .max_trace_len
                    .is_some_and(|cap| self.trace.len() >= cap)
                {
                    self.halt = Some(Halt::Cap);
                    break;
                }
                if self.enter(dst) {
                    stack.push(dst);
                }
            }
        }
        Ok(())
    }

    fn cap_reached(&mut self) -> bool {
        if self.cfg.max_executions.is_some_and(|cap| self.executions >= cap) {
            self.halt = Some(Halt::Cap);
        }
        self.halt.is_some()
    }

    /// Entry bookkeeping for a visit to `s`. Returns false when the visit
    /// ends the execution because nothing is enabled.
    fn enter(&mut self, s: StateId) -> bool {
        let node = self.graph.node(s);
        if node.backtrack != node.done {
            return true;
        }
        if node.done == node.enabled {
            if node.enabled.is_empty() {
                self.finish_execution();
                return false;
            }
            // Continuing past a state match. Repeated visits within one
            // execution rotate through the enabled events so that the
            // execution eventually closes a full cycle.
            let e = match self.rotation.get(&s) {
                Some(last) => node
                    .enabled
                    .range(EventId(last.0 + 1)..)
                    .next()
                    .or_else(|| node.enabled.first())
                    .copied()
                    .unwrap(),
                None => *node.enabled.first().unwrap(),
            };
            self.rotation.insert(s, e);
            self.graph.node_mut(s).done.remove(&e);
        } else {
            let e = *node.enabled.difference(&node.done).next().unwrap();
            self.graph.node_mut(s).backtrack.insert(e);
        }
        true
    }

    /// Adds `event` to backtrack(`s`) if it is enabled there, otherwise every
    /// enabled event of `s`.
    fn add_backtrack_point(&mut self, s: StateId, event: EventId) {
        let node = self.graph.node_mut(s);
        if node.enabled.contains(&event) {
            node.backtrack.insert(event);
        } else {
            let enabled = node.enabled.clone();
            node.backtrack.extend(enabled);
        }
    }

    /// Sets backtracking points for every explored path reaching `t`.
    pub fn update_backtrack_set(&mut self, t: TransitionId) {
        match self.cfg.mode {
            Mode::Dpor => self.backwards_search(t),
            Mode::SummaryCache => {
                let tr = self.graph.transition(t);
                let (event, accesses) = (tr.event, tr.accesses.clone());
                self.backwards_search_cached(t, event, accesses);
            }
        }
    }

    /// Backwards DFS over R from `start`. Each branch carries the event a
    /// backtracking point is being set for and the accesses not yet matched
    /// by a conflict; a branch ends when no access is left. A configuration
    /// (transition, event, accesses) is expanded at most once per search.
    fn backwards_search(&mut self, start: TransitionId) {
        let tr = self.graph.transition(start);
        let mut seen: HashSet<(TransitionId, EventId, AccessSet)> = HashSet::new();
        let mut stack = vec![(start, tr.event, tr.accesses.clone())];
        while let Some((curr, conf, accesses)) = stack.pop() {
            for &tb in self.graph.predecessors(curr).to_vec().iter().rev() {
                let before = self.graph.transition(tb);
                let (src, tb_event) = (before.src, before.event);
                let mut next_conf = conf;
                if sets_conflict(&accesses, &before.accesses) {
                    next_conf = tb_event;
                    self.add_backtrack_point(src, conf);
                }
                let rest = residual(&accesses, &self.graph.transition(tb).accesses);
                if rest.is_empty() {
                    continue;
                }
                let key = (tb, next_conf, rest);
                if seen.insert(key.clone()) {
                    stack.push(key);
                }
            }
        }
    }

    /// Removes from `accesses` what `summary(s)` already holds for `event`,
    /// records the pairs, and returns the remainder.
    pub fn update_state_summary(
        &mut self,
        s: StateId,
        event: EventId,
        accesses: &AccessSet,
    ) -> AccessSet {
        let summary = &mut self.graph.node_mut(s).summary;
        accesses
            .iter()
            .filter(|a| summary.insert((event, **a)))
            .copied()
            .collect()
    }

    /// The summary-cache variant of the backwards DFS: the conflict carrier
    /// is an event, and each visited transition's source state records what
    /// flowed through it so repeated propagation stops early.
    fn backwards_search_cached(&mut self, start: TransitionId, event: EventId, acc: AccessSet) {
        struct Frame {
            conf: EventId,
            accesses: AccessSet,
            preds: Vec<TransitionId>,
            next: usize,
            curr: TransitionId,
        }
        let src = self.graph.transition(start).src;
        let acc = self.update_state_summary(src, event, &acc);
        if acc.is_empty() {
            return;
        }
        let mut on_path = vec![false; self.graph.num_transitions()];
        on_path[start.index()] = true;
        let mut stack = vec![Frame {
            conf: event,
            accesses: acc,
            preds: self.graph.predecessors(start).to_vec(),
            next: 0,
            curr: start,
        }];
        while let Some(top) = stack.last_mut() {
            let Some(&tb) = top.preds.get(top.next) else {
                on_path[top.curr.index()] = false;
                stack.pop();
                continue;
            };
            top.next += 1;
            if on_path[tb.index()] {
                continue;
            }
            let before = self.graph.transition(tb);
            let (src, tb_event) = (before.src, before.event);
            let mut conf = top.conf;
            let hit = sets_conflict(&top.accesses, &before.accesses);
            let rest = residual(&top.accesses, &before.accesses);
            if hit {
                let e = top.conf;
                conf = tb_event;
                self.add_backtrack_point(src, e);
            }
            let rest = self.update_state_summary(src, conf, &rest);
            if rest.is_empty() {
                continue;
            }
            on_path[tb.index()] = true;
            stack.push(Frame {
                conf,
                accesses: rest,
                preds: self.graph.predecessors(tb).to_vec(),
                next: 0,
                curr: tb,
            });
        }
    }

    /// Called when `t` reaches a state discovered earlier: sets the
    /// backtracking points the unexplored continuation from `dst(t)` would
    /// have set.
    pub fn update_backtrack_sets_from_graph(&mut self, t: TransitionId) {
        match self.cfg.mode {
            Mode::Dpor => {
                for r in self.graph.reachable_transitions(t) {
                    self.backwards_search(r);
                }
            }
            Mode::SummaryCache => {
                let tr = self.graph.transition(t);
                let (src, event, accesses) = (tr.src, tr.event, tr.accesses.clone());
                let mut grouped: BTreeMap<EventId, AccessSet> = BTreeMap::new();
                for (e, a) in &self.graph.node(tr.dst).summary {
                    grouped.entry(*e).or_default().insert(*a);
                }
                for (e, pending) in grouped {
                    let mut conf = e;
                    if sets_conflict(&pending, &accesses) {
                        self.add_backtrack_point(src, e);
                        conf = event;
                    }
                    let rest = residual(&pending, &accesses);
                    self.backwards_search_cached(t, conf, rest);
                }
            }
        }
    }
}

/// True when `t` closes a cycle on `trace` whose transitions executed every
/// event enabled at any state of the cycle.
pub fn is_full_cycle(graph: &StateSpace, trace: &Trace, t: TransitionId) -> bool {
    let dst = graph.transition(t).dst;
    if !trace.contains_state(dst) {
        return false;
    }
    let from = trace.first(dst);
    let window = trace.steps()[from..].iter().copied().chain([t]);
    let mut executed = EventSet::new();
    let mut enabled = EventSet::new();
    for step in window {
        let tr = graph.transition(step);
        executed.insert(tr.event);
        enabled.extend(graph.node(tr.dst).enabled.iter().copied());
    }
    executed == enabled
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{independent_events, bundled_programs};
    use crate::oracle::exhaustive_explore;
    use crate::program::{parse_program, Access, Location, VarId};

    const MODES: [Mode; 2] = [Mode::Dpor, Mode::SummaryCache];

    fn ev(prog: &Program, name: &str) -> EventId {
        prog.event_by_name(name).unwrap()
    }

    #[test]
    fn empty_program() {
        let p = parse_program("var x = 0").unwrap();
        for mode in MODES {
            let r = explore_all(&p, &EngineConfig::with_mode(mode)).unwrap();
            assert_eq!((r.states, r.transitions, r.executions), (1, 0, 1));
            assert!(r.violations.is_empty());
            assert_eq!(r.terminated_by, Termination::Normal);
        }
    }

    #[test]
    fn independent_events_take_one_path() {
        let p = independent_events(5);
        for mode in MODES {
            let r = explore_all(&p, &EngineConfig::with_mode(mode)).unwrap();
            assert_eq!((r.transitions, r.states), (5, 6), "{mode:?}");
        }
    }

    #[test]
    fn corpus_witnesses() {
        let corpus = bundled_programs();
        for mode in MODES {
            let cfg = EngineConfig::with_mode(mode);
            let r = explore_all(&corpus["per-memory"], &cfg).unwrap();
            assert!(r.has_witness(&["e2", "e3"]), "{mode:?}: {:?}", r.violations);
            let r = explore_all(&corpus["missing-exec"], &cfg).unwrap();
            assert!(r.has_witness(&["e2", "e4"]), "{mode:?}: {:?}", r.violations);
            let r = explore_all(&corpus["nonterm-threads"], &cfg).unwrap();
            assert!(r.has_witness(&["eT1", "eT3"]), "{mode:?}: {:?}", r.violations);
        }
    }

    #[test]
    fn search_terminates_with_sets_closed() {
        for (name, p) in bundled_programs() {
            for mode in MODES {
                let mut engine = Engine::new(&p, EngineConfig::with_mode(mode)).unwrap();
                engine.run().unwrap();
                for n in engine.graph().nodes() {
                    assert_eq!(n.backtrack, n.done, "{name} {mode:?} s{}", n.id.0);
                    assert!(n.done.is_subset(&n.enabled), "{name} {mode:?}");
                }
            }
        }
    }

    #[test]
    fn first_violation_stops_early() {
        let p = &bundled_programs()["missing-exec"];
        let cfg = EngineConfig {
            stop_policy: StopPolicy::FirstViolation,
            ..Default::default()
        };
        let r = explore_all(p, &cfg).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.terminated_by, Termination::Normal);
    }

    #[test]
    fn caps() {
        let p = &bundled_programs()["missing-exec"];
        let cfg = EngineConfig {
            max_executions: Some(1),
            ..Default::default()
        };
        let r = explore_all(p, &cfg).unwrap();
        assert_eq!((r.executions, r.terminated_by), (1, Termination::Cap));

        let counter = parse_program("var x = 0\nevent e enabled { x = x + 1; }").unwrap();
        let cfg = EngineConfig {
            max_trace_len: Some(10),
            ..Default::default()
        };
        let r = explore_all(&counter, &cfg).unwrap();
        assert_eq!(r.terminated_by, Termination::Cap);
        assert_eq!(r.transitions, 10);

        let zero = EngineConfig {
            max_executions: Some(0),
            ..Default::default()
        };
        assert!(matches!(Engine::new(p, zero), Err(EngineError::Config(_))));
    }

    /// Replays the first execution of missing-exec by hand: e1, e2, e3 and
    /// e4 from the initial state.
    #[test]
    fn missing_exec_first_execution() {
        let p = &bundled_programs()["missing-exec"];
        let mut eng = Engine::new(p, EngineConfig::default()).unwrap();
        let s0 = eng.initial_state();

        let t1 = eng.run_transition(s0, ev(p, "e1")).unwrap();
        eng.update_backtrack_set(t1);
        eng.extend_trace(t1);
        let s1 = eng.graph().transition(t1).dst;

        let t2 = eng.run_transition(s1, ev(p, "e2")).unwrap();
        eng.update_backtrack_set(t2);
        // e1 and e2 both write z.
        assert!(eng.graph().node(s0).backtrack.contains(&ev(p, "e2")));
        eng.extend_trace(t2);
        let s2 = eng.graph().transition(t2).dst;

        let t3 = eng.run_transition(s2, ev(p, "e3")).unwrap();
        assert_eq!(eng.graph().transition(t3).dst, s1);
        assert!(!is_full_cycle(eng.graph(), eng.trace(), t3));
        eng.update_backtrack_set(t3);
        assert!(!eng.graph().node(s2).backtrack.contains(&ev(p, "e2")));
        eng.update_backtrack_sets_from_graph(t3);
        // The e2 edge out of s1 is reachable from the e3 edge and both write y.
        assert!(eng.graph().node(s2).backtrack.contains(&ev(p, "e2")));
        eng.extend_trace(t3);

        let t4 = eng.run_transition(s1, ev(p, "e4")).unwrap();
        assert_eq!(eng.graph().transition(t4).dst, s0);
        assert!(is_full_cycle(eng.graph(), eng.trace(), t4));
    }

    #[test]
    fn full_cycle_needs_a_revisit() {
        let p = &bundled_programs()["missing-exec"];
        let mut eng = Engine::new(p, EngineConfig::default()).unwrap();
        let t1 = eng.run_transition(eng.initial_state(), ev(p, "e1")).unwrap();
        assert!(!is_full_cycle(eng.graph(), eng.trace(), t1));
    }

    #[test]
    fn disabled_event_is_scheduled_at_source() {
        let p = parse_program("event a enabled { disable(b); }\nevent b enabled { }").unwrap();
        let mut eng = Engine::new(&p, EngineConfig::default()).unwrap();
        let r = eng.run().unwrap();
        let s0 = eng.graph().node(eng.initial_state());
        assert_eq!(s0.done, EventSet::from([EventId(0), EventId(1)]));
        assert_eq!(r.transitions, 3);
    }

    #[test]
    fn backtrack_fallback_adds_all_enabled() {
        let p = parse_program("event a enabled { }\nevent b disabled { }\nevent c enabled { }").unwrap();
        let mut eng = Engine::new(&p, EngineConfig::default()).unwrap();
        let s0 = eng.initial_state();
        eng.add_backtrack_point(s0, EventId(1));
        assert_eq!(
            eng.graph().node(s0).backtrack,
            EventSet::from([EventId(0), EventId(2)])
        );
        eng.graph_mut().node_mut(s0).backtrack.clear();
        eng.add_backtrack_point(s0, EventId(2));
        assert_eq!(eng.graph().node(s0).backtrack, EventSet::from([EventId(2)]));
    }

    #[test]
    fn first_transition_sets_nothing() {
        let p = &bundled_programs()["missing-exec"];
        let mut eng = Engine::new(p, EngineConfig::default()).unwrap();
        let t = eng.run_transition(eng.initial_state(), ev(p, "e1")).unwrap();
        eng.update_backtrack_set(t);
        assert!(eng.graph().nodes().iter().all(|n| n.backtrack.is_empty()));
    }

    const DIAMOND: &str = "var a = 0\nvar b = 0\n\
        event p enabled { a = 1; self_disable; }\n\
        event q enabled { b = 1; self_disable; }\n\
        event r enabled { assert(a == 0); self_disable; }";

    /// s0 reaches s3 through both p;q and q;p. Running r at s3 must set a
    /// backtracking point on each path.
    #[test]
    fn backwards_search_covers_every_path() {
        let p = parse_program(DIAMOND).unwrap();
        for mode in MODES {
            let mut eng = Engine::new(&p, EngineConfig::with_mode(mode)).unwrap();
            let s0 = eng.initial_state();
            let tp = eng.run_transition(s0, ev(&p, "p")).unwrap();
            let s1 = eng.graph().transition(tp).dst;
            let tpq = eng.run_transition(s1, ev(&p, "q")).unwrap();
            let tq = eng.run_transition(s0, ev(&p, "q")).unwrap();
            let s2 = eng.graph().transition(tq).dst;
            let tqp = eng.run_transition(s2, ev(&p, "p")).unwrap();
            let s3 = eng.graph().transition(tpq).dst;
            assert_eq!(eng.graph().transition(tqp).dst, s3);

            let tr = eng.run_transition(s3, ev(&p, "r")).unwrap();
            eng.update_backtrack_set(tr);
            let r = ev(&p, "r");
            assert!(eng.graph().node(s2).backtrack.contains(&r), "{mode:?}");
            assert!(eng.graph().node(s0).backtrack.contains(&r), "{mode:?}");
            assert!(!eng.graph().node(s1).backtrack.contains(&r), "{mode:?}");
        }
    }

    #[test]
    fn diamond_matches_oracle() {
        let p = parse_program(DIAMOND).unwrap();
        let expected = exhaustive_explore(&p, 1000).unwrap().report.violation_sites();
        assert_eq!(expected.len(), 1);
        for mode in MODES {
            let r = explore_all(&p, &EngineConfig::with_mode(mode)).unwrap();
            assert_eq!(r.violation_sites(), expected);
        }
    }

    /// `arm` reads `a` between `check`'s read and `fire`'s write. The write
    /// must still race with `check`, which needs `arm` scheduled first.
    const READ_BETWEEN: &str = "var a = 0\nvar b = 0\n\
        event check enabled { assert(a == 0); self_disable; }\n\
        event arm enabled { b = 1; r = a; self_disable; }\n\
        event fire enabled { if (b == 1) { a = 1; } self_disable; }";

    #[test]
    fn write_races_past_intervening_read() {
        let p = parse_program(READ_BETWEEN).unwrap();
        let expected = exhaustive_explore(&p, 1000).unwrap().report.violation_sites();
        assert_eq!(expected.len(), 1);
        for mode in MODES {
            let r = explore_all(&p, &EngineConfig::with_mode(mode)).unwrap();
            assert_eq!(r.violation_sites(), expected, "{mode:?}");
            assert!(r.has_witness(&["arm", "fire", "check"]), "{mode:?}");
        }
    }

    #[test]
    fn state_summary_residuals() {
        let p = parse_program("var x = 0\nvar y = 0\nevent e enabled { }").unwrap();
        let mut eng = Engine::new(&p, EngineConfig::with_mode(Mode::SummaryCache)).unwrap();
        let s = eng.initial_state();
        let e = EventId(0);
        let rx = Access::read(Location::Var(VarId(0)));
        let wy = Access::write(Location::Var(VarId(1)));

        let first = AccessSet::from([rx]);
        assert_eq!(eng.update_state_summary(s, e, &first), first);
        assert!(eng.update_state_summary(s, e, &first).is_empty());
        assert_eq!(
            eng.update_state_summary(s, e, &AccessSet::from([rx, wy])),
            AccessSet::from([wy])
        );
        assert_eq!(eng.graph().node(s).summary.len(), 2);
    }
}
