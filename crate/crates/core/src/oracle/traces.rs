use std::collections::{HashMap, VecDeque};

use crate::graph::{StateId, StateSpace, TransitionId};
use crate::program::{
    enabled_events, execute_event, sets_conflict, AccessSet, EventId, ExecError, Program,
    Valuation,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub event: EventId,
    pub accesses: AccessSet,
    pub failures: Vec<String>,
    pub dst: Valuation,
}

/// A transition sequence from the initial state.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OracleTrace {
    pub steps: Vec<Step>,
}

impl OracleTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn events(&self) -> Vec<EventId> {
        self.steps.iter().map(|s| s.event).collect()
    }
}

/// Depth-first enumeration of every trace of exactly `max_len` transitions,
/// plus the shorter ones that end in a state with nothing enabled. Their
/// prefixes are all traces of length at most `max_len`.
pub fn enumerate_traces(prog: &Program, max_len: usize) -> TraceIter<'_> {
    let initial = prog.initial_valuation();
    let pending = enabled_events(&initial);
    TraceIter {
        prog,
        max_len,
        current: Vec::new(),
        frames: vec![Frame {
            val: initial,
            pending,
            next: 0,
        }],
        emitted_root: false,
    }
}

struct Frame {
    val: Valuation,
    pending: Vec<EventId>,
    next: usize,
}

pub struct TraceIter<'p> {
    prog: &'p Program,
    max_len: usize,
    current: Vec<Step>,
    frames: Vec<Frame>,
    emitted_root: bool,
}

impl Iterator for TraceIter<'_> {
    type Item = Result<OracleTrace, ExecError>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.emitted_root {
            self.emitted_root = true;
            if self.max_len == 0 || self.frames[0].pending.is_empty() {
                self.frames.clear();
                return Some(Ok(OracleTrace::default()));
            }
        }
        loop {
            let frame = self.frames.last_mut()?;
            let Some(&e) = frame.pending.get(frame.next) else {
                self.frames.pop();
                self.current.pop();
                continue;
            };
            frame.next += 1;
            let out = match execute_event(self.prog, &frame.val, e) {
                Ok(out) => out,
                Err(err) => {
                    self.frames.clear();
                    return Some(Err(err));
                }
            };
            self.current.push(Step {
                event: e,
                accesses: out.accesses,
                failures: out.failures,
                dst: out.valuation.clone(),
            });
            let pending = enabled_events(&out.valuation);
            if self.current.len() == self.max_len || pending.is_empty() {
                let trace = OracleTrace {
                    steps: self.current.clone(),
                };
                self.current.pop();
                return Some(Ok(trace));
            }
            self.frames.push(Frame {
                val: out.valuation,
                pending,
                next: 0,
            });
        }
    }
}

/// Transitive closure of access conflicts between positions of a trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependenceOrder {
    before: Vec<Vec<bool>>,
}

impl DependenceOrder {
    pub fn len(&self) -> usize {
        self.before.len()
    }

    pub fn is_empty(&self) -> bool {
        self.before.is_empty()
    }

    /// Whether position `i` must precede position `j` (0-based).
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.before[i][j]
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| self.before[*i][*j])
            .collect()
    }
}

pub fn dependence_order(steps: &[Step]) -> DependenceOrder {
    let n = steps.len();
    let mut before = vec![vec![false; n]; n];
    for j in 0..n {
        for i in 0..j {
            if sets_conflict(&steps[i].accesses, &steps[j].accesses) {
                before[i][j] = true;
            }
        }
    }
    // Conflicts only point forward, so closing in index order suffices.
    for j in 0..n {
        for i in (0..j).rev() {
            if before[i][j] {
                continue;
            }
            before[i][j] = (i + 1..j).any(|k| before[i][k] && before[k][j]);
        }
    }
    DependenceOrder { before }
}

/// Whether `tau` is a prefix of some linearization of the dependence order
/// of `tau_prime`: each step of `tau` is matched, in order, to a distinct
/// step of `tau_prime` with the same event and accesses whose dependence
/// predecessors are all matched already. Both traces start at the initial
/// state, so equal events and accesses replay to the same states.
pub fn is_prefix_of_linearization(tau: &[Step], tau_prime: &[Step]) -> bool {
    if tau.len() > tau_prime.len() {
        return false;
    }
    let order = dependence_order(tau_prime);
    let mut taken = vec![false; tau_prime.len()];
    match_from(0, tau, tau_prime, &order, &mut taken)
}

fn match_from(
    j: usize,
    tau: &[Step],
    tau_prime: &[Step],
    order: &DependenceOrder,
    taken: &mut [bool],
) -> bool {
    if j == tau.len() {
        return true;
    }
    for i in 0..tau_prime.len() {
        let candidate = &tau_prime[i];
        if taken[i]
            || candidate.event != tau[j].event
            || candidate.accesses != tau[j].accesses
            || (0..i).any(|k| order.precedes(k, i) && !taken[k])
        {
            continue;
        }
        taken[i] = true;
        if match_from(j + 1, tau, tau_prime, order, taken) {
            return true;
        }
        taken[i] = false;
    }
    false
}

/// Searches R for a path from `initial` that has `tau` as a prefix of one of
/// its linearizations. `tau` may have at most 64 steps.
///
/// The search walks R, deciding for each step of the path whether it stands
/// for some not yet matched step `tau[j]` or stays unmatched. A matched step
/// must carry the same event and accesses as `tau[j]`, and every earlier
/// matched step it conflicts with must come before `j` in `tau`. An
/// unmatched step must not conflict with any step of `tau` still to be
/// matched, since that step would then depend on it. The search space
/// (state, matched positions) is finite, so the answer is exact for paths of
/// any length.
pub fn find_linearizing_path(
    graph: &StateSpace,
    initial: StateId,
    tau: &[Step],
) -> Option<Vec<TransitionId>> {
    type Key = (StateId, u64);
    assert!(tau.len() <= 64, "trace too long for the matching search");
    let full = if tau.len() == 64 {
        u64::MAX
    } else {
        (1u64 << tau.len()) - 1
    };
    if tau.is_empty() {
        return Some(Vec::new());
    }
    let is_matched = |mask: u64, i: usize| mask & (1 << i) != 0;
    let mut parent: HashMap<Key, Option<(Key, TransitionId)>> = HashMap::new();
    parent.insert((initial, 0), None);
    let mut queue = VecDeque::from([(initial, 0u64)]);
    while let Some(key) = queue.pop_front() {
        let (s, matched) = key;
        for &t in graph.outgoing(s) {
            let tr = graph.transition(t);
            let conflicts_with = |i: usize| sets_conflict(&tau[i].accesses, &tr.accesses);
            let mut next = Vec::new();
            for (j, step) in tau.iter().enumerate() {
                if !is_matched(matched, j)
                    && step.event == tr.event
                    && step.accesses == tr.accesses
                    && (j + 1..tau.len()).all(|i| !is_matched(matched, i) || !conflicts_with(i))
                {
                    next.push((tr.dst, matched | (1 << j)));
                }
            }
            if (0..tau.len()).all(|i| is_matched(matched, i) || !conflicts_with(i)) {
                next.push((tr.dst, matched));
            }
            for k in next {
                if parent.contains_key(&k) {
                    continue;
                }
                parent.insert(k, Some((key, t)));
                if k.1 == full {
                    let mut path = Vec::new();
                    let mut cur = k;
                    while let Some(Some((prev, t))) = parent.get(&cur) {
                        path.push(*t);
                        cur = *prev;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(k);
            }
        }
    }
    None
}
