use std::collections::{HashMap, HashSet, VecDeque};

use super::OracleError;
use crate::graph::EventSet;
use crate::program::{enabled_events, execute_event, sets_conflict, AccessSet, EventId, Program, Valuation};

/// Decides whether `set` is persistent in `state`.
///
/// Explores every state reachable from `state` by events outside `set`. At
/// each such state, every outside event must neither toggle the enabled flag
/// of a member of `set` nor conflict with the accesses that member would
/// perform at that same state. Stops with [`OracleError::NodeCap`] once more
/// than `state_cap` states have been visited.
pub fn check_persistent(
    prog: &Program,
    state: &Valuation,
    set: &EventSet,
    state_cap: usize,
) -> Result<bool, OracleError> {
    let mut seen: HashSet<Valuation> = HashSet::from([state.clone()]);
    let mut queue = VecDeque::from([state.clone()]);
    let mut member_accesses: HashMap<(Valuation, EventId), AccessSet> = HashMap::new();

    while let Some(u) = queue.pop_front() {
        for y in enabled_events(&u).into_iter().filter(|e| !set.contains(e)) {
            let out = execute_event(prog, &u, y)?;
            for &x in set {
                if !u.is_enabled(x) || out.valuation.is_enabled(x) != u.is_enabled(x) {
                    return Ok(false);
                }
                let key = (u.clone(), x);
                let acc = match member_accesses.get(&key) {
                    Some(acc) => acc,
                    None => {
                        let acc = execute_event(prog, &u, x)?.accesses;
                        member_accesses.entry(key).or_insert(acc)
                    }
                };
                if sets_conflict(acc, &out.accesses) {
                    return Ok(false);
                }
            }
            if seen.insert(out.valuation.clone()) {
                if seen.len() > state_cap {
                    return Err(OracleError::NodeCap(state_cap));
                }
                queue.push_back(out.valuation);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::bundled_programs;
    use crate::program::parse_program;

    #[test]
    fn whole_enabled_set_is_persistent() {
        let p = &bundled_programs()["missing-exec"];
        let s0 = p.initial_valuation();
        let all: EventSet = enabled_events(&s0).into_iter().collect();
        assert!(check_persistent(p, &s0, &all, 1000).unwrap());
    }

    #[test]
    fn per_memory_singleton_is_not_persistent() {
        // e2 then e3 reads y, which e1 writes.
        let p = &bundled_programs()["per-memory"];
        let s0 = p.initial_valuation();
        assert!(!check_persistent(p, &s0, &EventSet::from([EventId(0)]), 1000).unwrap());
    }

    #[test]
    fn disjoint_events_are_persistent_alone() {
        let p = parse_program("var a = 0\nvar b = 0\nevent x enabled { a = 1; }\nevent y enabled { b = 1; }").unwrap();
        let s0 = p.initial_valuation();
        for e in [EventId(0), EventId(1)] {
            assert!(check_persistent(&p, &s0, &EventSet::from([e]), 1000).unwrap());
        }
    }

    #[test]
    fn disabling_a_member_breaks_persistence() {
        let p = parse_program("event x enabled { }\nevent y enabled { disable(x); }").unwrap();
        let s0 = p.initial_valuation();
        assert!(!check_persistent(&p, &s0, &EventSet::from([EventId(0)]), 1000).unwrap());
    }

    #[test]
    fn cap_is_inconclusive() {
        let p = parse_program("var a = 0\nevent x enabled { }\nevent y enabled { a = a + 1; }").unwrap();
        let s0 = p.initial_valuation();
        assert_eq!(
            check_persistent(&p, &s0, &EventSet::from([EventId(0)]), 20).unwrap_err(),
            OracleError::NodeCap(20)
        );
    }
}
