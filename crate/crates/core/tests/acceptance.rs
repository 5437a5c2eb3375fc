//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use sdpor::corpus::{generate, independent_events, bundled_programs, GeneratorConfig};
use sdpor::engine::{explore_all, is_full_cycle, Engine, EngineConfig, Mode, Proviso};
use sdpor::fuzz::{run_fuzz, FuzzConfig};
use sdpor::oracle::{
    check_persistent, enumerate_traces, exhaustive_explore, find_linearizing_path,
    is_prefix_of_linearization, Step, DEFAULT_NODE_CAP,
};
use sdpor::program::{execute_event, Program};

type Outcome = Result<String, String>;

const MODES: [Mode; 2] = [Mode::Dpor, Mode::SummaryCache];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn replay_failures(prog: &Program, names: &[String]) -> Vec<(String, String)> {
    let mut val = prog.initial_valuation();
    let mut out = Vec::new();
    for e in prog.resolve_events(names).expect("witness names resolve") {
        let o = execute_event(prog, &val, e).expect("witness replays");
        for f in o.failures {
            out.push((prog.event_name(e).to_string(), f));
        }
        val = o.valuation;
    }
    out
}

fn counterexamples() -> Outcome {
    let corpus = bundled_programs();
    let mut times = Vec::new();
    for (name, prog) in &corpus {
        let started = Instant::now();
        let r = explore_all(prog, &EngineConfig::default()).map_err(|e| e.to_string())?;
        let elapsed = started.elapsed();
        times.push(format!("{name} {elapsed:.1?}"));
        ensure(elapsed < Duration::from_secs(1), || format!("{name} took {elapsed:?}"))?;
        ensure(!r.violations.is_empty(), || format!("{name}: no violation"))?;
        for v in &r.violations {
            let last = replay_failures(prog, &v.trace);
            ensure(last.contains(&(v.event.clone(), v.message.clone())), || {
                format!("{name}: witness {:?} does not replay", v.trace)
            })?;
        }
    }
    let missing = explore_all(&corpus["missing-exec"], &EngineConfig::default()).unwrap();
    ensure(missing.has_witness(&["e2", "e4"]), || {
        format!("missing-exec witnesses {:?}", missing.violations)
    })?;
    let per_memory = explore_all(&corpus["per-memory"], &EngineConfig::default()).unwrap();
    ensure(
        per_memory
            .violations
            .iter()
            .any(|v| v.event == "e3" && v.message == "assert(y==1)"),
        || format!("per-memory witnesses {:?}", per_memory.violations),
    )?;
    ensure(per_memory.has_witness(&["e2", "e3"]), || {
        format!("per-memory witnesses {:?}", per_memory.violations)
    })?;
    Ok(times.join(", "))
}

fn premature_termination() -> Outcome {
    let prog = &bundled_programs()["nonterm-threads"];
    let weak = EngineConfig {
        proviso: Proviso::AnyRevisit,
        ..Default::default()
    };
    let weak_report = explore_all(prog, &weak).map_err(|e| e.to_string())?;
    let real_report = explore_all(prog, &EngineConfig::default()).map_err(|e| e.to_string())?;
    ensure(weak_report.violations.is_empty(), || {
        format!("any-revisit engine found {:?}", weak_report.violations)
    })?;
    ensure(real_report.has_witness(&["eT1", "eT3"]), || {
        format!("full-cycle engine found {:?}", real_report.violations)
    })?;
    Ok(format!(
        "any-revisit: 0 violations in {} executions; full-cycle: {} violations",
        weak_report.executions,
        real_report.violations.len()
    ))
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let summary = run_fuzz(1, 200, &FuzzConfig::default());
    let elapsed = started.elapsed();
    ensure(summary.ok(), || {
        let seeds: Vec<u64> = summary.mismatches.iter().map(|m| m.seed).collect();
        format!("mismatching seeds {seeds:?}, errors {:?}", summary.errors)
    })?;
    ensure(summary.skipped.is_empty(), || {
        format!("oracle cap hit on seeds {:?}", summary.skipped)
    })?;
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!("200 seeds agree in {elapsed:.1?}"))
}

fn corpus_and_generated(count: u64) -> Vec<(String, Program)> {
    let mut progs: Vec<(String, Program)> = bundled_programs()
        .into_iter()
        .map(|(n, p)| (n.to_string(), p))
        .collect();
    for seed in 1..=count {
        progs.push((format!("seed {seed}"), generate(&GeneratorConfig::with_seed(seed))));
    }
    progs
}

fn persistent_sets() -> Outcome {
    let mut nodes = 0;
    for (name, prog) in corpus_and_generated(50) {
        for mode in MODES {
            let mut engine = Engine::new(&prog, EngineConfig::with_mode(mode)).unwrap();
            engine.run().map_err(|e| e.to_string())?;
            for n in engine.graph().nodes() {
                let ok = check_persistent(&prog, &n.valuation, &n.done, DEFAULT_NODE_CAP)
                    .map_err(|e| format!("{name} {mode:?} s{}: {e}", n.id.0))?;
                ensure(ok, || format!("{name} {mode:?}: done(s{}) not persistent", n.id.0))?;
                nodes += 1;
            }
        }
    }
    Ok(format!("{nodes} node checks across both modes"))
}

fn trace_prefix() -> Outcome {
    const MAX_LEN: usize = 6;
    let started = Instant::now();
    let mut checked = 0usize;
    for (name, prog) in corpus_and_generated(25) {
        for mode in MODES {
            let mut engine = Engine::new(&prog, EngineConfig::with_mode(mode)).unwrap();
            engine.run().map_err(|e| e.to_string())?;
            let graph = engine.graph();
            for trace in enumerate_traces(&prog, MAX_LEN) {
                let tau = trace.map_err(|e| e.to_string())?.steps;
                let path = find_linearizing_path(graph, engine.initial_state(), &tau)
                    .ok_or_else(|| format!("{name} {mode:?}: no path in R for {tau:?}"))?;
                let tau_prime: Vec<Step> = path
                    .iter()
                    .map(|t| {
                        let tr = graph.transition(*t);
                        Step {
                            event: tr.event,
                            accesses: tr.accesses.clone(),
                            failures: tr.failures.clone(),
                            dst: graph.node(tr.dst).valuation.clone(),
                        }
                    })
                    .collect();
                ensure(is_prefix_of_linearization(&tau, &tau_prime), || {
                    format!("{name} {mode:?}: path found but linearization check failed")
                })?;
                checked += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} maximal traces in {elapsed:.1?}"))
}

fn reduction() -> Outcome {
    let n = 5u32;
    let prog = independent_events(n as usize);
    // Any subset of the run-once events may have run; from a state with k
    // events done, n - k remain.
    let states = 2usize.pow(n);
    let transitions = (0..=n)
        .map(|k| binomial(n, k) * (n - k) as usize)
        .sum::<usize>();
    let ex = exhaustive_explore(&prog, DEFAULT_NODE_CAP).map_err(|e| e.to_string())?;
    ensure((states, transitions) == (32, 80), || {
        format!("analytic count {states} states / {transitions} transitions")
    })?;
    ensure((ex.report.states, ex.report.transitions) == (32, 80), || {
        format!("oracle {} / {}", ex.report.states, ex.report.transitions)
    })?;
    for mode in MODES {
        let r = explore_all(&prog, &EngineConfig::with_mode(mode)).map_err(|e| e.to_string())?;
        ensure((r.transitions, r.states) == (5, 6), || {
            format!("{mode:?}: {} transitions / {} states", r.transitions, r.states)
        })?;
    }
    let mut rows = Vec::new();
    for (name, prog) in bundled_programs() {
        let ex = exhaustive_explore(&prog, DEFAULT_NODE_CAP).map_err(|e| e.to_string())?;
        let r = explore_all(&prog, &EngineConfig::default()).map_err(|e| e.to_string())?;
        ensure(r.transitions <= ex.report.transitions, || {
            format!("{name}: dpor {} > exhaustive {}", r.transitions, ex.report.transitions)
        })?;
        rows.push(format!("{name} {}/{}", r.transitions, ex.report.transitions));
    }
    Ok(format!("independent 5/80; corpus dpor/exhaustive {}", rows.join(", ")))
}

fn binomial(n: u32, k: u32) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) as usize / (i + 1) as usize)
}

fn full_cycle_vector() -> Outcome {
    let prog = &bundled_programs()["missing-exec"];
    let ev = |n: &str| prog.event_by_name(n).unwrap();
    let mut engine = Engine::new(prog, EngineConfig::default()).unwrap();
    let mut s = engine.initial_state();
    let mut results = Vec::new();
    for name in ["e1", "e2", "e3", "e4"] {
        let t = engine.run_transition(s, ev(name)).map_err(|e| e.to_string())?;
        results.push(is_full_cycle(engine.graph(), engine.trace(), t));
        engine.extend_trace(t);
        s = engine.graph().transition(t).dst;
    }
    ensure(results == [false, false, false, true], || {
        format!("is_full_cycle along e1,e2,e3,e4: {results:?}")
    })?;
    Ok("e3 into s1: false; e4 into s0: true".into())
}

fn run_check(program: &str, dir: &Path, tag: &str) -> Result<(String, String), String> {
    let json = dir.join(format!("{tag}.json"));
    let dot = dir.join(format!("{tag}.dot"));
    let status = Command::new(env!("CARGO_BIN_EXE_sdpor"))
        .args(["check", "--quiet", "--program", program, "--json"])
        .arg(&json)
        .arg("--dot")
        .arg(&dot)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.code() == Some(1), || format!("{program}: exit {status}"))?;
    let mut report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).map_err(|e| e.to_string())?;
    report.as_object_mut().unwrap().remove("wall_ms");
    Ok((report.to_string(), fs::read_to_string(&dot).unwrap()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for name in bundled_programs().keys() {
        let first = run_check(name, dir.path(), &format!("{name}-1"))?;
        let second = run_check(name, dir.path(), &format!("{name}-2"))?;
        ensure(first == second, || format!("{name}: outputs differ"))?;
    }
    Ok("JSON and DOT identical across runs".into())
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("counterexample detection", counterexamples),
        ("premature-termination regression", premature_termination),
        ("oracle equivalence", oracle_equivalence),
        ("persistent sets", persistent_sets),
        ("trace-prefix theorem", trace_prefix),
        ("reduction sanity", reduction),
        ("full-cycle unit vector", full_cycle_vector),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
