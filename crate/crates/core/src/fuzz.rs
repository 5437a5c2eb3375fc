//! Differential testing of the two engine modes against the exhaustive
//! oracle on generated programs.

use std::collections::BTreeSet;

use crate::batch;
use crate::corpus::{generate, GeneratorConfig};
use crate::engine::{explore_all, EngineConfig, Mode, Proviso};
use crate::oracle::{exhaustive_explore, OracleError};
use crate::program::Program;

pub type Sites = BTreeSet<(String, String)>;

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub generator: GeneratorConfig,
    pub node_cap: usize,
    /// Runs the engines with the any-revisit stopping rule, which is known
    /// to miss violations. Used to check that the harness notices.
    pub inject_bug: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            generator: GeneratorConfig::default(),
            node_cap: crate::oracle::DEFAULT_NODE_CAP,
            inject_bug: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub seed: u64,
    pub program: String,
    pub dpor: Sites,
    pub summary_cache: Sites,
    pub exhaustive: Sites,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeedOutcome {
    Agree,
    /// The oracle hit its node cap; the seed says nothing either way.
    Skipped,
    Mismatch(Mismatch),
    Error(String),
}

#[derive(Clone, Debug, Default)]
pub struct FuzzSummary {
    pub agreed: usize,
    pub skipped: Vec<u64>,
    pub mismatches: Vec<Mismatch>,
    pub errors: Vec<(u64, String)>,
}

impl FuzzSummary {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.errors.is_empty()
    }
}

fn engine_sites(prog: &Program, mode: Mode, inject_bug: bool) -> Result<Sites, String> {
    let cfg = EngineConfig {
        mode,
        proviso: if inject_bug {
            Proviso::AnyRevisit
        } else {
            Proviso::FullCycle
        },
        ..Default::default()
    };
    explore_all(prog, &cfg)
        .map(|r| r.violation_sites())
        .map_err(|e| e.to_string())
}

pub fn check_program(seed: u64, prog: &Program, cfg: &FuzzConfig) -> SeedOutcome {
    let exhaustive = match exhaustive_explore(prog, cfg.node_cap) {
        Ok(ex) => ex.report.violation_sites(),
        Err(OracleError::NodeCap(_)) => return SeedOutcome::Skipped,
        Err(e) => return SeedOutcome::Error(e.to_string()),
    };
    let run = |mode| engine_sites(prog, mode, cfg.inject_bug);
    let (dpor, summary_cache) = match (run(Mode::Dpor), run(Mode::SummaryCache)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return SeedOutcome::Error(e),
    };
    if dpor == exhaustive && summary_cache == exhaustive {
        return SeedOutcome::Agree;
    }
    SeedOutcome::Mismatch(Mismatch {
        seed,
        program: prog.to_string(),
        dpor,
        summary_cache,
        exhaustive,
    })
}

pub fn check_seed(seed: u64, cfg: &FuzzConfig) -> SeedOutcome {
    let prog = generate(&GeneratorConfig {
        seed,
        ..cfg.generator.clone()
    });
    check_program(seed, &prog, cfg)
}

/// Checks seeds `start..start + count`.
pub fn run_fuzz(start: u64, count: u64, cfg: &FuzzConfig) -> FuzzSummary {
    let seeds: Vec<u64> = (start..start.saturating_add(count)).collect();
    let outcomes = batch::map(&seeds, |s| check_seed(*s, cfg));
    let mut summary = FuzzSummary::default();
    for (seed, outcome) in seeds.into_iter().zip(outcomes) {
        match outcome {
            SeedOutcome::Agree => summary.agreed += 1,
            SeedOutcome::Skipped => summary.skipped.push(seed),
            SeedOutcome::Mismatch(m) => summary.mismatches.push(m),
            SeedOutcome::Error(e) => summary.errors.push((seed, e)),
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::bundled_programs;

    #[test]
    fn zero_count_does_nothing() {
        let s = run_fuzz(1, 0, &FuzzConfig::default());
        assert_eq!(s.agreed, 0);
        assert!(s.ok());
    }

    #[test]
    fn small_batch_agrees() {
        let s = run_fuzz(1, 20, &FuzzConfig::default());
        assert!(s.ok(), "{:?}", s.mismatches);
        assert_eq!(s.agreed + s.skipped.len(), 20);
    }

    #[test]
    fn injected_bug_is_caught_on_nonterm_threads() {
        let prog = &bundled_programs()["nonterm-threads"];
        let cfg = FuzzConfig {
            inject_bug: true,
            ..Default::default()
        };
        assert!(matches!(check_program(0, prog, &cfg), SeedOutcome::Mismatch(_)));
        assert_eq!(
            check_program(0, prog, &FuzzConfig::default()),
            SeedOutcome::Agree
        );
    }

    #[test]
    fn tiny_node_cap_skips() {
        let cfg = FuzzConfig {
            node_cap: 1,
            ..Default::default()
        };
        let s = run_fuzz(1, 5, &cfg);
        assert!(s.ok());
        assert!(!s.skipped.is_empty());
    }
}
