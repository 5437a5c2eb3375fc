//! Reference programs and a seeded random program generator.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::program::{
    parse_program, BinOp, EventDef, EventId, Expr, Program, Stmt, Target, VarId,
};

pub const NONTERM_THREADS: &str = include_str!("../data/nonterm-threads.evt");
pub const MISSING_EXEC: &str = include_str!("../data/missing-exec.evt");
pub const PER_MEMORY: &str = include_str!("../data/per-memory.evt");

/// The three reference programs, keyed by name.
pub fn bundled_programs() -> BTreeMap<&'static str, Program> {
    [
        ("nonterm-threads", NONTERM_THREADS),
        ("missing-exec", MISSING_EXEC),
        ("per-memory", PER_MEMORY),
    ]
    .into_iter()
    .map(|(name, src)| {
        let prog = parse_program(src).expect("bundled corpus program parses");
        (name, prog)
    })
    .collect()
}

/// `n` run-once events that each write their own variable.
pub fn independent_events(n: usize) -> Program {
    let mut src = String::new();
    for i in 1..=n {
        src.push_str(&format!("var v{i} = 0\n"));
    }
    for i in 1..=n {
        src.push_str(&format!(
            "event e{i} enabled {{\n    v{i} = 1;\n    self_disable;\n}}\n"
        ));
    }
    parse_program(&src).expect("generated source parses")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Inclusive range the event count is drawn from.
    pub n_events: (u32, u32),
    pub n_vars: (u32, u32),
    /// Largest value in the variable domain `0..=max_value`.
    pub max_value: i64,
    pub max_stmts_per_event: u32,
    pub p_enable_disable: f64,
    pub p_assert: f64,
    pub p_branch: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            n_events: (1, 4),
            n_vars: (1, 3),
            max_value: 2,
            max_stmts_per_event: 4,
            p_enable_disable: 0.2,
            p_assert: 0.2,
            p_branch: 0.25,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(seed: u64) -> Self {
        GeneratorConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ranges = [("n_events", self.n_events, 4), ("n_vars", self.n_vars, 3)];
        for (name, (lo, hi), max) in ranges {
            if lo < 1 || lo > hi || hi > max {
                return Err(format!("{name} must satisfy 1 <= lo <= hi <= {max}"));
            }
        }
        if !(0..=2).contains(&self.max_value) {
            return Err("max_value must lie in 0..=2".into());
        }
        if !(1..=4).contains(&self.max_stmts_per_event) {
            return Err("max_stmts_per_event must lie in 1..=4".into());
        }
        for (name, p) in [
            ("p_enable_disable", self.p_enable_disable),
            ("p_assert", self.p_assert),
            ("p_branch", self.p_branch),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Builds a random program. Assignments only store literals or copy another
/// variable, and guards compare a variable with a literal, so every variable
/// stays inside `0..=max_value` and the state space is finite.
pub fn generate(cfg: &GeneratorConfig) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_events = rng.gen_range(cfg.n_events.0..=cfg.n_events.1) as usize;
    let n_vars = rng.gen_range(cfg.n_vars.0..=cfg.n_vars.1) as usize;
    let gen = Gen {
        cfg,
        n_events,
        n_vars,
    };
    let variables = (0..n_vars)
        .map(|i| (format!("v{i}"), rng.gen_range(0..=cfg.max_value)))
        .collect();
    let mut enabled: Vec<bool> = (0..n_events).map(|_| rng.gen_bool(0.75)).collect();
    if !enabled.iter().any(|e| *e) {
        enabled[0] = true;
    }
    let events = (0..n_events)
        .map(|i| {
            let len = rng.gen_range(1..=cfg.max_stmts_per_event) as usize;
            EventDef {
                name: format!("e{i}"),
                initially_enabled: enabled[i],
                registers: Vec::new(),
                body: gen.block(&mut rng, len, 0),
            }
        })
        .collect();
    Program { variables, events }
}

struct Gen<'a> {
    cfg: &'a GeneratorConfig,
    n_events: usize,
    n_vars: usize,
}

impl Gen<'_> {
    fn var(&self, rng: &mut ChaCha8Rng) -> VarId {
        VarId(rng.gen_range(0..self.n_vars) as u32)
    }

    fn literal(&self, rng: &mut ChaCha8Rng) -> Expr {
        Expr::Lit(rng.gen_range(0..=self.cfg.max_value))
    }

    fn comparison(&self, rng: &mut ChaCha8Rng) -> Expr {
        let op = *[BinOp::Eq, BinOp::Ne].choose(rng).unwrap();
        Expr::Binary(
            op,
            Box::new(Expr::Shared(self.var(rng))),
            Box::new(self.literal(rng)),
        )
    }

    fn block(&self, rng: &mut ChaCha8Rng, len: usize, depth: usize) -> Vec<Stmt> {
        (0..len).map(|_| self.stmt(rng, depth)).collect()
    }

    fn stmt(&self, rng: &mut ChaCha8Rng, depth: usize) -> Stmt {
        let cfg = self.cfg;
        if depth < 2 && rng.gen_bool(cfg.p_branch) {
            let then_len = rng.gen_range(1..=2);
            let else_len = rng.gen_range(0..=1);
            return Stmt::If {
                cond: self.comparison(rng),
                then_branch: self.block(rng, then_len, depth + 1),
                else_branch: self.block(rng, else_len, depth + 1),
            };
        }
        if rng.gen_bool(cfg.p_assert) {
            return Stmt::Assert(self.comparison(rng));
        }
        if rng.gen_bool(cfg.p_enable_disable) {
            let target = EventId(rng.gen_range(0..self.n_events) as u32);
            return match rng.gen_range(0..3) {
                0 => Stmt::Enable(target),
                1 => Stmt::Disable(target),
                _ => Stmt::SelfDisable,
            };
        }
        let target = Target::Shared(self.var(rng));
        let value = if self.n_vars > 1 && rng.gen_bool(0.3) {
            Expr::Shared(self.var(rng))
        } else {
            self.literal(rng)
        };
        Stmt::Assign(target, value)
    }
}
