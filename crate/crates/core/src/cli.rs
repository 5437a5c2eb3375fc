//! Command-line front end. Exit codes: 0 when no violation was found, 1 when
//! at least one was, 2 on errors and exhausted caps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::corpus::{bundled_programs, GeneratorConfig};
use crate::engine::{Engine, EngineConfig, Mode, StopPolicy};
use crate::fuzz::{run_fuzz, FuzzConfig};
use crate::oracle::{exhaustive_explore, node_cap_from_env};
use crate::program::{parse_program, Program};
use crate::report::{ExplorationReport, Termination};

pub const EXIT_CLEAN: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "sdpor", version, about = "Stateful DPOR model checker for event-driven programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Explore one program and report assertion failures.
    Check(CheckArgs),
    /// Compare both engine modes with the exhaustive oracle on generated programs.
    Fuzz(FuzzArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CliMode {
    Dpor,
    SummaryCache,
    Exhaustive,
}

impl CliMode {
    fn name(self) -> &'static str {
        match self {
            CliMode::Dpor => "dpor",
            CliMode::SummaryCache => "summary-cache",
            CliMode::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Stop {
    First,
    Exhaust,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Program file, or the name of a bundled program (nonterm-threads,
    /// missing-exec, per-memory).
    #[arg(long)]
    pub program: String,
    #[arg(long, value_enum, default_value = "dpor")]
    pub mode: CliMode,
    #[arg(long, value_enum, default_value = "exhaust")]
    pub stop: Stop,
    #[arg(long)]
    pub max_executions: Option<u64>,
    #[arg(long)]
    pub max_trace_len: Option<usize>,
    /// Write the explored state graph in DOT format.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub count: u64,
    /// Generator configuration as JSON; missing fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub inject_bug: bool,
}

pub fn run(cli: Cli) -> ExitCode {
    let code = match cli.command {
        Command::Check(args) => cmd_check(&args),
        Command::Fuzz(args) => cmd_fuzz(&args),
    };
    ExitCode::from(code)
}

fn load_program(arg: &str) -> Result<Program, String> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(prog) = bundled_programs().remove(arg) {
            return Ok(prog);
        }
    }
    let src = fs::read_to_string(path).map_err(|e| format!("cannot read {arg}: {e}"))?;
    parse_program(&src).map_err(|e| format!("{arg}: {e}"))
}

/// The JSON report. Keys are sorted; `wall_ms` is the only field that varies
/// between identical runs.
pub fn report_json(program: &str, mode: CliMode, report: &ExplorationReport) -> Value {
    json!({
        "program": program,
        "mode": mode.name(),
        "states": report.states,
        "transitions": report.transitions,
        "executions": report.executions,
        "violations": report.violations,
        "wall_ms": report.wall_time.as_millis() as u64,
        "terminated_by": report.terminated_by,
    })
}

fn print_summary(program: &str, mode: CliMode, r: &ExplorationReport) {
    println!("program: {program}");
    println!("mode: {}", mode.name());
    println!(
        "states: {}  transitions: {}  executions: {}  time: {} ms",
        r.states,
        r.transitions,
        r.executions,
        r.wall_time.as_millis()
    );
    if r.terminated_by == Termination::Cap {
        println!("stopped at a configured cap; results are partial");
    }
    if r.violations.is_empty() {
        println!("no violations");
    }
    for v in &r.violations {
        println!("violation in {}: {} via {}", v.event, v.message, v.trace.join(" -> "));
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn explore(args: &CheckArgs, prog: &Program) -> Result<(ExplorationReport, String), String> {
    match args.mode {
        CliMode::Exhaustive => {
            let ex = exhaustive_explore(prog, node_cap_from_env()).map_err(|e| e.to_string())?;
            let dot = ex.to_dot(prog);
            Ok((ex.report, dot))
        }
        CliMode::Dpor | CliMode::SummaryCache => {
            let cfg = EngineConfig {
                mode: if args.mode == CliMode::Dpor {
                    Mode::Dpor
                } else {
                    Mode::SummaryCache
                },
                stop_policy: match args.stop {
                    Stop::First => StopPolicy::FirstViolation,
                    Stop::Exhaust => StopPolicy::Exhaust,
                },
                max_executions: args.max_executions,
                max_trace_len: args.max_trace_len,
                ..Default::default()
            };
            let mut engine = Engine::new(prog, cfg).map_err(|e| e.to_string())?;
            let report = engine.run().map_err(|e| e.to_string())?;
            Ok((report, engine.graph().to_dot(prog)))
        }
    }
}

pub fn cmd_check(args: &CheckArgs) -> u8 {
    let result = load_program(&args.program).and_then(|prog| {
        let (report, dot) = explore(args, &prog)?;
        if let Some(path) = &args.dot {
            write_file(path, &dot)?;
        }
        if let Some(path) = &args.json {
            let mut text = serde_json::to_string_pretty(&report_json(&args.program, args.mode, &report))
                .map_err(|e| e.to_string())?;
            text.push('\n');
            write_file(path, &text)?;
        }
        Ok(report)
    });
    let report = match result {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_ERROR;
        }
    };
    if !args.quiet {
        print_summary(&args.program, args.mode, &report);
    }
    if report.terminated_by == Termination::Cap {
        eprintln!("error: exploration cap reached before the search finished");
        EXIT_ERROR
    } else if report.violations.is_empty() {
        EXIT_CLEAN
    } else {
        EXIT_VIOLATION
    }
}

fn load_generator_config(path: Option<&Path>) -> Result<GeneratorConfig, String> {
    let cfg = match path {
        None => GeneratorConfig::default(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_fuzz(args: &FuzzArgs) -> u8 {
    let generator = match load_generator_config(args.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_ERROR;
        }
    };
    let cfg = FuzzConfig {
        generator,
        node_cap: node_cap_from_env(),
        inject_bug: args.inject_bug,
    };
    let started = std::time::Instant::now();
    let summary = run_fuzz(args.seed, args.count, &cfg);
    for seed in &summary.skipped {
        eprintln!("warning: seed {seed} skipped, oracle node cap reached");
    }
    for m in &summary.mismatches {
        println!("mismatch at seed {}", m.seed);
        println!("{}", m.program);
        println!("  dpor:          {:?}", m.dpor);
        println!("  summary-cache: {:?}", m.summary_cache);
        println!("  exhaustive:    {:?}", m.exhaustive);
    }
    for (seed, e) in &summary.errors {
        eprintln!("error at seed {seed}: {e}");
    }
    println!(
        "{} seeds: {} agreed, {} skipped, {} mismatched, {} errors ({:.1?})",
        args.count,
        summary.agreed,
        summary.skipped.len(),
        summary.mismatches.len(),
        summary.errors.len(),
        Duration::from_millis(started.elapsed().as_millis() as u64),
    );
    if !summary.errors.is_empty() {
        EXIT_ERROR
    } else if !summary.mismatches.is_empty() {
        EXIT_VIOLATION
    } else {
        EXIT_CLEAN
    }
}
