//! The event language: program representation, parser, pretty-printer and
//! the atomic handler interpreter.

mod exec;
mod parse;
mod pretty;

use std::collections::BTreeSet;
use std::fmt;

pub use exec::{enabled_events, execute_event, ExecError, Outcome};
pub use parse::{parse_program, ParseError};

/// Index of a shared variable in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct VarId(pub u32);

/// Index of an event in declaration order. The ordering of `EventId`s is the
/// total event order used for every tie-break in the checker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct EventId(pub u32);

/// Index of a handler-local register within one event body.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    And,
    Or,
}

impl BinOp {
    /// Binding strength; higher binds tighter.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }

    pub(crate) fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(i64),
    Shared(VarId),
    Reg(RegId),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Shared(VarId),
    Reg(RegId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Assign(Target, Expr),
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    Assert(Expr),
    Enable(EventId),
    Disable(EventId),
    SelfDisable,
}

/// One event handler: a finite, loop-free statement list executed atomically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventDef {
    pub name: String,
    pub initially_enabled: bool,
    /// Register names, indexed by `RegId`. Registers never outlive one execution.
    pub registers: Vec<String>,
    pub body: Vec<Stmt>,
}

/// A validated event program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    /// Shared variables with their initial values, in declaration order.
    pub variables: Vec<(String, i64)>,
    pub events: Vec<EventDef>,
}

impl Program {
    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn event_ids(&self) -> impl Iterator<Item = EventId> {
        (0..self.events.len() as u32).map(EventId)
    }

    pub fn event_name(&self, e: EventId) -> &str {
        &self.events[e.index()].name
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.variables[v.index()].0
    }

    pub fn event_by_name(&self, name: &str) -> Option<EventId> {
        self.events
            .iter()
            .position(|e| e.name == name)
            .map(|i| EventId(i as u32))
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| VarId(i as u32))
    }

    pub fn initially_enabled(&self) -> BTreeSet<EventId> {
        self.event_ids()
            .filter(|e| self.events[e.index()].initially_enabled)
            .collect()
    }

    pub fn initial_valuation(&self) -> Valuation {
        Valuation {
            vars: self.variables.iter().map(|(_, v)| *v).collect(),
            enabled: self.events.iter().map(|e| e.initially_enabled).collect(),
        }
    }

    /// Resolves a sequence of event names into ids.
    pub fn resolve_events<S: AsRef<str>>(&self, names: &[S]) -> Option<Vec<EventId>> {
        names
            .iter()
            .map(|n| self.event_by_name(n.as_ref()))
            .collect()
    }

    /// Renders a shared-access location for diagnostics.
    pub fn location_name(&self, loc: Location) -> String {
        match loc {
            Location::Var(v) => self.var_name(v).to_string(),
            Location::Shadow(e) => format!("shadow({})", self.event_name(e)),
        }
    }
}

/// A shared memory location: a declared variable, or the synthetic shadow
/// location that tracks one event's enabled flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Var(VarId),
    Shadow(EventId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Read,
    Write,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Access {
    pub op: Op,
    pub loc: Location,
}

impl Access {
    pub fn read(loc: Location) -> Self {
        Access { op: Op::Read, loc }
    }

    pub fn write(loc: Location) -> Self {
        Access { op: Op::Write, loc }
    }

    /// Two accesses conflict when they touch the same location and at least
    /// one of them writes it.
    pub fn conflicts(&self, other: &Access) -> bool {
        self.loc == other.loc && (self.op == Op::Write || other.op == Op::Write)
    }
}

pub type AccessSet = BTreeSet<Access>;

/// True iff some access of `a` conflicts with some access of `b`.
pub fn sets_conflict(a: &AccessSet, b: &AccessSet) -> bool {
    // Both sets are small; the quadratic scan beats building an index.
    a.iter().any(|x| b.iter().any(|y| x.conflicts(y)))
}

/// Accesses of `a` still unordered after passing an earlier access set `b`.
///
/// An access drops out once it meets a conflicting write. A write that only
/// meets reads of its location stays: it still races with reads before them.
pub fn residual(a: &AccessSet, b: &AccessSet) -> AccessSet {
    a.iter()
        .filter(|x| !b.iter().any(|y| y.op == Op::Write && x.conflicts(y)))
        .copied()
        .collect()
}

/// Complete program state: every shared variable and every enabled flag.
///
/// Both vectors are in declaration order, which makes the derived `Hash` and
/// `Eq` a canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation {
    pub vars: Vec<i64>,
    pub enabled: Vec<bool>,
}

impl Valuation {
    pub fn is_enabled(&self, e: EventId) -> bool {
        self.enabled[e.index()]
    }

    pub fn get(&self, v: VarId) -> i64 {
        self.vars[v.index()]
    }

    pub fn display<'a>(&'a self, prog: &'a Program) -> ValuationDisplay<'a> {
        ValuationDisplay { val: self, prog }
    }
}

pub struct ValuationDisplay<'a> {
    val: &'a Valuation,
    prog: &'a Program,
}

impl fmt::Display for ValuationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (name, _)) in self.prog.variables.iter().enumerate() {
            write!(f, "{}={},", name, self.val.vars[i])?;
        }
        f.write_str("enabled={")?;
        let mut first = true;
        for e in self.prog.event_ids() {
            if self.val.is_enabled(e) {
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                f.write_str(self.prog.event_name(e))?;
            }
        }
        f.write_str("}}")
    }
}
