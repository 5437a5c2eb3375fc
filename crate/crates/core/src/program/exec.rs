use thiserror::Error;

use super::{
    Access, AccessSet, BinOp, EventId, Expr, Location, Program, Stmt, Target, UnOp, Valuation,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("event `{0}` executed while disabled")]
    EventDisabled(String),
    #[error("integer overflow in event `{0}`")]
    Overflow(String),
    #[error("no event with index {0}")]
    UnknownEvent(u32),
}

/// Result of running one handler to completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub valuation: Valuation,
    pub accesses: AccessSet,
    /// Rendered text of every assertion that evaluated false, in execution order.
    pub failures: Vec<String>,
}

/// Events enabled in `val`, in declaration order.
pub fn enabled_events(val: &Valuation) -> Vec<EventId> {
    val.enabled
        .iter()
        .enumerate()
        .filter(|(_, on)| **on)
        .map(|(i, _)| EventId(i as u32))
        .collect()
}

/// Runs the handler of `event` atomically from `val`.
///
/// Every shared read and write is recorded. Enable and disable statements
/// read the target's shadow location and write it when the flag flips; the
/// executing event always reads its own shadow location.
pub fn execute_event(prog: &Program, val: &Valuation, event: EventId) -> Result<Outcome, ExecError> {
    let def = prog
        .events
        .get(event.index())
        .ok_or(ExecError::UnknownEvent(event.0))?;
    if !val.is_enabled(event) {
        return Err(ExecError::EventDisabled(def.name.clone()));
    }
    let mut machine = Machine {
        prog,
        event,
        val: val.clone(),
        regs: vec![None; def.registers.len()],
        accesses: AccessSet::new(),
        failures: Vec::new(),
    };
    machine
        .accesses
        .insert(Access::read(Location::Shadow(event)));
    machine.block(&def.body)?;
    Ok(Outcome {
        valuation: machine.val,
        accesses: machine.accesses,
        failures: machine.failures,
    })
}

struct Machine<'p> {
    prog: &'p Program,
    event: EventId,
    val: Valuation,
    regs: Vec<Option<i64>>,
    accesses: AccessSet,
    failures: Vec<String>,
}

impl Machine<'_> {
    fn overflow(&self) -> ExecError {
        ExecError::Overflow(self.prog.event_name(self.event).to_string())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), ExecError> {
        stmts.iter().try_for_each(|s| self.stmt(s))
    }

    fn stmt(&mut self, stmt: &Stmt) -> Result<(), ExecError> {
        match stmt {
            Stmt::Assign(target, expr) => {
                let v = self.eval(expr)?;
                match target {
                    Target::Shared(var) => {
                        self.accesses.insert(Access::write(Location::Var(*var)));
                        self.val.vars[var.index()] = v;
                    }
                    Target::Reg(r) => self.regs[r.0 as usize] = Some(v),
                }
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.eval(cond)? != 0 {
                    self.block(then_branch)?;
                } else {
                    self.block(else_branch)?;
                }
            }
            Stmt::Assert(cond) => {
                if self.eval(cond)? == 0 {
                    self.failures
                        .push(format!("assert({})", cond.display(self.prog, self.event)));
                }
            }
            Stmt::Enable(e) => self.set_flag(*e, true),
            Stmt::Disable(e) => self.set_flag(*e, false),
            Stmt::SelfDisable => self.set_flag(self.event, false),
        }
        Ok(())
    }

    fn set_flag(&mut self, e: EventId, on: bool) {
        let loc = Location::Shadow(e);
        self.accesses.insert(Access::read(loc));
        if self.val.enabled[e.index()] != on {
            self.accesses.insert(Access::write(loc));
            self.val.enabled[e.index()] = on;
        }
    }

    fn eval(&mut self, expr: &Expr) -> Result<i64, ExecError> {
        Ok(match expr {
            Expr::Lit(v) => *v,
            Expr::Shared(var) => {
                self.accesses.insert(Access::read(Location::Var(*var)));
                self.val.vars[var.index()]
            }
            Expr::Reg(r) => self.regs[r.0 as usize]
                .expect("validated programs write registers before reading them"),
            Expr::Unary(UnOp::Neg, inner) => {
                let v = self.eval(inner)?;
                v.checked_neg().ok_or_else(|| self.overflow())?
            }
            Expr::Unary(UnOp::Not, inner) => (self.eval(inner)? == 0) as i64,
            Expr::Binary(BinOp::And, l, r) => {
                (self.eval(l)? != 0 && self.eval(r)? != 0) as i64
            }
            Expr::Binary(BinOp::Or, l, r) => {
                (self.eval(l)? != 0 || self.eval(r)? != 0) as i64
            }
            Expr::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                match op {
                    BinOp::Add => a.checked_add(b).ok_or_else(|| self.overflow())?,
                    BinOp::Sub => a.checked_sub(b).ok_or_else(|| self.overflow())?,
                    BinOp::Mul => a.checked_mul(b).ok_or_else(|| self.overflow())?,
                    BinOp::Eq => (a == b) as i64,
                    BinOp::Ne => (a != b) as i64,
                    BinOp::Lt => (a < b) as i64,
                    BinOp::Le => (a <= b) as i64,
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
        })
    }
}
