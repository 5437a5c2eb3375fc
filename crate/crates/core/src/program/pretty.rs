//! Source rendering. `parse_program(&prog.to_string())` yields `prog` again.

use std::fmt::{self, Display, Formatter, Write};

use super::{EventId, Expr, Program, Stmt, Target, UnOp};

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    prog: &'a Program,
    event: EventId,
}

impl Expr {
    /// Compact rendering, e.g. `y==0`, resolving register names against `event`.
    pub fn display<'a>(&'a self, prog: &'a Program, event: EventId) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            prog,
            event,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(..) => 7,
            Expr::Lit(v) if *v < 0 => 7,
            _ => 8,
        }
    }
}

impl Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.prog, self.event)
    }
}

fn write_expr(f: &mut impl Write, e: &Expr, prog: &Program, ev: EventId) -> fmt::Result {
    match e {
        Expr::Lit(v) => write!(f, "{v}"),
        Expr::Shared(v) => f.write_str(prog.var_name(*v)),
        Expr::Reg(r) => f.write_str(&prog.events[ev.index()].registers[r.0 as usize]),
        Expr::Unary(op, inner) => {
            f.write_str(match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            })?;
            // `-(-1)` must not print as `--1`, and `-(3)` must not fold into a literal.
            let wrap = inner.precedence() < 8 || matches!(**inner, Expr::Lit(_));
            write_wrapped(f, inner, wrap, prog, ev)
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            write_wrapped(f, l, l.precedence() < p, prog, ev)?;
            f.write_str(op.symbol())?;
            write_wrapped(f, r, r.precedence() <= p || r.precedence() == 7, prog, ev)
        }
    }
}

fn write_wrapped(
    f: &mut impl Write,
    e: &Expr,
    wrap: bool,
    prog: &Program,
    ev: EventId,
) -> fmt::Result {
    if wrap {
        f.write_char('(')?;
        write_expr(f, e, prog, ev)?;
        f.write_char(')')
    } else {
        write_expr(f, e, prog, ev)
    }
}

fn write_block(
    f: &mut Formatter<'_>,
    stmts: &[Stmt],
    prog: &Program,
    ev: EventId,
    indent: usize,
) -> fmt::Result {
    for s in stmts {
        write_stmt(f, s, prog, ev, indent)?;
    }
    Ok(())
}

fn write_stmt(
    f: &mut Formatter<'_>,
    s: &Stmt,
    prog: &Program,
    ev: EventId,
    indent: usize,
) -> fmt::Result {
    let pad = "    ".repeat(indent);
    match s {
        Stmt::Assign(target, value) => {
            let name = match target {
                Target::Shared(v) => prog.var_name(*v),
                Target::Reg(r) => &prog.events[ev.index()].registers[r.0 as usize],
            };
            writeln!(f, "{pad}{name} = {};", value.display(prog, ev))
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            writeln!(f, "{pad}if ({}) {{", cond.display(prog, ev))?;
            write_block(f, then_branch, prog, ev, indent + 1)?;
            if else_branch.is_empty() {
                writeln!(f, "{pad}}}")
            } else {
                writeln!(f, "{pad}}} else {{")?;
                write_block(f, else_branch, prog, ev, indent + 1)?;
                writeln!(f, "{pad}}}")
            }
        }
        Stmt::Assert(cond) => writeln!(f, "{pad}assert({});", cond.display(prog, ev)),
        Stmt::Enable(e) => writeln!(f, "{pad}enable({});", prog.event_name(*e)),
        Stmt::Disable(e) => writeln!(f, "{pad}disable({});", prog.event_name(*e)),
        Stmt::SelfDisable => writeln!(f, "{pad}self_disable;"),
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for (name, value) in &self.variables {
            writeln!(f, "var {name} = {value}")?;
        }
        for (i, ev) in self.events.iter().enumerate() {
            let state = if ev.initially_enabled {
                "enabled"
            } else {
                "disabled"
            };
            writeln!(f, "event {} {state} {{", ev.name)?;
            write_block(f, &ev.body, self, EventId(i as u32), 1)?;
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}
