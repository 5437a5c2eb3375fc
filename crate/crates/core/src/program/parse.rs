use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use super::{BinOp, EventDef, EventId, Expr, Program, RegId, Stmt, Target, UnOp, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared name `{name}`")]
    Undeclared {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: duplicate declaration of `{name}`")]
    Duplicate {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: register `{name}` may be read before it is assigned")]
    UnassignedRegister {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: cannot assign to event `{name}`")]
    AssignToEvent {
        line: usize,
        col: usize,
        name: String,
    },
}

impl ParseError {
    /// The identifier a semantic error is about, if any.
    pub fn identifier(&self) -> Option<&str> {
        match self {
            ParseError::Syntax { .. } => None,
            ParseError::Undeclared { name, .. }
            | ParseError::Duplicate { name, .. }
            | ParseError::UnassignedRegister { name, .. }
            | ParseError::AssignToEvent { name, .. } => Some(name),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "var",
    "event",
    "enabled",
    "disabled",
    "if",
    "else",
    "assert",
    "enable",
    "disable",
    "self_disable",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    const SYMS: &[&str] = &[
        "==", "!=", "<=", "&&", "||", "=", "<", "+", "-", "*", "!", "(", ")", "{", "}", ";",
    ];
    let mut out = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos {
                line: lineno + 1,
                col: i + 1,
            };
            if c.is_whitespace() {
                i += 1;
            } else if c == '/' && chars.get(i + 1) == Some(&'/') {
                break;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value = text.parse::<i64>().map_err(|_| ParseError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    msg: format!("integer literal `{text}` out of range"),
                })?;
                out.push((Tok::Int(value), pos));
            } else {
                let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let sym = SYMS
                    .iter()
                    .find(|s| rest.starts_with(**s))
                    .ok_or_else(|| ParseError::Syntax {
                        line: pos.line,
                        col: pos.col,
                        msg: format!("unexpected character `{c}`"),
                    })?;
                i += sym.len();
                out.push((Tok::Sym(sym), pos));
            }
        }
    }
    let end = Pos {
        line: src.lines().count().max(1),
        col: src.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    out.push((Tok::Eof, end));
    Ok(out)
}

// Unresolved syntax tree, names still as written.

#[derive(Debug)]
struct Name {
    text: String,
    pos: Pos,
}

#[derive(Debug)]
enum RawExpr {
    Lit(i64),
    Name(Name),
    Unary(UnOp, Box<RawExpr>),
    Binary(BinOp, Box<RawExpr>, Box<RawExpr>),
}

#[derive(Debug)]
enum RawStmt {
    Assign(Name, RawExpr),
    If(RawExpr, Vec<RawStmt>, Vec<RawStmt>),
    Assert(RawExpr),
    Enable(Name),
    Disable(Name),
    SelfDisable,
}

struct RawEvent {
    name: Name,
    enabled: bool,
    body: Vec<RawStmt>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type RawProgram = (Vec<(Name, i64)>, Vec<RawEvent>);

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let pos = self.pos();
        Err(ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            msg: msg.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(text) if !KEYWORDS.contains(&text.as_str()) => {
                let pos = self.pos();
                self.bump();
                Ok(Name { text, pos })
            }
            _ => self.error(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let negative = if self.is_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => self.error(format!("expected integer, found {}", self.describe())),
        }
    }

    fn program(&mut self) -> Result<RawProgram, ParseError> {
        let mut vars = Vec::new();
        let mut events = Vec::new();
        loop {
            if matches!(self.peek(), Tok::Eof) {
                break;
            } else if self.is_kw("var") {
                self.bump();
                let name = self.ident()?;
                self.expect_sym("=")?;
                let value = self.int()?;
                if self.is_sym(";") {
                    self.bump();
                }
                vars.push((name, value));
            } else if self.is_kw("event") {
                self.bump();
                let name = self.ident()?;
                let enabled = if self.is_kw("enabled") {
                    self.bump();
                    true
                } else if self.is_kw("disabled") {
                    self.bump();
                    false
                } else {
                    return self.error(format!(
                        "expected `enabled` or `disabled`, found {}",
                        self.describe()
                    ));
                };
                let body = self.block()?;
                events.push(RawEvent {
                    name,
                    enabled,
                    body,
                });
            } else {
                return self.error(format!(
                    "expected `var` or `event`, found {}",
                    self.describe()
                ));
            }
        }
        Ok((vars, events))
    }

    fn block(&mut self) -> Result<Vec<RawStmt>, ParseError> {
        self.expect_sym("{")?;
        let mut stmts = Vec::new();
        while !self.is_sym("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.error("unterminated block, expected `}`");
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<RawStmt, ParseError> {
        if self.is_kw("if") {
            self.bump();
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            let then_branch = self.block()?;
            let else_branch = if self.is_kw("else") {
                self.bump();
                if self.is_kw("if") {
                    vec![self.stmt()?]
                } else {
                    self.block()?
                }
            } else {
                Vec::new()
            };
            Ok(RawStmt::If(cond, then_branch, else_branch))
        } else if self.is_kw("assert") {
            self.bump();
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            self.expect_sym(";")?;
            Ok(RawStmt::Assert(cond))
        } else if self.is_kw("enable") || self.is_kw("disable") {
            let enable = self.is_kw("enable");
            self.bump();
            self.expect_sym("(")?;
            let name = self.ident()?;
            self.expect_sym(")")?;
            self.expect_sym(";")?;
            Ok(if enable {
                RawStmt::Enable(name)
            } else {
                RawStmt::Disable(name)
            })
        } else if self.is_kw("self_disable") {
            self.bump();
            self.expect_sym(";")?;
            Ok(RawStmt::SelfDisable)
        } else {
            let target = self.ident()?;
            self.expect_sym("=")?;
            let value = self.expr()?;
            self.expect_sym(";")?;
            Ok(RawStmt::Assign(target, value))
        }
    }

    fn expr(&mut self) -> Result<RawExpr, ParseError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Sym("||") => Some(BinOp::Or),
            Tok::Sym("&&") => Some(BinOp::And),
            Tok::Sym("==") => Some(BinOp::Eq),
            Tok::Sym("!=") => Some(BinOp::Ne),
            Tok::Sym("<") => Some(BinOp::Lt),
            Tok::Sym("<=") => Some(BinOp::Le),
            Tok::Sym("+") => Some(BinOp::Add),
            Tok::Sym("-") => Some(BinOp::Sub),
            Tok::Sym("*") => Some(BinOp::Mul),
            _ => None,
        }
    }

    // Precedence climbing; every binary operator is left-associative.
    fn binary(&mut self, min_prec: u8) -> Result<RawExpr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = RawExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<RawExpr, ParseError> {
        if self.is_sym("!") {
            self.bump();
            Ok(RawExpr::Unary(UnOp::Not, Box::new(self.unary()?)))
        } else if self.is_sym("-") {
            self.bump();
            if let Tok::Int(v) = self.peek().clone() {
                self.bump();
                return Ok(RawExpr::Lit(-v));
            }
            Ok(RawExpr::Unary(UnOp::Neg, Box::new(self.unary()?)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<RawExpr, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(RawExpr::Lit(v))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(RawExpr::Name(self.ident()?)),
            _ => self.error(format!("expected expression, found {}", self.describe())),
        }
    }
}

struct Resolver<'a> {
    vars: &'a HashMap<String, VarId>,
    events: &'a HashMap<String, EventId>,
    registers: Vec<String>,
}

impl Resolver<'_> {
    fn register(&mut self, name: &str) -> RegId {
        match self.registers.iter().position(|r| r == name) {
            Some(i) => RegId(i as u32),
            None => {
                self.registers.push(name.to_string());
                RegId(self.registers.len() as u32 - 1)
            }
        }
    }

    fn expr(&mut self, e: &RawExpr, assigned: &BTreeSet<String>) -> Result<Expr, ParseError> {
        Ok(match e {
            RawExpr::Lit(v) => Expr::Lit(*v),
            RawExpr::Name(n) => {
                if let Some(v) = self.vars.get(&n.text) {
                    Expr::Shared(*v)
                } else if assigned.contains(&n.text) {
                    Expr::Reg(self.register(&n.text))
                } else if self.registers.contains(&n.text) {
                    return Err(ParseError::UnassignedRegister {
                        line: n.pos.line,
                        col: n.pos.col,
                        name: n.text.clone(),
                    });
                } else {
                    return Err(ParseError::Undeclared {
                        line: n.pos.line,
                        col: n.pos.col,
                        name: n.text.clone(),
                    });
                }
            }
            RawExpr::Unary(op, inner) => Expr::Unary(*op, Box::new(self.expr(inner, assigned)?)),
            RawExpr::Binary(op, l, r) => Expr::Binary(
                *op,
                Box::new(self.expr(l, assigned)?),
                Box::new(self.expr(r, assigned)?),
            ),
        })
    }

    fn event(&self, n: &Name) -> Result<EventId, ParseError> {
        self.events
            .get(&n.text)
            .copied()
            .ok_or_else(|| ParseError::Undeclared {
                line: n.pos.line,
                col: n.pos.col,
                name: n.text.clone(),
            })
    }

    /// Resolves a block; `assigned` holds the registers definitely written on
    /// every path so far and is updated in place.
    fn block(
        &mut self,
        stmts: &[RawStmt],
        assigned: &mut BTreeSet<String>,
    ) -> Result<Vec<Stmt>, ParseError> {
        stmts.iter().map(|s| self.stmt(s, assigned)).collect()
    }

    fn stmt(&mut self, s: &RawStmt, assigned: &mut BTreeSet<String>) -> Result<Stmt, ParseError> {
        Ok(match s {
            RawStmt::Assign(target, value) => {
                let value = self.expr(value, assigned)?;
                let target = if let Some(v) = self.vars.get(&target.text) {
                    Target::Shared(*v)
                } else if self.events.contains_key(&target.text) {
                    return Err(ParseError::AssignToEvent {
                        line: target.pos.line,
                        col: target.pos.col,
                        name: target.text.clone(),
                    });
                } else {
                    assigned.insert(target.text.clone());
                    Target::Reg(self.register(&target.text))
                };
                Stmt::Assign(target, value)
            }
            RawStmt::If(cond, then_raw, else_raw) => {
                let cond = self.expr(cond, assigned)?;
                let mut then_assigned = assigned.clone();
                let then_branch = self.block(then_raw, &mut then_assigned)?;
                let mut else_assigned = assigned.clone();
                let else_branch = self.block(else_raw, &mut else_assigned)?;
                *assigned = then_assigned
                    .intersection(&else_assigned)
                    .cloned()
                    .collect();
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            RawStmt::Assert(cond) => Stmt::Assert(self.expr(cond, assigned)?),
            RawStmt::Enable(n) => Stmt::Enable(self.event(n)?),
            RawStmt::Disable(n) => Stmt::Disable(self.event(n)?),
            RawStmt::SelfDisable => Stmt::SelfDisable,
        })
    }
}

/// Parses and validates program source text.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut parser = Parser {
        toks: lex(src)?,
        at: 0,
    };
    let (raw_vars, raw_events) = parser.program()?;

    let mut seen: HashSet<String> = HashSet::new();
    let mut duplicate = |n: &Name| -> Result<(), ParseError> {
        if seen.insert(n.text.clone()) {
            Ok(())
        } else {
            Err(ParseError::Duplicate {
                line: n.pos.line,
                col: n.pos.col,
                name: n.text.clone(),
            })
        }
    };
    for (n, _) in &raw_vars {
        duplicate(n)?;
    }
    for ev in &raw_events {
        duplicate(&ev.name)?;
    }

    let vars: HashMap<String, VarId> = raw_vars
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n.text.clone(), VarId(i as u32)))
        .collect();
    let events: HashMap<String, EventId> = raw_events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.name.text.clone(), EventId(i as u32)))
        .collect();

    let mut defs = Vec::with_capacity(raw_events.len());
    for ev in &raw_events {
        let mut resolver = Resolver {
            vars: &vars,
            events: &events,
            registers: Vec::new(),
        };
        // Registers assigned anywhere are collected first so that a read
        // before the first write reports `UnassignedRegister`, not `Undeclared`.
        collect_registers(&ev.body, &vars, &mut resolver.registers);
        let body = resolver.block(&ev.body, &mut BTreeSet::new())?;
        defs.push(EventDef {
            name: ev.name.text.clone(),
            initially_enabled: ev.enabled,
            registers: resolver.registers,
            body,
        });
    }

    Ok(Program {
        variables: raw_vars.into_iter().map(|(n, v)| (n.text, v)).collect(),
        events: defs,
    })
}

fn collect_registers(stmts: &[RawStmt], vars: &HashMap<String, VarId>, out: &mut Vec<String>) {
    for s in stmts {
        match s {
            RawStmt::Assign(t, _) => {
                if !vars.contains_key(&t.text) && !out.contains(&t.text) {
                    out.push(t.text.clone());
                }
            }
            RawStmt::If(_, a, b) => {
                collect_registers(a, vars, out);
                collect_registers(b, vars, out);
            }
            _ => {}
        }
    }
}
