//! Syntax tree for Lopro sources.

use crate::error::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub functions: Vec<Function>,
    pub machine: MachineBlock,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function {
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Vec<Item>,
    pub ret: Ident,
}

impl Function {
    pub fn state_count(&self) -> usize {
        self.body
            .iter()
            .map(|item| match item {
                Item::States { names, .. } => names.len(),
                _ => 0,
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Param {
    /// `tape name` or `tape name[end]` (the argument's end must match).
    Tape {
        name: Ident,
        end: Option<Expr>,
    },
    State {
        name: Ident,
    },
}

impl Param {
    pub fn name(&self) -> &Ident {
        match self {
            Param::Tape { name, .. } | Param::State { name } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MachineBlock {
    /// `machine(n = 6)`: overridable integer parameters.
    pub params: Vec<(Ident, i64)>,
    pub body: Vec<Item>,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Plain,
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Tape {
        name: Ident,
        end: Expr,
    },
    States {
        kind: StateKind,
        names: Vec<Ident>,
        /// Index tapes for input/output states.
        index_tapes: Vec<Ident>,
    },
    Head {
        name: Ident,
        tape: Ident,
    },
    Rule(Rule),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub from: Ident,
    pub when: Option<Cond>,
    pub combinator: Combinator,
    pub branches: Vec<Branch>,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combinator {
    Single,
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub target: Target,
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    State(Ident),
    Const(bool, Span),
    Call { name: Ident, args: Vec<Arg> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Name(Ident),
    Const(bool, Span),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cond {
    Const(bool),
    IsEnd(Ident),
    /// `*head == bit` (`eq`) or `*head != bit`.
    Scan {
        head: Ident,
        bit: bool,
        eq: bool,
    },
    Cmp {
        lhs: Expr,
        op: CmpOp,
        rhs: Expr,
        span: Span,
    },
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

/// Integer expressions. A bare name may denote a tape (its current value) or
/// a machine parameter; the elaborator decides.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64, Span),
    Name(Ident),
    End(Ident),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Int(_, s) => *s,
            Expr::Name(i) | Expr::End(i) => i.span,
            Expr::Bin(_, l, _) => l.span(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    /// `++h`, `h++`, `--h`, `h--`
    Move { head: Ident, dir: Dir },
    /// `*h = b`, optionally followed by a move (`*h++ = b`).
    Write {
        head: Ident,
        bit: bool,
        then: Option<Dir>,
    },
    /// `t = expr` where expr is a constant or another tape.
    Assign { tape: Ident, value: Expr },
}
