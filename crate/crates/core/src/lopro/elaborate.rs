//! Elaboration: inline calls, allocate tapes, and compile rules into
//! high-level instructions with integer differentials.

use std::collections::HashMap;

use super::ast::*;
use crate::build::{input_leaf, Class, Explore, Step, Target as Next};
use crate::error::{Diagnostic, Error, Result, Span};
use crate::machine::{
    index_cells, Configuration, Flavor, IndexSide, Move, StateId, Symbol, TapeRole, TapeSpec,
};

/// Knobs for [`elaborate`].
#[derive(Clone, Debug)]
pub struct ElabOptions {
    /// Overrides for `machine(name = default)` parameters.
    pub params: Vec<(String, i64)>,
    /// Reuse the work tapes of finished call instantiations.
    pub recycle: bool,
}

impl Default for ElabOptions {
    fn default() -> Self {
        ElabOptions {
            params: Vec::new(),
            recycle: true,
        }
    }
}

impl ElabOptions {
    pub fn with_param(mut self, name: &str, value: i64) -> Self {
        self.params.push((name.to_string(), value));
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Tape(usize),
    Const(i64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum HlCond {
    Const(bool),
    IsEnd(usize),
    Scan {
        tape: usize,
        bit: bool,
        eq: bool,
    },
    Cmp {
        lhs: Operand,
        op: CmpOp,
        rhs: Operand,
    },
    Not(Box<HlCond>),
    And(Box<HlCond>, Box<HlCond>),
    Or(Box<HlCond>, Box<HlCond>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlOp {
    Move {
        tape: usize,
        mv: Move,
    },
    Write {
        tape: usize,
        bit: bool,
    },
    /// Overwrite a tape with a constant value.
    Assign {
        tape: usize,
        value: u64,
    },
    /// Overwrite `dst` with the value of `src` (equal widths).
    Copy {
        dst: usize,
        src: usize,
    },
    /// Zero the tape and park its head on the endmark (scope entry/exit).
    Clear {
        tape: usize,
    },
    /// Park the head on the endmark (scope entry).
    Home {
        tape: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlTarget {
    State(StateId),
    Const(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HlBranch {
    pub target: HlTarget,
    /// After-statements followed by scope effects, applied in order.
    pub ops: Vec<HlOp>,
    pub dw: i64,
    pub db: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HlRule {
    pub from: StateId,
    pub when: HlCond,
    pub combinator: Combinator,
    pub branches: Vec<HlBranch>,
    pub span: Span,
}

/// An elaborated machine: tapes, states, and ordered high-level rules.
#[derive(Clone, Debug)]
pub struct HlMachine {
    pub tapes: Vec<TapeSpec>,
    /// Recycled tapes list every local they served, joined by `|`.
    pub tape_names: Vec<String>,
    /// End value of the first declaration behind each tape.
    pub tape_ends: Vec<u64>,
    /// Indexed by state id; 0 is the output state, 1 the input state.
    pub state_names: Vec<String>,
    pub rules: Vec<HlRule>,
    by_state: Vec<Vec<usize>>,
}

impl HlMachine {
    fn new(
        tapes: Vec<TapeSpec>,
        tape_names: Vec<String>,
        tape_ends: Vec<u64>,
        state_names: Vec<String>,
        rules: Vec<HlRule>,
    ) -> HlMachine {
        let mut by_state = vec![Vec::new(); state_names.len()];
        for (i, r) in rules.iter().enumerate() {
            by_state[r.from.index()].push(i);
        }
        HlMachine {
            tapes,
            tape_names,
            tape_ends,
            state_names,
            rules,
            by_state,
        }
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    /// Rule indices for `state`, in first-match order.
    pub fn rules_for(&self, state: StateId) -> &[usize] {
        &self.by_state[state.index()]
    }

    pub fn input_dims(&self) -> Vec<usize> {
        self.dims(IndexSide::Input)
    }

    pub fn output_dims(&self) -> Vec<usize> {
        self.dims(IndexSide::Output)
    }

    fn dims(&self, side: IndexSide) -> Vec<usize> {
        self.tapes
            .iter()
            .filter(|t| t.role.addresses(side))
            .map(|t| t.dim as usize)
            .collect()
    }

    /// The rule that fires in `config`, if any.
    pub fn first_match(&self, config: &Configuration) -> Option<usize> {
        if config.state == StateId::INPUT {
            return None;
        }
        self.rules_for(config.state)
            .iter()
            .copied()
            .find(|&i| eval_cond(&self.rules[i].when, config))
    }
}

pub fn eval_cond(cond: &HlCond, config: &Configuration) -> bool {
    match cond {
        HlCond::Const(b) => *b,
        HlCond::IsEnd(t) => config.tapes[*t].scanned() == Symbol::End,
        HlCond::Scan { tape, bit, eq } => {
            (config.tapes[*tape].scanned() == Symbol::from_bit(*bit)) == *eq
        }
        HlCond::Cmp { lhs, op, rhs } => {
            let val = |o: &Operand| match *o {
                Operand::Tape(t) => config.tapes[t].value() as i64,
                Operand::Const(c) => c,
            };
            op.holds(val(lhs).cmp(&val(rhs)))
        }
        HlCond::Not(c) => !eval_cond(c, config),
        HlCond::And(a, b) => eval_cond(a, config) && eval_cond(b, config),
        HlCond::Or(a, b) => eval_cond(a, config) || eval_cond(b, config),
    }
}

pub fn apply_op(config: &mut Configuration, op: HlOp) {
    match op {
        HlOp::Move { tape, mv } => config.tapes[tape].step(mv),
        HlOp::Write { tape, bit } => config.tapes[tape].write(Symbol::from_bit(bit)),
        HlOp::Assign { tape, value } => config.tapes[tape].set_value(value),
        HlOp::Copy { dst, src } => {
            let v = config.tapes[src].value();
            config.tapes[dst].set_value(v);
        }
        HlOp::Clear { tape } => config.tapes[tape].clear(),
        HlOp::Home { tape } => config.tapes[tape].head = 0,
    }
}

/// Where `branch` takes `config`.
pub(crate) fn apply_branch(config: &Configuration, branch: &HlBranch) -> Next {
    match branch.target {
        HlTarget::Const(b) => Next::Constant(b),
        HlTarget::State(s) => {
            let mut next = config.clone();
            for &op in &branch.ops {
                apply_op(&mut next, op);
            }
            next.state = s;
            Next::Config(next)
        }
    }
}

impl Explore for HlMachine {
    fn flavor(&self) -> Flavor {
        Flavor::Ptm
    }

    fn tapes(&self) -> &[TapeSpec] {
        &self.tapes
    }

    fn classify(&self, config: &Configuration) -> Class {
        if config.state == StateId::INPUT {
            Class::Leaf(input_leaf(&self.tapes, config, None))
        } else {
            Class::Interior(None)
        }
    }

    fn successors(&self, config: &Configuration, out: &mut Vec<Step>) {
        if let Some(i) = self.first_match(config) {
            for b in &self.rules[i].branches {
                out.push(Step {
                    target: apply_branch(config, b),
                    dw: b.dw,
                    db: b.db,
                    origin: i,
                });
            }
        }
    }
}

/// Elaborates a checked program.
pub fn elaborate(program: &Program, opts: &ElabOptions) -> Result<HlMachine> {
    let mut e = Elab {
        program,
        recycle: opts.recycle,
        tapes: Vec::new(),
        tape_names: Vec::new(),
        tape_ends: Vec::new(),
        state_names: vec!["output".into(), "input".into()],
        state_inst: vec![0, 0],
        insts: Vec::new(),
        pool: Vec::new(),
        rules: Vec::new(),
        call_stack: Vec::new(),
    };
    e.main(&program.machine, &opts.params)
        .map_err(|d| Error::Lopro(vec![d]))?;
    Ok(HlMachine::new(
        e.tapes,
        e.tape_names,
        e.tape_ends,
        e.state_names,
        e.rules,
    ))
}

type EResult<T> = std::result::Result<T, Diagnostic>;

#[derive(Clone, Copy, Debug)]
enum Binding {
    /// Physical tape and the end it was declared with.
    Tape(usize, u64),
    State(HlTarget),
    Head(usize),
    Int(i64),
}

struct Inst {
    parent: Option<usize>,
    locals: Vec<usize>,
    /// Tapes whose head was taken in this scope.
    heads: Vec<usize>,
}

struct Elab<'p> {
    program: &'p Program,
    recycle: bool,
    tapes: Vec<TapeSpec>,
    tape_names: Vec<String>,
    tape_ends: Vec<u64>,
    state_names: Vec<String>,
    state_inst: Vec<usize>,
    insts: Vec<Inst>,
    pool: Vec<usize>,
    rules: Vec<HlRule>,
    call_stack: Vec<String>,
}

type Env = HashMap<String, Binding>;

impl<'p> Elab<'p> {
    fn main(&mut self, m: &'p MachineBlock, overrides: &[(String, i64)]) -> EResult<()> {
        let mut env = Env::new();
        for (name, default) in &m.params {
            let v = overrides
                .iter()
                .rev()
                .find(|(n, _)| n == &name.name)
                .map_or(*default, |&(_, v)| v);
            env.insert(name.name.clone(), Binding::Int(v));
        }
        if let Some((n, _)) = overrides
            .iter()
            .find(|(n, _)| !m.params.iter().any(|(p, _)| &p.name == n))
        {
            return Err(Diagnostic::new(
                m.span,
                format!("machine has no parameter `{n}`"),
            ));
        }

        // Index roles come from the input/output state declarations.
        let mut roles: HashMap<&str, TapeRole> = HashMap::new();
        for item in &m.body {
            if let Item::States {
                kind, index_tapes, ..
            } = item
            {
                for t in index_tapes {
                    let role = roles.entry(&t.name).or_insert(TapeRole::Work);
                    *role = match (*role, kind) {
                        (TapeRole::Work, StateKind::Input) => TapeRole::InputIndex,
                        (TapeRole::Work, StateKind::Output) => TapeRole::OutputIndex,
                        (TapeRole::OutputIndex, StateKind::Input)
                        | (TapeRole::InputIndex, StateKind::Output) => TapeRole::IoIndex,
                        _ => {
                            return Err(Diagnostic::new(
                                t.span,
                                format!("tape `{}` listed twice as an index tape", t.name),
                            ))
                        }
                    };
                }
            }
        }

        self.insts.push(Inst {
            parent: None,
            locals: Vec::new(),
            heads: Vec::new(),
        });
        for item in &m.body {
            match item {
                Item::Tape { name, end } => {
                    let role = roles
                        .get(name.name.as_str())
                        .copied()
                        .unwrap_or(TapeRole::Work);
                    let end = self.tape_end(&env, end)?;
                    let id = self.new_tape(&name.name, end, role, name.span)?;
                    env.insert(name.name.clone(), Binding::Tape(id, end));
                }
                Item::States {
                    kind,
                    names,
                    index_tapes,
                } => {
                    for n in names {
                        let id = match kind {
                            StateKind::Output => {
                                self.state_names[0] = n.name.clone();
                                StateId::OUTPUT
                            }
                            StateKind::Input => {
                                self.state_names[1] = n.name.clone();
                                StateId::INPUT
                            }
                            StateKind::Plain => self.new_state(n.name.clone(), 0),
                        };
                        env.insert(n.name.clone(), Binding::State(HlTarget::State(id)));
                    }
                    self.check_index_order(&env, index_tapes)?;
                }
                Item::Head { name, tape } => self.declare_head(&mut env, 0, name, tape)?,
                Item::Rule(_) => {}
            }
        }
        self.rules_of(&m.body, &env, 0)
    }

    fn check_index_order(&self, env: &Env, index_tapes: &[Ident]) -> EResult<()> {
        let mut last = None;
        for t in index_tapes {
            let Some(&Binding::Tape(id, _)) = env.get(&t.name) else {
                return Err(Diagnostic::new(
                    t.span,
                    format!("index tape `{}` must be declared before the state", t.name),
                ));
            };
            if last.is_some_and(|l| id <= l) {
                return Err(Diagnostic::new(
                    t.span,
                    "index tapes must be listed in declaration order",
                ));
            }
            last = Some(id);
        }
        Ok(())
    }

    fn new_state(&mut self, name: String, inst: usize) -> StateId {
        self.state_names.push(name);
        self.state_inst.push(inst);
        StateId((self.state_names.len() - 1) as u32)
    }

    fn new_tape(&mut self, name: &str, end: u64, role: TapeRole, span: Span) -> EResult<usize> {
        let spec = if role == TapeRole::Work {
            TapeSpec::work(index_cells(end))
        } else {
            TapeSpec::index(role, end)
        }
        .map_err(|e| Diagnostic::new(span, format!("tape `{name}`: {e}")))?;
        self.tapes.push(spec);
        self.tape_names.push(name.to_string());
        self.tape_ends.push(end);
        Ok(self.tapes.len() - 1)
    }

    fn tape_end(&self, env: &Env, end: &Expr) -> EResult<u64> {
        match self.expr(env, end)? {
            Operand::Const(v) if v >= 1 => Ok(v as u64),
            Operand::Const(v) => Err(Diagnostic::new(
                end.span(),
                format!("tape end must be at least 1, got {v}"),
            )),
            Operand::Tape(_) => Err(Diagnostic::new(
                end.span(),
                "a tape end must be a constant expression",
            )),
        }
    }

    fn declare_head(
        &mut self,
        env: &mut Env,
        inst: usize,
        name: &Ident,
        tape: &Ident,
    ) -> EResult<()> {
        let Some(&Binding::Tape(t, _)) = env.get(&tape.name) else {
            return Err(Diagnostic::new(
                tape.span,
                format!("tape `{}` must be declared before its head", tape.name),
            ));
        };
        if !self.insts[inst].heads.contains(&t) {
            self.insts[inst].heads.push(t);
        }
        env.insert(name.name.clone(), Binding::Head(t));
        Ok(())
    }

    /// Instantiates `f` with bound arguments, returning its output target.
    fn call(
        &mut self,
        caller: usize,
        caller_env: &Env,
        name: &Ident,
        args: &[Arg],
    ) -> EResult<HlTarget> {
        let f = self.program.function(&name.name).ok_or_else(|| {
            Diagnostic::new(name.span, format!("unknown function `{}`", name.name))
        })?;
        if self.call_stack.contains(&name.name) {
            return Err(Diagnostic::new(
                name.span,
                format!(
                    "recursive call to `{}` ({} -> {}); functions cannot recurse",
                    name.name,
                    self.call_stack.join(" -> "),
                    name.name
                ),
            ));
        }
        let inst = self.insts.len();
        self.insts.push(Inst {
            parent: Some(caller),
            locals: Vec::new(),
            heads: Vec::new(),
        });
        let mut env = Env::new();
        for (p, a) in f.params.iter().zip(args) {
            let bound = match a {
                Arg::Const(b, _) => Binding::State(HlTarget::Const(*b)),
                Arg::Name(id) => *caller_env.get(&id.name).ok_or_else(|| {
                    Diagnostic::new(id.span, format!("unknown name `{}`", id.name))
                })?,
            };
            if let (
                Param::Tape {
                    name: pn,
                    end: Some(end),
                },
                Binding::Tape(t, have),
            ) = (p, bound)
            {
                let want = self.tape_end(&env, end)?;
                if want != have {
                    return Err(Diagnostic::new(
                        name.span,
                        format!(
                            "tape end mismatch: parameter `{}` of `{}` expects end {want}, argument `{}` has end {}",
                            pn.name, name.name, self.tape_names[t], have
                        ),
                    ));
                }
            }
            env.insert(p.name().name.clone(), bound);
        }
        let prefix = format!("{}#{}", name.name, inst);
        for item in &f.body {
            match item {
                Item::Tape { name: tn, end } => {
                    let end = self.tape_end(&env, end)?;
                    let id = self.alloc_local(&format!("{prefix}.{}", tn.name), end, tn.span)?;
                    self.insts[inst].locals.push(id);
                    env.insert(tn.name.clone(), Binding::Tape(id, end));
                }
                Item::States { names, .. } => {
                    for n in names {
                        let id = self.new_state(format!("{prefix}.{}", n.name), inst);
                        env.insert(n.name.clone(), Binding::State(HlTarget::State(id)));
                    }
                }
                Item::Head { name: hn, tape } => self.declare_head(&mut env, inst, hn, tape)?,
                Item::Rule(_) => {}
            }
        }
        self.call_stack.push(name.name.clone());
        self.rules_of(&f.body, &env, inst)?;
        self.call_stack.pop();
        if self.recycle {
            let locals = self.insts[inst].locals.clone();
            self.pool.extend(locals);
        }
        match env.get(&f.ret.name) {
            Some(Binding::State(t)) => Ok(*t),
            _ => Err(Diagnostic::new(
                f.ret.span,
                format!("`{}` is not a state", f.ret.name),
            )),
        }
    }

    fn alloc_local(&mut self, name: &str, end: u64, span: Span) -> EResult<usize> {
        let cells = index_cells(end);
        if self.recycle {
            if let Some(pos) = self.pool.iter().position(|&t| self.tapes[t].cells == cells) {
                let t = self.pool.remove(pos);
                self.tape_names[t] = format!("{}|{name}", self.tape_names[t]);
                return Ok(t);
            }
        }
        self.new_tape(name, end, TapeRole::Work, span)
    }

    fn rules_of(&mut self, items: &'p [Item], env: &Env, inst: usize) -> EResult<()> {
        for item in items {
            let Item::Rule(rule) = item else { continue };
            let from = match env.get(&rule.from.name) {
                Some(Binding::State(HlTarget::State(s))) => *s,
                _ => {
                    return Err(Diagnostic::new(
                        rule.from.span,
                        format!("`{}` is not a state of this scope", rule.from.name),
                    ))
                }
            };
            let when = match &rule.when {
                Some(c) => self.cond(env, c)?,
                None => HlCond::Const(true),
            };
            let mut branches = Vec::new();
            for (i, b) in rule.branches.iter().enumerate() {
                let target = match &b.target {
                    Target::State(s) => match env.get(&s.name) {
                        Some(Binding::State(t)) => *t,
                        _ => {
                            return Err(Diagnostic::new(
                                s.span,
                                format!("`{}` is not a state", s.name),
                            ))
                        }
                    },
                    Target::Const(v, _) => HlTarget::Const(*v),
                    Target::Call { name, args } => self.call(inst, env, name, args)?,
                };
                let mut ops = Vec::new();
                for s in &b.stmts {
                    self.stmt(env, s, &mut ops)?;
                }
                if let HlTarget::State(s) = target {
                    self.scope_effects(inst, self.state_inst[s.index()], &mut ops);
                }
                let (dw, db) = match (rule.combinator, i) {
                    (Combinator::And, i) if i > 0 => (2, -2),
                    _ => (2, 0),
                };
                branches.push(HlBranch {
                    target,
                    ops,
                    dw,
                    db,
                });
            }
            self.rules.push(HlRule {
                from,
                when,
                combinator: rule.combinator,
                branches,
                span: rule.span,
            });
        }
        Ok(())
    }

    fn path(&self, mut inst: usize) -> Vec<usize> {
        let mut p = vec![inst];
        while let Some(parent) = self.insts[inst].parent {
            p.push(parent);
            inst = parent;
        }
        p.reverse();
        p
    }

    /// Exiting a scope clears its locals; entering one clears its locals and
    /// parks the heads it uses.
    fn scope_effects(&self, src: usize, dst: usize, ops: &mut Vec<HlOp>) {
        if src == dst {
            return;
        }
        let (ps, pd) = (self.path(src), self.path(dst));
        let common = ps.iter().zip(&pd).take_while(|(a, b)| a == b).count();
        for &i in ps[common..].iter().rev() {
            for &t in &self.insts[i].locals {
                ops.push(HlOp::Clear { tape: t });
            }
        }
        for &i in &pd[common..] {
            for &t in &self.insts[i].locals {
                ops.push(HlOp::Clear { tape: t });
            }
            for &t in &self.insts[i].heads {
                if !self.insts[i].locals.contains(&t) {
                    ops.push(HlOp::Home { tape: t });
                }
            }
        }
    }

    fn head(&self, env: &Env, id: &Ident) -> EResult<usize> {
        match env.get(&id.name) {
            Some(Binding::Head(t)) => Ok(*t),
            _ => Err(Diagnostic::new(
                id.span,
                format!("`{}` is not a head", id.name),
            )),
        }
    }

    fn stmt(&self, env: &Env, s: &Stmt, ops: &mut Vec<HlOp>) -> EResult<()> {
        let mv = |d: Dir| match d {
            Dir::Left => Move::Left,
            Dir::Right => Move::Right,
        };
        match s {
            Stmt::Move { head, dir } => ops.push(HlOp::Move {
                tape: self.head(env, head)?,
                mv: mv(*dir),
            }),
            Stmt::Write { head, bit, then } => {
                let tape = self.head(env, head)?;
                ops.push(HlOp::Write { tape, bit: *bit });
                if let Some(d) = then {
                    ops.push(HlOp::Move { tape, mv: mv(*d) });
                }
            }
            Stmt::Assign { tape, value } => {
                let Some(&Binding::Tape(dst, _)) = env.get(&tape.name) else {
                    return Err(Diagnostic::new(
                        tape.span,
                        format!("`{}` is not a tape", tape.name),
                    ));
                };
                match self.expr(env, value)? {
                    Operand::Tape(src) => {
                        if self.tapes[src].cells != self.tapes[dst].cells {
                            return Err(Diagnostic::new(
                                tape.span,
                                format!(
                                    "tape end mismatch: cannot assign `{}` (end {}) to `{}` (end {})",
                                    self.tape_names[src],
                                    self.tape_ends[src],
                                    self.tape_names[dst],
                                    self.tape_ends[dst]
                                ),
                            ));
                        }
                        ops.push(HlOp::Copy { dst, src });
                    }
                    Operand::Const(v) => {
                        let cells = self.tapes[dst].cells;
                        if v < 0 || (v as u64) >> cells != 0 {
                            return Err(Diagnostic::new(
                                value.span(),
                                format!(
                                    "value {v} does not fit in the {cells} cells of `{}`",
                                    tape.name
                                ),
                            ));
                        }
                        ops.push(HlOp::Assign {
                            tape: dst,
                            value: v as u64,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn cond(&self, env: &Env, c: &Cond) -> EResult<HlCond> {
        Ok(match c {
            Cond::Const(b) => HlCond::Const(*b),
            Cond::IsEnd(h) => HlCond::IsEnd(self.head(env, h)?),
            Cond::Scan { head, bit, eq } => HlCond::Scan {
                tape: self.head(env, head)?,
                bit: *bit,
                eq: *eq,
            },
            Cond::Cmp { lhs, op, rhs, .. } => {
                let (l, r) = (self.expr(env, lhs)?, self.expr(env, rhs)?);
                match (l, r) {
                    (Operand::Const(a), Operand::Const(b)) => HlCond::Const(op.holds(a.cmp(&b))),
                    _ => HlCond::Cmp {
                        lhs: l,
                        op: *op,
                        rhs: r,
                    },
                }
            }
            Cond::Not(c) => HlCond::Not(Box::new(self.cond(env, c)?)),
            Cond::And(a, b) => {
                HlCond::And(Box::new(self.cond(env, a)?), Box::new(self.cond(env, b)?))
            }
            Cond::Or(a, b) => {
                HlCond::Or(Box::new(self.cond(env, a)?), Box::new(self.cond(env, b)?))
            }
        })
    }

    fn expr(&self, env: &Env, e: &Expr) -> EResult<Operand> {
        match e {
            Expr::Int(v, _) => Ok(Operand::Const(*v)),
            Expr::Name(id) => match env.get(&id.name) {
                Some(Binding::Tape(t, _)) => Ok(Operand::Tape(*t)),
                Some(Binding::Int(v)) => Ok(Operand::Const(*v)),
                _ => Err(Diagnostic::new(
                    id.span,
                    format!("`{}` is not a tape or integer here", id.name),
                )),
            },
            Expr::End(id) => match env.get(&id.name) {
                Some(Binding::Tape(_, end)) => Ok(Operand::Const(*end as i64)),
                _ => Err(Diagnostic::new(
                    id.span,
                    format!("`{}` is not a tape declared so far", id.name),
                )),
            },
            Expr::Bin(op, a, b) => {
                let (x, y) =
                    match (self.expr(env, a)?, self.expr(env, b)?) {
                        (Operand::Const(x), Operand::Const(y)) => (x, y),
                        _ => return Err(Diagnostic::new(
                            e.span(),
                            "arithmetic on tape values is not supported; compare the tape directly",
                        )),
                    };
                let v = match op {
                    BinOp::Add => x.checked_add(y),
                    BinOp::Sub => x.checked_sub(y),
                    BinOp::Mul => x.checked_mul(y),
                    BinOp::Div => x.checked_div(y),
                };
                v.map(Operand::Const).ok_or_else(|| {
                    Diagnostic::new(e.span(), "integer overflow or division by zero")
                })
            }
        }
    }
}
