//! Lowering of elaborated machines to raw PTM genes.
//!
//! Every high-level state keeps its id. Multi-step actions become chains of
//! fresh states joined by pass-through hops, scope effects become head loops,
//! and `tape <op> constant` tests become a scan from the most significant cell
//! that returns the head to the endmark before the rule group is decided.

use std::collections::{HashMap, HashSet, VecDeque};

use super::ast::CmpOp;
use super::elaborate::{apply_branch, HlCond, HlMachine, HlOp, HlTarget, Operand};
use crate::build::Target;
use crate::error::{Error, Result};
use crate::machine::{
    output_config_for, row_major_coords, Instruction, MachineHeader, MachineSpec, Move, StateId,
    Symbol,
};

/// Reachable-configuration budget for checking head positions before scans.
pub const EXPLORE_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug)]
pub struct Lowered {
    pub machine: MachineSpec,
    /// One name per lowered state, for comments in the machine file.
    pub state_names: Vec<String>,
}

/// Splits an integer differential into `max(|dw|, |db|)` genes of ±1.
pub fn expand_differential(dw: i64, db: i64) -> Option<Vec<(i8, i8)>> {
    let g = dw.abs().max(db.abs());
    if (g - dw).rem_euclid(2) != 0 || (g - db).rem_euclid(2) != 0 {
        return None;
    }
    let plus_w = (g + dw) / 2;
    let plus_b = (g + db) / 2;
    Some(
        (0..g)
            .map(|i| {
                (
                    if i < plus_w { 1 } else { -1 },
                    if i < plus_b { 1 } else { -1 },
                )
            })
            .collect(),
    )
}

/// Conditions with comparisons replaced by outcome slots.
#[derive(Clone, Debug)]
enum LCond {
    Const(bool),
    IsEnd(usize),
    Scan { tape: usize, bit: bool, eq: bool },
    Outcome(usize),
    Not(Box<LCond>),
    And(Box<LCond>, Box<LCond>),
    Or(Box<LCond>, Box<LCond>),
}

impl LCond {
    fn eval(&self, tuple: &[Symbol], outcomes: &[bool]) -> bool {
        match self {
            LCond::Const(b) => *b,
            LCond::IsEnd(t) => tuple[*t] == Symbol::End,
            LCond::Scan { tape, bit, eq } => (tuple[*tape] == Symbol::from_bit(*bit)) == *eq,
            LCond::Outcome(i) => outcomes[*i],
            LCond::Not(c) => !c.eval(tuple, outcomes),
            LCond::And(a, b) => a.eval(tuple, outcomes) && b.eval(tuple, outcomes),
            LCond::Or(a, b) => a.eval(tuple, outcomes) || b.eval(tuple, outcomes),
        }
    }
}

/// `tape <op> constant`, with `constant < 2^cells`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Comparison {
    tape: usize,
    op: CmpOp,
    value: u64,
}

enum Phase {
    Step(Vec<(Option<bool>, Move)>),
    Seek(usize),
    Zero(usize),
}

struct Lower<'h> {
    hl: &'h HlMachine,
    tuples: Vec<Vec<Symbol>>,
    genes: Vec<Instruction>,
    names: Vec<String>,
    sink: Option<StateId>,
    truth: Option<StateId>,
    chains: HashMap<(u32, usize, usize), StateId>,
    homed: Option<Vec<Vec<bool>>>,
}

/// Lowers `hl`, or names the first rule outside the lowerable subset.
pub fn lower(hl: &HlMachine) -> Result<Lowered> {
    let k = hl.tapes.len();
    let mut tuples: Vec<Vec<Symbol>> = vec![Vec::new()];
    for _ in 0..k {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                Symbol::ALL.iter().map(move |&s| {
                    let mut t = t.clone();
                    t.push(s);
                    t
                })
            })
            .collect();
    }
    let mut l = Lower {
        hl,
        tuples,
        genes: Vec::new(),
        names: hl.state_names.clone(),
        sink: None,
        truth: None,
        chains: HashMap::new(),
        homed: None,
    };
    for s in 0..hl.num_states() {
        let state = StateId(s as u32);
        if state == StateId::INPUT || hl.rules_for(state).is_empty() {
            continue;
        }
        l.state(state)?;
    }
    let header = MachineHeader::ptm(l.names.len() as u32, hl.tapes.clone())?;
    let machine = MachineSpec::new(header, l.genes)?;
    Ok(Lowered {
        machine,
        state_names: l.names,
    })
}

impl Lower<'_> {
    fn fresh(&mut self, name: String) -> StateId {
        self.names.push(name);
        StateId((self.names.len() - 1) as u32)
    }

    fn error(&self, rule: usize, construct: impl Into<String>) -> Error {
        let r = &self.hl.rules[rule];
        Error::Lowering {
            state: self.hl.state_names[r.from.index()].clone(),
            span: r.span,
            construct: construct.into(),
        }
    }

    fn state(&mut self, state: StateId) -> Result<()> {
        let group = self.hl.rules_for(state).to_vec();
        let mut cmps = Vec::new();
        let mut conds = Vec::new();
        for &r in &group {
            let c = self.normalize(r, &self.hl.rules[r].when, &mut cmps)?;
            conds.push(c);
        }
        for (i, c) in cmps.iter().enumerate() {
            if !self.head_homed(state, c.tape)? {
                let pos = conds.iter().position(|c| mentions(c, i)).unwrap_or(0);
                let r = group[pos];
                return Err(self.error(
                    r,
                    format!(
                        "comparison on tape `{}` needs its head on the endmark, which is not guaranteed here",
                        self.hl.tape_names[c.tape]
                    ),
                ));
            }
        }
        self.dispatch(state, &group, &conds, &cmps, Vec::new())
    }

    fn normalize(&self, rule: usize, c: &HlCond, cmps: &mut Vec<Comparison>) -> Result<LCond> {
        Ok(match c {
            HlCond::Const(b) => LCond::Const(*b),
            HlCond::IsEnd(t) => LCond::IsEnd(*t),
            HlCond::Scan { tape, bit, eq } => LCond::Scan {
                tape: *tape,
                bit: *bit,
                eq: *eq,
            },
            HlCond::Cmp { lhs, op, rhs } => {
                let (tape, op, value) = match (*lhs, *rhs) {
                    (Operand::Tape(t), Operand::Const(v)) => (t, *op, v),
                    (Operand::Const(v), Operand::Tape(t)) => (t, flip(*op), v),
                    (Operand::Const(a), Operand::Const(b)) => {
                        return Ok(LCond::Const(op.holds(a.cmp(&b))))
                    }
                    (Operand::Tape(_), Operand::Tape(_)) => {
                        return Err(self.error(rule, "comparison between two tapes"))
                    }
                };
                let cells = self.hl.tapes[tape].cells;
                let max = (1i64 << cells) - 1;
                if value < 0 || value > max {
                    // Every tape value lies on one side of the constant.
                    let ord = if value < 0 {
                        std::cmp::Ordering::Greater
                    } else {
                        std::cmp::Ordering::Less
                    };
                    return Ok(LCond::Const(op.holds(ord)));
                }
                let cmp = Comparison {
                    tape,
                    op,
                    value: value as u64,
                };
                let slot = match cmps.iter().position(|c| *c == cmp) {
                    Some(i) => i,
                    None => {
                        cmps.push(cmp);
                        cmps.len() - 1
                    }
                };
                LCond::Outcome(slot)
            }
            HlCond::Not(c) => LCond::Not(Box::new(self.normalize(rule, c, cmps)?)),
            HlCond::And(a, b) => LCond::And(
                Box::new(self.normalize(rule, a, cmps)?),
                Box::new(self.normalize(rule, b, cmps)?),
            ),
            HlCond::Or(a, b) => LCond::Or(
                Box::new(self.normalize(rule, a, cmps)?),
                Box::new(self.normalize(rule, b, cmps)?),
            ),
        })
    }

    /// Whether every reachable configuration in `state` has `tape`'s head on
    /// the endmark.
    fn head_homed(&mut self, state: StateId, tape: usize) -> Result<bool> {
        if self.homed.is_none() {
            self.homed = Some(explore_homed(self.hl)?);
        }
        Ok(self.homed.as_ref().unwrap()[state.index()][tape])
    }

    /// Resolves comparisons one at a time, then decides the group per tuple.
    fn dispatch(
        &mut self,
        cur: StateId,
        group: &[usize],
        conds: &[LCond],
        cmps: &[Comparison],
        outcomes: Vec<bool>,
    ) -> Result<()> {
        if outcomes.len() < cmps.len() {
            let c = cmps[outcomes.len()];
            let base = format!("{}~cmp{}", self.names[cur.index()], outcomes.len());
            let [o_false, o_true] = self.compare(cur, c, &base);
            for (next, b) in [(o_false, false), (o_true, true)] {
                let mut o = outcomes.clone();
                o.push(b);
                self.dispatch(next, group, conds, cmps, o)?;
            }
            return Ok(());
        }
        for ti in 0..self.tuples.len() {
            let tuple = self.tuples[ti].clone();
            let Some(pos) = conds.iter().position(|c| c.eval(&tuple, &outcomes)) else {
                continue;
            };
            let r = group[pos];
            for bi in 0..self.hl.rules[r].branches.len() {
                self.branch(cur, &tuple, r, bi)?;
            }
        }
        Ok(())
    }

    /// Emits the scan for `c` starting at `cur`; returns the outcome states.
    fn compare(&mut self, cur: StateId, c: Comparison, base: &str) -> [StateId; 2] {
        let cells = self.hl.tapes[c.tape].cells;
        let outcome = [
            self.fresh(format!("{base}=false")),
            self.fresh(format!("{base}=true")),
        ];
        let ret = [
            self.fresh(format!("{base}.return-false")),
            self.fresh(format!("{base}.return-true")),
        ];
        let scan: Vec<StateId> = (0..cells)
            .map(|i| self.fresh(format!("{base}.bit{}", cells - 1 - i)))
            .collect();
        let to_msb = self.step(&[(c.tape, None, Move::Left)]);
        self.pass_all(cur, scan[0], &to_msb);
        for (i, &s) in scan.iter().enumerate() {
            let bit_index = cells - 1 - i;
            let k = (c.value >> bit_index) & 1 == 1;
            for ti in 0..self.tuples.len() {
                let tuple = self.tuples[ti].clone();
                let Some(b) = tuple[c.tape].bit() else {
                    continue;
                };
                let to = if b == k {
                    if i + 1 < cells {
                        scan[i + 1]
                    } else {
                        // Moving left from the low cell lands on the endmark.
                        outcome[c.op.holds(std::cmp::Ordering::Equal) as usize]
                    }
                } else {
                    ret[c.op.holds(b.cmp(&k)) as usize]
                };
                let action = self.step(&[(c.tape, None, Move::Left)]);
                self.pass(s, &tuple, to, &action);
            }
        }
        for v in [false, true] {
            self.seek_loop(ret[v as usize], c.tape, outcome[v as usize]);
        }
        outcome
    }

    fn step(&self, acts: &[(usize, Option<bool>, Move)]) -> Vec<(Option<bool>, Move)> {
        let mut v = vec![(None, Move::Stay); self.hl.tapes.len()];
        for &(t, w, m) in acts {
            v[t] = (w, m);
        }
        v
    }

    fn gene(
        &mut self,
        from: StateId,
        tuple: &[Symbol],
        to: StateId,
        act: &[(Option<bool>, Move)],
        dw: i8,
        db: i8,
    ) {
        let write = tuple
            .iter()
            .zip(act)
            .map(|(&s, &(w, _))| match (s, w) {
                (Symbol::End, _) | (_, None) => s,
                (_, Some(b)) => Symbol::from_bit(b),
            })
            .collect();
        self.genes.push(Instruction {
            from,
            read: tuple.to_vec(),
            to,
            write,
            moves: act.iter().map(|&(_, m)| m).collect(),
            dw,
            db,
        });
    }

    /// A pass-through hop: weight 2, bias 0.
    fn pass(&mut self, from: StateId, tuple: &[Symbol], to: StateId, act: &[(Option<bool>, Move)]) {
        self.gene(from, tuple, to, act, 1, 1);
        self.gene(from, tuple, to, act, 1, -1);
    }

    fn pass_all(&mut self, from: StateId, to: StateId, act: &[(Option<bool>, Move)]) {
        for ti in 0..self.tuples.len() {
            let tuple = self.tuples[ti].clone();
            self.pass(from, &tuple, to, act);
        }
    }

    /// In `state`: on the endmark of `tape` go to `exit`, else move left.
    fn seek_loop(&mut self, state: StateId, tape: usize, exit: StateId) {
        let stay = self.step(&[]);
        let left = self.step(&[(tape, None, Move::Left)]);
        for ti in 0..self.tuples.len() {
            let tuple = self.tuples[ti].clone();
            if tuple[tape] == Symbol::End {
                self.pass(state, &tuple, exit, &stay);
            } else {
                self.pass(state, &tuple, state, &left);
            }
        }
    }

    /// In `state`: on the endmark of `tape` go to `exit`, else write 0 and
    /// move right.
    fn zero_loop(&mut self, state: StateId, tape: usize, exit: StateId) {
        let stay = self.step(&[]);
        let zero = self.step(&[(tape, Some(false), Move::Right)]);
        for ti in 0..self.tuples.len() {
            let tuple = self.tuples[ti].clone();
            if tuple[tape] == Symbol::End {
                self.pass(state, &tuple, exit, &stay);
            } else {
                self.pass(state, &tuple, state, &zero);
            }
        }
    }

    fn false_sink(&mut self) -> StateId {
        match self.sink {
            Some(s) => s,
            None => {
                let s = self.fresh("false".into());
                self.sink = Some(s);
                s
            }
        }
    }

    /// A state whose node is constant true: one link to the sink with
    /// weight 1 and bias 1.
    fn true_state(&mut self) -> StateId {
        if let Some(s) = self.truth {
            return s;
        }
        let sink = self.false_sink();
        let s = self.fresh("true".into());
        let stay = self.step(&[]);
        for ti in 0..self.tuples.len() {
            let tuple = self.tuples[ti].clone();
            self.gene(s, &tuple, sink, &stay, 1, 1);
        }
        self.truth = Some(s);
        s
    }

    fn phases(&self, rule: usize, ops: &[HlOp]) -> Result<Vec<Phase>> {
        let k = self.hl.tapes.len();
        let mut phases = Vec::new();
        let mut cur: Vec<(Option<bool>, Move)> = vec![(None, Move::Stay); k];
        let flush = |cur: &mut Vec<(Option<bool>, Move)>, phases: &mut Vec<Phase>| {
            if cur.iter().any(|&(w, m)| w.is_some() || m != Move::Stay) {
                phases.push(Phase::Step(std::mem::replace(
                    cur,
                    vec![(None, Move::Stay); k],
                )));
            }
        };
        for &op in ops {
            match op {
                HlOp::Write { tape, bit } => {
                    if cur[tape].0.is_some() || cur[tape].1 != Move::Stay {
                        flush(&mut cur, &mut phases);
                    }
                    cur[tape].0 = Some(bit);
                }
                HlOp::Move { tape, mv } => {
                    if cur[tape].1 != Move::Stay {
                        flush(&mut cur, &mut phases);
                    }
                    cur[tape].1 = mv;
                }
                HlOp::Home { tape } => {
                    flush(&mut cur, &mut phases);
                    phases.push(Phase::Seek(tape));
                }
                HlOp::Clear { tape } => {
                    flush(&mut cur, &mut phases);
                    phases.push(Phase::Seek(tape));
                    let mut right = vec![(None, Move::Stay); k];
                    right[tape].1 = Move::Right;
                    phases.push(Phase::Step(right));
                    phases.push(Phase::Zero(tape));
                }
                HlOp::Assign { tape, .. } => {
                    return Err(self.error(
                        rule,
                        format!(
                            "assignment of a constant to tape `{}`",
                            self.hl.tape_names[tape]
                        ),
                    ))
                }
                HlOp::Copy { dst, src } => {
                    return Err(self.error(
                        rule,
                        format!(
                            "assignment of tape `{}` to tape `{}`",
                            self.hl.tape_names[src], self.hl.tape_names[dst]
                        ),
                    ))
                }
            }
        }
        flush(&mut cur, &mut phases);
        Ok(phases)
    }

    /// Emits the genes for branch `bi` of rule `r` firing at `cur` on `tuple`.
    fn branch(&mut self, cur: StateId, tuple: &[Symbol], r: usize, bi: usize) -> Result<()> {
        let b = self.hl.rules[r].branches[bi].clone();
        let diffs = expand_differential(b.dw, b.db).ok_or_else(|| {
            self.error(
                r,
                format!("differential ({}, {}) has mixed parity", b.dw, b.db),
            )
        })?;
        let target = match b.target {
            HlTarget::Const(false) => self.false_sink(),
            HlTarget::Const(true) => self.true_state(),
            HlTarget::State(s) => s,
        };
        let mut phases = match b.target {
            HlTarget::State(_) => self.phases(r, &b.ops)?,
            HlTarget::Const(_) => Vec::new(),
        };
        let first = match phases.first() {
            Some(Phase::Step(_)) => match phases.remove(0) {
                Phase::Step(a) => a,
                _ => unreachable!(),
            },
            _ => self.step(&[]),
        };
        let next = if phases.is_empty() {
            target
        } else {
            self.chain(cur, r, bi, phases, target)
        };
        for (dw, db) in diffs {
            self.gene(cur, tuple, next, &first, dw, db);
        }
        Ok(())
    }

    /// Builds (once per branch and source state) the chain of pass-through
    /// hops realising `phases`, returning its first state.
    fn chain(
        &mut self,
        cur: StateId,
        r: usize,
        bi: usize,
        phases: Vec<Phase>,
        target: StateId,
    ) -> StateId {
        if let Some(&s) = self.chains.get(&(cur.0, r, bi)) {
            return s;
        }
        let base = format!("{}~r{r}b{bi}", self.names[cur.index()]);
        let states: Vec<StateId> = (0..phases.len())
            .map(|i| self.fresh(format!("{base}.{i}")))
            .collect();
        for (i, phase) in phases.iter().enumerate() {
            let next = states.get(i + 1).copied().unwrap_or(target);
            match phase {
                Phase::Step(a) => self.pass_all(states[i], next, a),
                Phase::Seek(t) => self.seek_loop(states[i], *t, next),
                Phase::Zero(t) => self.zero_loop(states[i], *t, next),
            }
        }
        self.chains.insert((cur.0, r, bi), states[0]);
        states[0]
    }
}

fn mentions(c: &LCond, slot: usize) -> bool {
    match c {
        LCond::Outcome(i) => *i == slot,
        LCond::Not(c) => mentions(c, slot),
        LCond::And(a, b) | LCond::Or(a, b) => mentions(a, slot) || mentions(b, slot),
        _ => false,
    }
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Ge => CmpOp::Le,
        other => other,
    }
}

/// For each state and tape, whether every reachable configuration in that
/// state has the head on the endmark.
fn explore_homed(hl: &HlMachine) -> Result<Vec<Vec<bool>>> {
    let mut homed = vec![vec![true; hl.tapes.len()]; hl.num_states()];
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    for coords in row_major_coords(&hl.output_dims()) {
        let c = output_config_for(&hl.tapes, &coords)?;
        if seen.insert(c.canonical_key()) {
            queue.push_back(c);
        }
    }
    let mut steps = Vec::new();
    while let Some(c) = queue.pop_front() {
        for (t, tape) in c.tapes.iter().enumerate() {
            if tape.head != 0 {
                homed[c.state.index()][t] = false;
            }
        }
        let Some(r) = hl.first_match(&c) else {
            continue;
        };
        steps.clear();
        for b in &hl.rules[r].branches {
            if let Target::Config(next) = apply_branch(&c, b) {
                steps.push(next);
            }
        }
        for next in steps.drain(..) {
            if seen.insert(next.canonical_key()) {
                if seen.len() > EXPLORE_BUDGET {
                    return Err(Error::Argument(format!(
                        "more than {EXPLORE_BUDGET} reachable configurations; cannot check head positions for lowering"
                    )));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(homed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differential_expansion() {
        assert_eq!(expand_differential(2, 0), Some(vec![(1, 1), (1, -1)]));
        assert_eq!(expand_differential(2, -2), Some(vec![(1, -1), (1, -1)]));
        assert_eq!(expand_differential(1, 1), Some(vec![(1, 1)]));
        assert_eq!(expand_differential(2, 1), None);
        let g = expand_differential(-3, 1).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.iter().map(|&(w, _)| i64::from(w)).sum::<i64>(), -3);
        assert_eq!(g.iter().map(|&(_, b)| i64::from(b)).sum::<i64>(), 1);
    }
}
