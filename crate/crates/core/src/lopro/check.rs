//! Name resolution and kind checks on a parsed program.

use std::collections::HashMap;

use super::ast::*;
use crate::error::{Diagnostic, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Tape,
    State,
    Head,
    Param,
}

impl Kind {
    fn noun(self) -> &'static str {
        match self {
            Kind::Tape => "tape",
            Kind::State => "state",
            Kind::Head => "head",
            Kind::Param => "machine parameter",
        }
    }
}

struct Scope {
    names: HashMap<String, (Kind, Span, bool)>,
}

impl Scope {
    fn lookup(&self, id: &Ident) -> Option<Kind> {
        self.names.get(&id.name).map(|&(k, _, _)| k)
    }
}

/// Collects every diagnostic rather than stopping at the first.
pub fn check(program: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen: HashMap<&str, Span> = HashMap::new();
    for f in &program.functions {
        if let Some(first) = seen.insert(&f.name.name, f.name.span) {
            diags.push(Diagnostic::new(
                f.name.span,
                format!(
                    "duplicate function `{}` (first defined at {first})",
                    f.name.name
                ),
            ));
        }
    }
    for f in &program.functions {
        let mut scope = Scope {
            names: HashMap::new(),
        };
        for p in &f.params {
            let kind = match p {
                Param::Tape { .. } => Kind::Tape,
                Param::State { .. } => Kind::State,
            };
            declare(&mut scope, p.name(), kind, true, &mut diags);
        }
        declare_items(&mut scope, &f.body, &mut diags);
        for p in &f.params {
            if let Param::Tape { end: Some(e), .. } = p {
                check_expr(&scope, e, &mut diags);
            }
        }
        check_items(program, &scope, &f.body, &mut diags);
        expect_kind(&scope, &f.ret, Kind::State, &mut diags);
    }

    let m = &program.machine;
    let mut scope = Scope {
        names: HashMap::new(),
    };
    for (name, _) in &m.params {
        declare(&mut scope, name, Kind::Param, false, &mut diags);
    }
    declare_items(&mut scope, &m.body, &mut diags);
    check_items(program, &scope, &m.body, &mut diags);
    let count = |kind: StateKind| {
        m.body
            .iter()
            .filter(|i| matches!(i, Item::States { kind: k, .. } if *k == kind))
            .count()
    };
    match count(StateKind::Output) {
        0 => diags.push(Diagnostic::new(m.span, "machine has no output state")),
        1 => {}
        _ => diags.push(Diagnostic::new(
            m.span,
            "machine has more than one output state",
        )),
    }
    if count(StateKind::Input) > 1 {
        diags.push(Diagnostic::new(
            m.span,
            "machine has more than one input state",
        ));
    }
    diags.sort_by_key(|d| d.span);
    diags
}

fn declare(scope: &mut Scope, id: &Ident, kind: Kind, param: bool, diags: &mut Vec<Diagnostic>) {
    if let Some(&(_, first, _)) = scope.names.get(&id.name) {
        diags.push(Diagnostic::new(
            id.span,
            format!("duplicate name `{}` (first declared at {first})", id.name),
        ));
        return;
    }
    scope.names.insert(id.name.clone(), (kind, id.span, param));
}

fn declare_items(scope: &mut Scope, items: &[Item], diags: &mut Vec<Diagnostic>) {
    for item in items {
        match item {
            Item::Tape { name, .. } => declare(scope, name, Kind::Tape, false, diags),
            Item::States { names, .. } => {
                for n in names {
                    declare(scope, n, Kind::State, false, diags);
                }
            }
            Item::Head { name, .. } => declare(scope, name, Kind::Head, false, diags),
            Item::Rule(_) => {}
        }
    }
}

fn expect_kind(scope: &Scope, id: &Ident, want: Kind, diags: &mut Vec<Diagnostic>) {
    match scope.lookup(id) {
        None => diags.push(Diagnostic::new(
            id.span,
            format!("unknown {} `{}`", want.noun(), id.name),
        )),
        Some(k) if k != want => diags.push(Diagnostic::new(
            id.span,
            format!(
                "`{}` is a {}, expected a {}",
                id.name,
                k.noun(),
                want.noun()
            ),
        )),
        Some(_) => {}
    }
}

fn check_items(program: &Program, scope: &Scope, items: &[Item], diags: &mut Vec<Diagnostic>) {
    for item in items {
        match item {
            Item::Tape { end, .. } => check_expr(scope, end, diags),
            Item::States { index_tapes, .. } => {
                for t in index_tapes {
                    expect_kind(scope, t, Kind::Tape, diags);
                }
            }
            Item::Head { tape, .. } => expect_kind(scope, tape, Kind::Tape, diags),
            Item::Rule(rule) => check_rule(program, scope, items, rule, diags),
        }
    }
}

fn check_rule(
    program: &Program,
    scope: &Scope,
    items: &[Item],
    rule: &Rule,
    diags: &mut Vec<Diagnostic>,
) {
    match scope.names.get(&rule.from.name) {
        None => diags.push(Diagnostic::new(
            rule.from.span,
            format!("unknown state `{}`", rule.from.name),
        )),
        Some(&(Kind::State, _, true)) => diags.push(Diagnostic::new(
            rule.from.span,
            format!(
                "rules can only be given for states declared in this scope, `{}` is a parameter",
                rule.from.name
            ),
        )),
        Some(&(Kind::State, _, false)) => {
            let is_input = items.iter().any(|i| {
                matches!(i, Item::States { kind: StateKind::Input, names, .. }
                    if names.iter().any(|n| n.name == rule.from.name))
            });
            if is_input {
                diags.push(Diagnostic::new(
                    rule.from.span,
                    format!("input state `{}` cannot have rules", rule.from.name),
                ));
            }
        }
        Some(_) => expect_kind(scope, &rule.from, Kind::State, diags),
    }
    if let Some(c) = &rule.when {
        check_cond(scope, c, diags);
    }
    for b in &rule.branches {
        match &b.target {
            Target::State(s) => expect_kind(scope, s, Kind::State, diags),
            Target::Const(..) => {}
            Target::Call { name, args } => check_call(program, scope, name, args, diags),
        }
        for s in &b.stmts {
            match s {
                Stmt::Move { head, .. } | Stmt::Write { head, .. } => {
                    expect_kind(scope, head, Kind::Head, diags)
                }
                Stmt::Assign { tape, value } => {
                    expect_kind(scope, tape, Kind::Tape, diags);
                    check_expr(scope, value, diags);
                }
            }
        }
    }
}

fn check_call(
    program: &Program,
    scope: &Scope,
    name: &Ident,
    args: &[Arg],
    diags: &mut Vec<Diagnostic>,
) {
    let Some(f) = program.function(&name.name) else {
        diags.push(Diagnostic::new(
            name.span,
            format!("unknown function `{}`", name.name),
        ));
        return;
    };
    if f.params.len() != args.len() {
        diags.push(Diagnostic::new(
            name.span,
            format!(
                "`{}` takes {} arguments, {} given",
                name.name,
                f.params.len(),
                args.len()
            ),
        ));
        return;
    }
    for (p, a) in f.params.iter().zip(args) {
        match (p, a) {
            (Param::Tape { .. }, Arg::Name(id)) => expect_kind(scope, id, Kind::Tape, diags),
            (Param::Tape { name: pn, .. }, Arg::Const(_, span)) => diags.push(Diagnostic::new(
                *span,
                format!("parameter `{}` expects a tape", pn.name),
            )),
            (Param::State { .. }, Arg::Name(id)) => expect_kind(scope, id, Kind::State, diags),
            (Param::State { .. }, Arg::Const(..)) => {}
        }
    }
}

fn check_cond(scope: &Scope, cond: &Cond, diags: &mut Vec<Diagnostic>) {
    match cond {
        Cond::Const(_) => {}
        Cond::IsEnd(h) => expect_kind(scope, h, Kind::Head, diags),
        Cond::Scan { head, .. } => expect_kind(scope, head, Kind::Head, diags),
        Cond::Cmp { lhs, rhs, .. } => {
            check_expr(scope, lhs, diags);
            check_expr(scope, rhs, diags);
        }
        Cond::Not(c) => check_cond(scope, c, diags),
        Cond::And(a, b) | Cond::Or(a, b) => {
            check_cond(scope, a, diags);
            check_cond(scope, b, diags);
        }
    }
}

fn check_expr(scope: &Scope, expr: &Expr, diags: &mut Vec<Diagnostic>) {
    match expr {
        Expr::Int(..) => {}
        Expr::Name(id) => match scope.lookup(id) {
            Some(Kind::Tape | Kind::Param) => {}
            Some(k) => diags.push(Diagnostic::new(
                id.span,
                format!(
                    "`{}` is a {}, expected a tape or integer",
                    id.name,
                    k.noun()
                ),
            )),
            None => diags.push(Diagnostic::new(
                id.span,
                format!("unknown name `{}`", id.name),
            )),
        },
        Expr::End(id) => expect_kind(scope, id, Kind::Tape, diags),
        Expr::Bin(_, a, b) => {
            check_expr(scope, a, diags);
            check_expr(scope, b, diags);
        }
    }
}
