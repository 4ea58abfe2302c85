//! Recursive-descent parser. The grammar is published in the `lopro` module
//! docs.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use crate::error::{Diagnostic, Span};

type PResult<T> = Result<T, Diagnostic>;

/// Syntax only: no name resolution.
pub fn parse_syntax(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let toks = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser { toks, pos: 0 };
    p.program().map_err(|d| vec![d])
}

/// Parses a file of function definitions with no machine block.
pub fn parse_library(src: &str) -> Result<Vec<Function>, Vec<Diagnostic>> {
    let toks = lex(src).map_err(|d| vec![d])?;
    let mut p = Parser { toks, pos: 0 };
    match p.units().map_err(|d| vec![d])? {
        (functions, None) => Ok(functions),
        (_, Some(m)) => Err(vec![Diagnostic::new(
            m.span,
            "a library cannot contain a machine block",
        )]),
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, context: &str) -> PResult<Span> {
        if self.peek() == &tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("{} {context}", tok.describe())))
        }
    }

    /// Missing `;` is reported at the end of the previous token's line.
    fn expect_semi(&mut self, context: &str) -> PResult<()> {
        if self.eat(&Tok::Semi) {
            return Ok(());
        }
        let prev = self.toks[self.pos.saturating_sub(1)].span;
        let here = self.span();
        let span = if here.line > prev.line { prev } else { here };
        Err(Diagnostic::new(
            span,
            format!("expected `;` {context}, found {}", self.peek().describe()),
        ))
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        Diagnostic::new(
            self.span(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn bit(&mut self) -> PResult<bool> {
        match self.peek() {
            Tok::Int(0) => {
                self.bump();
                Ok(false)
            }
            Tok::Int(1) => {
                self.bump();
                Ok(true)
            }
            _ => Err(self.unexpected("bit `0` or `1`")),
        }
    }

    /// Optional `()` after `head`, `end`, `is_end`.
    fn empty_call_parens(&mut self) -> PResult<()> {
        if self.eat(&Tok::LParen) {
            self.expect(Tok::RParen, "after `(`")?;
        }
        Ok(())
    }

    fn program(&mut self) -> PResult<Program> {
        let (functions, machine) = self.units()?;
        let machine =
            machine.ok_or_else(|| Diagnostic::new(self.span(), "missing machine block"))?;
        Ok(Program { functions, machine })
    }

    fn units(&mut self) -> PResult<(Vec<Function>, Option<MachineBlock>)> {
        let mut functions = Vec::new();
        let mut machine: Option<MachineBlock> = None;
        loop {
            match self.peek() {
                Tok::Fn => functions.push(self.function()?),
                Tok::Machine => {
                    let span = self.span();
                    let m = self.machine()?;
                    if machine.is_some() {
                        return Err(Diagnostic::new(span, "more than one machine block"));
                    }
                    machine = Some(m);
                }
                Tok::Eof => break,
                _ => return Err(self.unexpected("`fn` or `machine`")),
            }
        }
        Ok((functions, machine))
    }

    fn function(&mut self) -> PResult<Function> {
        self.expect(Tok::Fn, "to start a function")?;
        let name = self.ident("function name")?;
        self.expect(Tok::LParen, "after the function name")?;
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                params.push(self.param()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "to close the parameter list")?;
        self.expect(Tok::LBrace, "to open the function body")?;
        let mut body = Vec::new();
        while self.peek() != &Tok::Return {
            if self.peek() == &Tok::RBrace || self.peek() == &Tok::Eof {
                return Err(self.unexpected("`return` at the end of the function body"));
            }
            self.item(false, &mut body)?;
        }
        self.bump();
        let ret = self.ident("returned state")?;
        self.expect_semi("after the return statement")?;
        self.expect(Tok::RBrace, "to close the function body")?;
        Ok(Function {
            name,
            params,
            body,
            ret,
        })
    }

    fn param(&mut self) -> PResult<Param> {
        match self.peek() {
            Tok::Tape => {
                self.bump();
                let name = self.ident("tape parameter name")?;
                let end = if self.eat(&Tok::LBracket) {
                    let e = self.expr()?;
                    self.expect(Tok::RBracket, "after the tape end")?;
                    Some(e)
                } else {
                    None
                };
                Ok(Param::Tape { name, end })
            }
            Tok::State => {
                self.bump();
                Ok(Param::State {
                    name: self.ident("state parameter name")?,
                })
            }
            _ => Err(self.unexpected("`tape` or `state` parameter")),
        }
    }

    fn machine(&mut self) -> PResult<MachineBlock> {
        let span = self.expect(Tok::Machine, "")?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            if self.peek() != &Tok::RParen {
                loop {
                    let name = self.ident("machine parameter name")?;
                    self.expect(Tok::Assign, "after the parameter name")?;
                    let value = match self.peek().clone() {
                        Tok::Int(v) => {
                            self.bump();
                            v
                        }
                        _ => return Err(self.unexpected("integer default")),
                    };
                    params.push((name, value));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "to close the machine parameters")?;
        }
        self.expect(Tok::LBrace, "to open the machine block")?;
        let mut body = Vec::new();
        while self.peek() != &Tok::RBrace {
            if self.peek() == &Tok::Eof {
                return Err(self.unexpected("`}` to close the machine block"));
            }
            self.item(true, &mut body)?;
        }
        self.bump();
        Ok(MachineBlock { params, body, span })
    }

    fn item(&mut self, in_machine: bool, out: &mut Vec<Item>) -> PResult<()> {
        match self.peek().clone() {
            Tok::Tape => {
                self.bump();
                loop {
                    let name = self.ident("tape name")?;
                    self.expect(Tok::LBracket, "before the tape end value")?;
                    let end = self.expr()?;
                    self.expect(Tok::RBracket, "after the tape end value")?;
                    out.push(Item::Tape { name, end });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect_semi("after the tape declaration")
            }
            Tok::State => {
                self.bump();
                let mut names = vec![self.ident("state name")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.ident("state name")?);
                }
                self.expect_semi("after the state declaration")?;
                out.push(Item::States {
                    kind: StateKind::Plain,
                    names,
                    index_tapes: Vec::new(),
                });
                Ok(())
            }
            Tok::Ident(word)
                if (word == "input" || word == "output") && self.peek_at(1) == &Tok::State =>
            {
                if !in_machine {
                    return Err(Diagnostic::new(
                        self.span(),
                        format!("{word} states can only be declared in the machine block"),
                    ));
                }
                self.bump();
                self.bump();
                let name = self.ident("state name")?;
                let mut index_tapes = Vec::new();
                if self.eat(&Tok::LParen) {
                    if self.peek() != &Tok::RParen {
                        loop {
                            index_tapes.push(self.ident("index tape name")?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "to close the index tape list")?;
                }
                self.expect_semi("after the state declaration")?;
                let kind = if word == "input" {
                    StateKind::Input
                } else {
                    StateKind::Output
                };
                out.push(Item::States {
                    kind,
                    names: vec![name],
                    index_tapes,
                });
                Ok(())
            }
            Tok::Head => {
                self.bump();
                let name = self.ident("head name")?;
                self.expect(Tok::Assign, "after the head name")?;
                let tape = self.ident("tape name")?;
                self.expect(Tok::Dot, "in `tape.head`")?;
                self.expect(Tok::Head, "after `.`")?;
                self.empty_call_parens()?;
                self.expect_semi("after the head declaration")?;
                out.push(Item::Head { name, tape });
                Ok(())
            }
            Tok::Ident(_) => {
                out.push(Item::Rule(self.rule()?));
                Ok(())
            }
            Tok::Return => Err(Diagnostic::new(
                self.span(),
                "`return` is only allowed at the end of a function",
            )),
            _ => Err(self.unexpected("a declaration or rule")),
        }
    }

    fn rule(&mut self) -> PResult<Rule> {
        let from = self.ident("state name")?;
        let span = from.span;
        let when = if self.eat(&Tok::When) {
            self.expect(Tok::LParen, "after `when`")?;
            let c = self.cond()?;
            self.expect(Tok::RParen, "to close the `when` condition")?;
            Some(c)
        } else {
            None
        };
        self.expect(Tok::Assign, "between the precondition and the action")?;
        let mut branches = vec![self.branch()?];
        let mut combinator = Combinator::Single;
        loop {
            let next = match self.peek() {
                Tok::And => Combinator::And,
                Tok::Or => Combinator::Or,
                _ => break,
            };
            if combinator != Combinator::Single && combinator != next {
                return Err(Diagnostic::new(
                    self.span(),
                    "cannot mix `and` and `or` in one action; split the rule with a helper state",
                ));
            }
            combinator = next;
            self.bump();
            branches.push(self.branch()?);
        }
        self.expect_semi("at the end of the rule")?;
        Ok(Rule {
            from,
            when,
            combinator,
            branches,
            span,
        })
    }

    fn branch(&mut self) -> PResult<Branch> {
        let span = self.span();
        let target = match self.peek().clone() {
            Tok::True => {
                self.bump();
                Target::Const(true, span)
            }
            Tok::False => {
                self.bump();
                Target::Const(false, span)
            }
            Tok::Ident(_) => {
                let name = self.ident("target state")?;
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if self.peek() != &Tok::RParen {
                        loop {
                            args.push(self.arg()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "to close the argument list")?;
                    Target::Call { name, args }
                } else {
                    Target::State(name)
                }
            }
            _ => return Err(self.unexpected("target state, `true`, `false` or a call")),
        };
        let mut stmts = Vec::new();
        if self.eat(&Tok::After) {
            self.expect(Tok::LBrace, "after `after`")?;
            while self.peek() != &Tok::RBrace {
                if self.peek() == &Tok::Eof {
                    return Err(self.unexpected("`}` to close the `after` block"));
                }
                stmts.push(self.stmt()?);
            }
            self.bump();
        }
        Ok(Branch {
            target,
            stmts,
            span,
        })
    }

    fn arg(&mut self) -> PResult<Arg> {
        let span = self.span();
        match self.peek() {
            Tok::True => {
                self.bump();
                Ok(Arg::Const(true, span))
            }
            Tok::False => {
                self.bump();
                Ok(Arg::Const(false, span))
            }
            _ => Ok(Arg::Name(self.ident("argument")?)),
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let stmt = match self.peek().clone() {
            Tok::PlusPlus | Tok::MinusMinus => {
                let dir = if self.bump().tok == Tok::PlusPlus {
                    Dir::Right
                } else {
                    Dir::Left
                };
                Stmt::Move {
                    head: self.ident("head name")?,
                    dir,
                }
            }
            Tok::Star => {
                self.bump();
                let head = self.ident("head name")?;
                let then = match self.peek() {
                    Tok::PlusPlus => Some(Dir::Right),
                    Tok::MinusMinus => Some(Dir::Left),
                    _ => None,
                };
                if then.is_some() {
                    self.bump();
                }
                self.expect(Tok::Assign, "in a write statement")?;
                let bit = self.bit()?;
                Stmt::Write { head, bit, then }
            }
            Tok::Ident(_) => {
                let name = self.ident("head or tape name")?;
                match self.peek() {
                    Tok::PlusPlus => {
                        self.bump();
                        Stmt::Move {
                            head: name,
                            dir: Dir::Right,
                        }
                    }
                    Tok::MinusMinus => {
                        self.bump();
                        Stmt::Move {
                            head: name,
                            dir: Dir::Left,
                        }
                    }
                    Tok::Assign => {
                        self.bump();
                        Stmt::Assign {
                            tape: name,
                            value: self.expr()?,
                        }
                    }
                    _ => return Err(self.unexpected("`++`, `--` or `=` in a statement")),
                }
            }
            _ => return Err(self.unexpected("a statement")),
        };
        self.expect_semi("after the statement")?;
        Ok(stmt)
    }

    fn cond(&mut self) -> PResult<Cond> {
        let mut lhs = self.conj()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conj()?;
            lhs = Cond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<Cond> {
        let mut lhs = self.neg()?;
        while self.eat(&Tok::And) {
            let rhs = self.neg()?;
            lhs = Cond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn neg(&mut self) -> PResult<Cond> {
        if self.eat(&Tok::Not) {
            Ok(Cond::Not(Box::new(self.neg()?)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> PResult<Cond> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Cond::Const(true))
            }
            Tok::False => {
                self.bump();
                Ok(Cond::Const(false))
            }
            Tok::LParen => {
                self.bump();
                let c = self.cond()?;
                self.expect(Tok::RParen, "to close the condition")?;
                Ok(c)
            }
            Tok::Star => {
                self.bump();
                let head = self.ident("head name")?;
                let eq = match self.peek() {
                    Tok::Eq => true,
                    Tok::Ne => false,
                    _ => return Err(self.unexpected("`==` or `!=` after a scanned symbol")),
                };
                self.bump();
                let bit = self.bit()?;
                Ok(Cond::Scan { head, bit, eq })
            }
            Tok::Ident(_) if self.peek_at(1) == &Tok::Dot => {
                if let Tok::Ident(prop) = self.peek_at(2) {
                    if prop == "is_end" {
                        let head = self.ident("head name")?;
                        self.bump();
                        self.bump();
                        self.empty_call_parens()?;
                        return Ok(Cond::IsEnd(head));
                    }
                }
                self.comparison()
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> PResult<Cond> {
        let span = self.span();
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Cond::Cmp { lhs, op, rhs, span })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(v) => {
                let span = self.bump().span;
                Ok(Expr::Int(v, span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "to close the expression")?;
                Ok(e)
            }
            Tok::Ident(_) => {
                let name = self.ident("name")?;
                if self.eat(&Tok::Dot) {
                    match self.peek() {
                        Tok::Ident(p) if p == "end" => {
                            self.bump();
                            self.empty_call_parens()?;
                            Ok(Expr::End(name))
                        }
                        _ => Err(self.unexpected("`end` after `.`")),
                    }
                } else {
                    Ok(Expr::Name(name))
                }
            }
            _ => Err(self.unexpected("an integer expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_err(src: &str) -> Diagnostic {
        parse_syntax(src).unwrap_err().remove(0)
    }

    #[test]
    fn empty_source_has_no_machine() {
        assert_eq!(parse_err("").message, "missing machine block");
        assert_eq!(parse_err("// nothing\n").message, "missing machine block");
    }

    #[test]
    fn missing_semicolon_points_at_rule_line() {
        let src = "machine {\n  output state o;\n  state a;\n  o = a\n  a = true;\n}\n";
        let d = parse_err(src);
        assert_eq!(d.span.line, 4, "{d}");
        assert!(d.message.contains("`;`"));
    }

    #[test]
    fn rules_conditions_and_statements() {
        let src = "\
fn f(tape t[4], state s) {
  head h = t.head();
  state a, b;
  a = b after { ++h; } or s;
  b when (h.is_end() or *h == 1 and not (t >= t.end() - 1)) = false;
  b = a after { *h++ = 0; h--; t = 3; };
  return a;
}
machine(n = 3) {
  tape x[n];
  input state i(x);
  output state o;
  o = f(x, i);
}
";
        let p = parse_syntax(src).unwrap();
        let f = &p.functions[0];
        assert_eq!(f.state_count(), 2);
        assert_eq!(p.machine.params[0].1, 3);
        let rules: Vec<&Rule> = f
            .body
            .iter()
            .filter_map(|i| match i {
                Item::Rule(r) => Some(r),
                _ => None,
            })
            .collect();
        assert_eq!(rules[0].combinator, Combinator::Or);
        assert!(matches!(rules[1].when, Some(Cond::Or(..))));
        assert_eq!(rules[2].branches[0].stmts.len(), 3);
    }

    #[test]
    fn mixed_combinators_rejected() {
        let d = parse_err("machine { output state o; o = a and b or c; }");
        assert!(d.message.contains("mix"));
    }

    #[test]
    fn output_keyword_is_contextual() {
        let src = "machine { output state o; state output; o = output; output = true; }";
        assert!(parse_syntax(src).is_ok());
    }
}
