//! Lopro: a small logic-programming language for writing PTMs.
//!
//! States are predicates over tape contents. A rule
//! `from when (cond) = a after { stmts } or b;` says that a configuration in
//! `from` satisfying `cond` is the disjunction of the configurations reached
//! by each branch. Rules for one state are tried in order and only the first
//! whose condition holds applies. `and` builds a conjunction, a single branch
//! is a pass-through. Tapes read as unsigned integers with the cell next to
//! the endmark as the low-order bit.
//!
//! # Grammar
//!
//! ```text
//! program    = { function | machine } ;            (* exactly one machine *)
//! function   = "fn" IDENT "(" [ param { "," param } ] ")"
//!              "{" { item } "return" IDENT ";" "}" ;
//! param      = "tape" IDENT [ "[" expr "]" ] | "state" IDENT ;
//! machine    = "machine" [ "(" [ IDENT "=" INT { "," IDENT "=" INT } ] ")" ]
//!              "{" { item } "}" ;
//! item       = "tape" IDENT "[" expr "]" { "," IDENT "[" expr "]" } ";"
//!            | "state" IDENT { "," IDENT } ";"
//!            | ( "input" | "output" ) "state" IDENT
//!              [ "(" [ IDENT { "," IDENT } ] ")" ] ";"    (* machine only *)
//!            | "head" IDENT "=" IDENT "." "head" [ "(" ")" ] ";"
//!            | rule ;
//! rule       = IDENT [ "when" "(" cond ")" ] "=" branch
//!              ( { "or" branch } | { "and" branch } ) ";" ;
//! branch     = target [ "after" "{" { stmt } "}" ] ;
//! target     = "true" | "false" | IDENT [ "(" [ arg { "," arg } ] ")" ] ;
//! arg        = IDENT | "true" | "false" ;
//! stmt       = ( "++" | "--" ) IDENT ";"
//!            | IDENT ( "++" | "--" ) ";"
//!            | "*" IDENT [ "++" | "--" ] "=" BIT ";"
//!            | IDENT "=" expr ";" ;
//! cond       = conj { "or" conj } ;
//! conj       = neg { "and" neg } ;
//! neg        = "not" neg | atom ;
//! atom       = "true" | "false" | "(" cond ")"
//!            | IDENT "." "is_end" [ "(" ")" ]
//!            | "*" IDENT ( "==" | "!=" ) BIT
//!            | expr ( "==" | "!=" | "<" | "<=" | ">" | ">=" ) expr ;
//! expr       = term { ( "+" | "-" ) term } ;
//! term       = factor { ( "*" | "/" ) factor } ;
//! factor     = INT | IDENT [ "." "end" [ "(" ")" ] ] | "(" expr ")" ;
//! ```
//!
//! `//` starts a comment. `input` and `output` are keywords only in front of
//! `state`. A comparison operand may not start with `(`, which always opens
//! a nested condition. Functions called but not defined are taken from the
//! standard library ([`STDLIB`]: `exists`, `all`).
//!
//! ```
//! use ptm::lopro;
//!
//! let hl = lopro::compile(lopro::programs::EXISTS, &lopro::ElabOptions::default()).unwrap();
//! let net = lopro::build_highlevel(&hl, &ptm::Limits::unlimited()).unwrap();
//! let input = ptm::BitArray::from_bitset_str(&[6], "001101").unwrap();
//! assert_eq!(ptm::evaluate(&net, &input).unwrap().to_row_major_string(), "1");
//! ```

pub mod ast;
mod check;
pub mod elaborate;
mod lexer;
pub mod lower;
mod parser;

use std::collections::BTreeSet;

pub use ast::Program;
pub use elaborate::{elaborate, ElabOptions, HlMachine};
pub use lower::{lower, Lowered};

use crate::build::{build_with, Limits};
use crate::error::{Diagnostic, Error, Result};
use crate::network::Network;

/// Library functions linked into programs that call them without defining
/// them.
pub const STDLIB: &str = include_str!("../../programs/stdlib.lp");

/// The shipped example programs.
pub mod programs {
    /// Is any input bit set? Parameter `n`: number of input bits.
    pub const EXISTS: &str = include_str!("../../programs/exists.lp");
    /// Are all input bits set? Parameter `n`: number of input bits.
    pub const ALL: &str = include_str!("../../programs/all.lp");
    /// Transitive closure of an adjacency matrix. Parameter `n`: vertices.
    pub const TRANSITIVE_CLOSURE: &str = include_str!("../../programs/transitive_closure.lp");
}

/// Parses, links the standard library, and resolves names.
pub fn parse(src: &str) -> Result<Program> {
    let mut program = parser::parse_syntax(src).map_err(Error::Lopro)?;
    link_stdlib(&mut program)?;
    let diags = check::check(&program);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(Error::Lopro(diags))
    }
}

/// Parses and elaborates.
pub fn compile(src: &str, opts: &ElabOptions) -> Result<HlMachine> {
    elaborate(&parse(src)?, opts)
}

/// Builds a network directly from high-level rules.
pub fn build_highlevel(hl: &HlMachine, limits: &Limits) -> Result<Network> {
    build_with(hl, limits, false).map(|(net, _)| net)
}

/// Formats diagnostics as `file:line:col: error: message`, one per line.
pub fn render_diagnostics(file: &str, diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("{file}:{d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn link_stdlib(program: &mut Program) -> Result<()> {
    let mut lib: Option<Vec<ast::Function>> = None;
    loop {
        let missing: BTreeSet<String> = called(program)
            .into_iter()
            .filter(|n| program.function(n).is_none())
            .collect();
        let lib = match &lib {
            Some(l) => l,
            None => lib.insert(parser::parse_library(STDLIB).map_err(Error::Lopro)?),
        };
        let found: Vec<ast::Function> = lib
            .iter()
            .filter(|f| missing.contains(&f.name.name))
            .cloned()
            .collect();
        if found.is_empty() {
            return Ok(());
        }
        program.functions.extend(found);
    }
}

fn called(program: &Program) -> Vec<String> {
    let bodies = program
        .functions
        .iter()
        .map(|f| &f.body)
        .chain(std::iter::once(&program.machine.body));
    let mut out = Vec::new();
    for body in bodies {
        for item in body {
            if let ast::Item::Rule(r) = item {
                for b in &r.branches {
                    if let ast::Target::Call { name, .. } = &b.target {
                        out.push(name.name.clone());
                    }
                }
            }
        }
    }
    out
}
