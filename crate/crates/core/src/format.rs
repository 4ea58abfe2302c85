//! Line-oriented text format for machines and genotypes.
//!
//! ```text
//! ptm v1
//! states 3
//! tape 0 input-index dim 4
//! tape 1 work cells 2
//! instr 0 # # -> 2 # # R N +1 -1
//! ```
//!
//! Alternating machines start with `atm v1`, declare `gate <state> <type>`
//! for every state, and omit the trailing `dw db` pair. Symbols are `0`, `1`,
//! `#`; moves are `L`, `N`, `R`. Text after `//` is a comment. Instruction
//! order in the file is program order.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::machine::{
    Flavor, GateType, Instruction, MachineHeader, MachineSpec, Move, StateId, Symbol, TapeRole,
    TapeSpec,
};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| err(line, format!("invalid {what} `{tok}`")))
}

fn parse_sign(tok: Option<&str>, line: usize, what: &str) -> Result<i8> {
    match tok {
        Some("+1") | Some("1") => Ok(1),
        Some("-1") => Ok(-1),
        Some(t) => Err(err(line, format!("{what} must be +1 or -1, got `{t}`"))),
        None => Err(err(line, format!("missing {what}"))),
    }
}

/// Parses the machine text format.
pub fn parse_machine(text: &str) -> Result<MachineSpec> {
    let mut flavor = None;
    let mut num_states: Option<u32> = None;
    let mut tapes: Vec<Option<TapeSpec>> = Vec::new();
    let mut gates: Vec<Option<GateType>> = Vec::new();
    let mut raw_instrs: Vec<(usize, Vec<String>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split("//").next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().unwrap();
        if flavor.is_none() {
            flavor = Some(match (head, toks.next()) {
                ("ptm", Some("v1")) => Flavor::Ptm,
                ("atm", Some("v1")) => Flavor::Atm,
                _ => return Err(err(line, "expected header `ptm v1` or `atm v1`")),
            });
            continue;
        }
        match head {
            "states" => {
                if num_states.is_some() {
                    return Err(err(line, "duplicate `states` line"));
                }
                num_states = Some(parse_num(toks.next(), line, "state count")?);
            }
            "tape" => {
                let i: usize = parse_num(toks.next(), line, "tape index")?;
                let role = toks.next().ok_or_else(|| err(line, "missing tape role"))?;
                let spec = match role {
                    "work" => {
                        expect(toks.next(), "cells", line)?;
                        TapeSpec::work(parse_num(toks.next(), line, "cell count")?)
                    }
                    "input-index" | "output-index" | "io-index" => {
                        expect(toks.next(), "dim", line)?;
                        let role = match role {
                            "input-index" => TapeRole::InputIndex,
                            "output-index" => TapeRole::OutputIndex,
                            _ => TapeRole::IoIndex,
                        };
                        TapeSpec::index(role, parse_num(toks.next(), line, "dim")?)
                    }
                    other => return Err(err(line, format!("unknown tape role `{other}`"))),
                }
                .map_err(|e| err(line, e.to_string()))?;
                if tapes.len() <= i {
                    tapes.resize(i + 1, None);
                }
                if tapes[i].replace(spec).is_some() {
                    return Err(err(line, format!("tape {i} declared twice")));
                }
            }
            "gate" => {
                let s: usize = parse_num(toks.next(), line, "state")?;
                let kw = toks.next().ok_or_else(|| err(line, "missing gate type"))?;
                let g = GateType::from_keyword(kw)
                    .ok_or_else(|| err(line, format!("unknown gate type `{kw}`")))?;
                if gates.len() <= s {
                    gates.resize(s + 1, None);
                }
                if gates[s].replace(g).is_some() {
                    return Err(err(line, format!("gate for state {s} declared twice")));
                }
            }
            "instr" => raw_instrs.push((line, toks.by_ref().map(str::to_owned).collect())),
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
        if let Some(extra) = toks.next() {
            return Err(err(line, format!("unexpected trailing `{extra}`")));
        }
    }

    let flavor = flavor.ok_or_else(|| err(1, "empty machine file"))?;
    let num_states = num_states.ok_or_else(|| err(1, "missing `states` line"))?;
    let tapes = tapes
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.ok_or_else(|| err(1, format!("tape {i} is not declared"))))
        .collect::<Result<Vec<_>>>()?;
    let gates = match flavor {
        Flavor::Ptm => {
            if !gates.is_empty() {
                return Err(err(1, "gate lines are only allowed in ATM files"));
            }
            Vec::new()
        }
        Flavor::Atm => {
            if gates.len() > num_states as usize {
                return Err(err(1, "gate declared for a state that does not exist"));
            }
            gates.resize(num_states as usize, None);
            gates
                .into_iter()
                .enumerate()
                .map(|(s, g)| g.ok_or_else(|| err(1, format!("state {s} has no gate type"))))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let header = MachineHeader {
        flavor,
        num_states,
        gates,
        tapes,
    };
    header.validate().map_err(|e| err(1, e.to_string()))?;

    let k = header.num_tapes();
    let mut program = Vec::with_capacity(raw_instrs.len());
    for (line, toks) in raw_instrs {
        let instr = parse_instr(&toks, k, flavor, line)?;
        header
            .check_instruction(&instr)
            .map_err(|e| err(line, e.to_string()))?;
        program.push(instr);
    }
    Ok(MachineSpec { header, program })
}

fn expect(tok: Option<&str>, want: &str, line: usize) -> Result<()> {
    match tok {
        Some(t) if t == want => Ok(()),
        other => Err(err(
            line,
            format!(
                "expected `{want}`, found `{}`",
                other.unwrap_or("end of line")
            ),
        )),
    }
}

fn parse_instr(toks: &[String], k: usize, flavor: Flavor, line: usize) -> Result<Instruction> {
    let expected = 1 + k + 1 + 1 + k + k + if flavor == Flavor::Ptm { 2 } else { 0 };
    if toks.len() != expected {
        return Err(err(
            line,
            format!(
                "instruction needs {expected} fields for {k} tapes, found {}",
                toks.len()
            ),
        ));
    }
    let mut it = toks.iter().map(String::as_str);
    let from = StateId(parse_num(it.next(), line, "from-state")?);
    let read = (0..k)
        .map(|_| symbol(it.next(), line))
        .collect::<Result<Vec<_>>>()?;
    expect(it.next(), "->", line)?;
    let to = StateId(parse_num(it.next(), line, "to-state")?);
    let write = (0..k)
        .map(|_| symbol(it.next(), line))
        .collect::<Result<Vec<_>>>()?;
    let moves = (0..k)
        .map(|_| {
            let t = it.next().unwrap_or("");
            let mut cs = t.chars();
            match (cs.next().and_then(Move::from_char), cs.next()) {
                (Some(m), None) => Ok(m),
                _ => Err(err(line, format!("invalid move `{t}`"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let (dw, db) = match flavor {
        Flavor::Ptm => (
            parse_sign(it.next(), line, "dw")?,
            parse_sign(it.next(), line, "db")?,
        ),
        Flavor::Atm => (1, 1),
    };
    Ok(Instruction {
        from,
        read,
        to,
        write,
        moves,
        dw,
        db,
    })
}

fn symbol(tok: Option<&str>, line: usize) -> Result<Symbol> {
    let t = tok.unwrap_or("");
    let mut cs = t.chars();
    match (cs.next().and_then(Symbol::from_char), cs.next()) {
        (Some(s), None) => Ok(s),
        _ => Err(err(line, format!("invalid symbol `{t}`"))),
    }
}

/// Serializes a machine. `state_names`, when given, adds a comment block
/// naming states; it never affects the parsed result.
pub fn write_machine(machine: &MachineSpec, state_names: Option<&[String]>) -> String {
    let h = &machine.header;
    let mut out = String::new();
    out.push_str(match h.flavor {
        Flavor::Ptm => "ptm v1\n",
        Flavor::Atm => "atm v1\n",
    });
    let _ = writeln!(out, "states {}", h.num_states);
    if let Some(names) = state_names {
        for (i, n) in names.iter().enumerate() {
            let _ = writeln!(out, "// state {i}: {n}");
        }
    }
    for (i, t) in h.tapes.iter().enumerate() {
        match t.role {
            TapeRole::Work => {
                let _ = writeln!(out, "tape {i} work cells {}", t.cells);
            }
            role => {
                let _ = writeln!(out, "tape {i} {} dim {}", role.keyword(), t.dim);
            }
        }
    }
    for (s, g) in h.gates.iter().enumerate() {
        let _ = writeln!(out, "gate {s} {}", g.keyword());
    }
    for instr in &machine.program {
        out.push_str(&instruction_line(instr, h.flavor));
        out.push('\n');
    }
    out
}

pub(crate) fn instruction_line(instr: &Instruction, flavor: Flavor) -> String {
    let mut s = format!("instr {}", instr.from);
    for a in &instr.read {
        let _ = write!(s, " {a}");
    }
    let _ = write!(s, " -> {}", instr.to);
    for b in &instr.write {
        let _ = write!(s, " {b}");
    }
    for m in &instr.moves {
        let _ = write!(s, " {}", m.as_char());
    }
    if flavor == Flavor::Ptm {
        let sign = |v: i8| if v > 0 { "+1" } else { "-1" };
        let _ = write!(s, " {} {}", sign(instr.dw), sign(instr.db));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const AND_PTM: &str = "\
ptm v1
states 4
tape 0 input-index dim 2
// the two children
instr 0 # -> 2 # N +1 -1
instr 0 # -> 2 # N +1 -1
instr 0 # -> 3 # R +1 -1
instr 0 # -> 3 # R +1 +1
";

    #[test]
    fn parses_and_round_trips() {
        let m = parse_machine(AND_PTM).unwrap();
        assert_eq!(m.header.num_states, 4);
        assert_eq!(m.program.len(), 4);
        assert_eq!(m.program[3].db, 1);
        let text = write_machine(&m, None);
        assert_eq!(parse_machine(&text).unwrap(), m);
    }

    #[test]
    fn atm_round_trip() {
        let text =
            "atm v1\nstates 2\ntape 0 work cells 1\ngate 0 or\ngate 1 true\ninstr 0 # -> 1 # R\n";
        let m = parse_machine(text).unwrap();
        assert_eq!(m.header.gates, vec![GateType::Or, GateType::True]);
        assert_eq!(parse_machine(&write_machine(&m, None)).unwrap(), m);
    }

    #[test]
    fn zero_tape_instructions() {
        let m = parse_machine("ptm v1\nstates 2\ninstr 0 -> 1 +1 -1\n").unwrap();
        assert!(m.program[0].read.is_empty());
    }

    #[test]
    fn errors_name_the_line() {
        let bad = "ptm v1\nstates 2\ntape 0 work cells 1\ninstr 0 # -> 1 # Q +1 +1\n";
        match parse_machine(bad) {
            Err(Error::Format { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("move"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_machine("ptm v1\nstates 2\ninstr 0 -> 7 +1 +1\n") {
            Err(Error::Format { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_machine("").is_err());
        assert!(parse_machine("ptm v1\nstates 2\ntape 1 work cells 1\n").is_err());
    }
}
