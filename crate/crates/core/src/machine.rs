//! Machines, instructions, and configurations.
//!
//! Every tape is a fixed-length circular strip whose cell 0 holds the single
//! endmark. A head resting on the endmark is in the default (leftmost)
//! position; moving right from it reaches cell 1 and moving left reaches the
//! last cell. Index tapes hold unsigned integers with cell 1 as the lowest
//! order bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A tape symbol. The alphabet is fixed to `{0, 1, #}` where `#` is the endmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Zero,
    One,
    End,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::Zero, Symbol::One, Symbol::End];

    pub fn from_bit(bit: bool) -> Symbol {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    /// The bit value of a non-endmark symbol.
    pub fn bit(self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            Symbol::End => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::End => '#',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            '#' => Some(Symbol::End),
            _ => None,
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Tape head movement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Left, Move::Stay, Move::Right];

    pub fn as_char(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Stay => 'N',
            Move::Right => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Move> {
        match c {
            'L' => Some(Move::Left),
            'N' => Some(Move::Stay),
            'R' => Some(Move::Right),
            _ => None,
        }
    }

    pub fn inverse(self) -> Move {
        match self {
            Move::Left => Move::Right,
            Move::Stay => Move::Stay,
            Move::Right => Move::Left,
        }
    }
}

/// What a tape is used for.
///
/// `IoIndex` marks a tape that addresses both the output array (it is
/// initialised with the output coordinate) and the input array (it is decoded
/// when an input configuration is reached).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TapeRole {
    Work,
    InputIndex,
    OutputIndex,
    IoIndex,
}

impl TapeRole {
    pub fn addresses(self, side: IndexSide) -> bool {
        matches!(
            (self, side),
            (TapeRole::InputIndex, IndexSide::Input)
                | (TapeRole::OutputIndex, IndexSide::Output)
                | (TapeRole::IoIndex, _)
        )
    }

    pub fn is_index(self) -> bool {
        self != TapeRole::Work
    }

    pub fn keyword(self) -> &'static str {
        match self {
            TapeRole::Work => "work",
            TapeRole::InputIndex => "input-index",
            TapeRole::OutputIndex => "output-index",
            TapeRole::IoIndex => "io-index",
        }
    }
}

/// Which array an index tape addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexSide {
    Input,
    Output,
}

/// Number of cells needed to hold every integer below `dim`.
pub fn index_cells(dim: u64) -> usize {
    let mut cells = 1;
    while cells < 64 && (1u64 << cells) < dim {
        cells += 1;
    }
    cells
}

/// Largest supported cell count for a single tape.
pub const MAX_CELLS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TapeSpec {
    pub role: TapeRole,
    /// Array extent for index tapes; `2^cells` for work tapes.
    pub dim: u64,
    /// Number of non-endmark cells.
    pub cells: usize,
}

impl TapeSpec {
    pub fn work(cells: usize) -> Result<TapeSpec> {
        if cells == 0 || cells > MAX_CELLS {
            return Err(Error::Structure(format!(
                "work tape needs between 1 and {MAX_CELLS} cells, got {cells}"
            )));
        }
        Ok(TapeSpec {
            role: TapeRole::Work,
            dim: 1 << cells,
            cells,
        })
    }

    pub fn index(role: TapeRole, dim: u64) -> Result<TapeSpec> {
        if !role.is_index() {
            return Err(Error::Structure("index tape needs an index role".into()));
        }
        if dim == 0 {
            return Err(Error::Structure("index tape dim must be positive".into()));
        }
        let cells = index_cells(dim);
        if cells > MAX_CELLS {
            return Err(Error::Structure(format!(
                "index tape dim {dim} is too large"
            )));
        }
        Ok(TapeSpec { role, dim, cells })
    }

    pub fn input_index(dim: u64) -> Result<TapeSpec> {
        TapeSpec::index(TapeRole::InputIndex, dim)
    }

    pub fn output_index(dim: u64) -> Result<TapeSpec> {
        TapeSpec::index(TapeRole::OutputIndex, dim)
    }

    pub fn io_index(dim: u64) -> Result<TapeSpec> {
        TapeSpec::index(TapeRole::IoIndex, dim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Ptm,
    Atm,
}

/// Gate type assigned to each state of an alternating machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateType {
    And,
    Or,
    True,
    False,
    Read,
    ReadInverted,
}

impl GateType {
    pub const ALL: [GateType; 6] = [
        GateType::And,
        GateType::Or,
        GateType::True,
        GateType::False,
        GateType::Read,
        GateType::ReadInverted,
    ];

    pub fn is_leaf(self) -> bool {
        !matches!(self, GateType::And | GateType::Or)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            GateType::And => "and",
            GateType::Or => "or",
            GateType::True => "true",
            GateType::False => "false",
            GateType::Read => "read",
            GateType::ReadInverted => "read-inverted",
        }
    }

    pub fn from_keyword(s: &str) -> Option<GateType> {
        GateType::ALL.into_iter().find(|g| g.keyword() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u32);

impl StateId {
    /// `q0`: output configurations start here.
    pub const OUTPUT: StateId = StateId(0);
    /// `q1`: configurations in this state are input nodes (PTM only).
    pub const INPUT: StateId = StateId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One gene: `(q, a_1..a_k) -> (q', b_1..b_k, m_1..m_k, dw, db)`.
///
/// `dw` and `db` are `+1` or `-1`. Alternating machines ignore them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instruction {
    pub from: StateId,
    pub read: Vec<Symbol>,
    pub to: StateId,
    pub write: Vec<Symbol>,
    pub moves: Vec<Move>,
    pub dw: i8,
    pub db: i8,
}

impl Instruction {
    pub fn arity(&self) -> usize {
        self.read.len()
    }
}

/// Everything about a machine except its program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineHeader {
    pub flavor: Flavor,
    pub num_states: u32,
    /// Gate type per state; empty for PTMs.
    pub gates: Vec<GateType>,
    pub tapes: Vec<TapeSpec>,
}

impl MachineHeader {
    pub fn ptm(num_states: u32, tapes: Vec<TapeSpec>) -> Result<MachineHeader> {
        let h = MachineHeader {
            flavor: Flavor::Ptm,
            num_states,
            gates: Vec::new(),
            tapes,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn atm(gates: Vec<GateType>, tapes: Vec<TapeSpec>) -> Result<MachineHeader> {
        let h = MachineHeader {
            flavor: Flavor::Atm,
            num_states: gates.len() as u32,
            gates,
            tapes,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        match self.flavor {
            Flavor::Ptm => {
                if self.num_states < 2 {
                    return Err(Error::Structure(
                        "a PTM needs at least the output and input states".into(),
                    ));
                }
                if !self.gates.is_empty() {
                    return Err(Error::Structure("a PTM has no gate types".into()));
                }
            }
            Flavor::Atm => {
                if self.num_states == 0 {
                    return Err(Error::Structure("an ATM needs at least one state".into()));
                }
                if self.gates.len() != self.num_states as usize {
                    return Err(Error::Structure(format!(
                        "ATM has {} states but {} gate types",
                        self.num_states,
                        self.gates.len()
                    )));
                }
            }
        }
        for t in &self.tapes {
            let ok = match t.role {
                TapeRole::Work => t.cells >= 1 && t.cells <= MAX_CELLS && t.dim == 1 << t.cells,
                _ => t.dim >= 1 && t.cells == index_cells(t.dim),
            };
            if !ok {
                return Err(Error::Structure(format!("inconsistent tape {t:?}")));
            }
        }
        Ok(())
    }

    pub fn num_tapes(&self) -> usize {
        self.tapes.len()
    }

    /// Extents of the input array, one per input index tape in tape order.
    pub fn input_dims(&self) -> Vec<usize> {
        self.index_dims(IndexSide::Input)
    }

    pub fn output_dims(&self) -> Vec<usize> {
        self.index_dims(IndexSide::Output)
    }

    fn index_dims(&self, side: IndexSide) -> Vec<usize> {
        self.tapes
            .iter()
            .filter(|t| t.role.addresses(side))
            .map(|t| t.dim as usize)
            .collect()
    }

    pub fn gate(&self, state: StateId) -> Option<GateType> {
        self.gates.get(state.index()).copied()
    }

    /// Leaf states: the input state of a PTM, or any ATM state whose gate
    /// cannot have inputs. Instructions out of a leaf state never match.
    pub fn is_leaf_state(&self, state: StateId) -> bool {
        match self.flavor {
            Flavor::Ptm => state == StateId::INPUT,
            Flavor::Atm => self.gate(state).is_some_and(GateType::is_leaf),
        }
    }

    /// Checks that an instruction fits this header.
    pub fn check_instruction(&self, instr: &Instruction) -> Result<()> {
        let k = self.num_tapes();
        if instr.read.len() != k || instr.write.len() != k || instr.moves.len() != k {
            return Err(Error::Structure(format!(
                "instruction arity does not match {k} tapes"
            )));
        }
        if instr.from.0 >= self.num_states || instr.to.0 >= self.num_states {
            return Err(Error::Structure(format!(
                "state id out of range (machine has {} states)",
                self.num_states
            )));
        }
        if self.flavor == Flavor::Ptm && (instr.dw.abs() != 1 || instr.db.abs() != 1) {
            return Err(Error::Structure(
                "differential weight and bias must be +1 or -1".into(),
            ));
        }
        Ok(())
    }
}

/// A machine header together with its ordered program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineSpec {
    pub header: MachineHeader,
    pub program: Vec<Instruction>,
}

impl MachineSpec {
    pub fn new(header: MachineHeader, program: Vec<Instruction>) -> Result<MachineSpec> {
        header.validate()?;
        for (i, instr) in program.iter().enumerate() {
            header
                .check_instruction(instr)
                .map_err(|e| Error::Structure(format!("instruction {i}: {e}")))?;
        }
        Ok(MachineSpec { header, program })
    }
}

/// State of one tape: its cells (endmark at index 0) and head position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TapeState {
    pub cells: Vec<Symbol>,
    pub head: usize,
}

impl TapeState {
    pub fn zeroed(cells: usize) -> TapeState {
        let mut v = vec![Symbol::Zero; cells + 1];
        v[0] = Symbol::End;
        TapeState { cells: v, head: 0 }
    }

    pub fn scanned(&self) -> Symbol {
        self.cells[self.head]
    }

    pub fn width(&self) -> usize {
        self.cells.len() - 1
    }

    /// Unsigned value of the tape, cell 1 being the low-order bit.
    pub fn value(&self) -> u64 {
        self.cells[1..]
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, s)| {
                acc | (u64::from(s == &Symbol::One) << i)
            })
    }

    /// Overwrites the cells with `value`, keeping the low `width` bits.
    pub fn set_value(&mut self, value: u64) {
        for i in 0..self.width() {
            self.cells[i + 1] = Symbol::from_bit((value >> i) & 1 == 1);
        }
    }

    /// Writes `sym` under the head unless it would change endmark-ness.
    pub fn write(&mut self, sym: Symbol) {
        let cur = self.cells[self.head];
        if (cur == Symbol::End) == (sym == Symbol::End) {
            self.cells[self.head] = sym;
        }
    }

    pub fn step(&mut self, mv: Move) {
        let len = self.cells.len();
        self.head = match mv {
            Move::Left => (self.head + len - 1) % len,
            Move::Stay => self.head,
            Move::Right => (self.head + 1) % len,
        };
    }

    /// Zero all cells and park the head on the endmark.
    pub fn clear(&mut self) {
        for c in &mut self.cells[1..] {
            *c = Symbol::Zero;
        }
        self.head = 0;
    }
}

/// An instantaneous description: the identity of a network node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub tapes: Vec<TapeState>,
}

impl Configuration {
    /// All tapes zero, all heads on the endmark.
    pub fn blank(tapes: &[TapeSpec], state: StateId) -> Configuration {
        Configuration {
            state,
            tapes: tapes.iter().map(|t| TapeState::zeroed(t.cells)).collect(),
        }
    }

    pub fn scanned(&self) -> Vec<Symbol> {
        self.tapes.iter().map(TapeState::scanned).collect()
    }

    /// A compact byte encoding, injective over configurations of one machine.
    pub fn canonical_key(&self) -> Box<[u8]> {
        let len = 4 + self.tapes.iter().map(|t| t.cells.len() + 1).sum::<usize>();
        let mut key = Vec::with_capacity(len);
        key.extend_from_slice(&self.state.0.to_le_bytes());
        for t in &self.tapes {
            key.push(t.head as u8);
            key.extend(t.cells.iter().map(|s| s.code()));
        }
        key.into_boxed_slice()
    }

    /// Checks shape against a tape list.
    pub fn check_shape(&self, tapes: &[TapeSpec]) -> Result<()> {
        if self.tapes.len() != tapes.len() {
            return Err(Error::Structure(format!(
                "configuration has {} tapes, machine has {}",
                self.tapes.len(),
                tapes.len()
            )));
        }
        for (i, (t, spec)) in self.tapes.iter().zip(tapes).enumerate() {
            if t.cells.len() != spec.cells + 1 || t.head > spec.cells {
                return Err(Error::Structure(format!("tape {i} has the wrong shape")));
            }
        }
        Ok(())
    }
}

/// Every instruction whose precondition holds in `config`, in program order.
///
/// Leaf configurations match nothing regardless of the program.
pub fn matching_instructions<'m>(
    machine: &'m MachineSpec,
    config: &Configuration,
) -> Result<Vec<(usize, &'m Instruction)>> {
    config.check_shape(&machine.header.tapes)?;
    if machine.header.is_leaf_state(config.state) {
        return Ok(Vec::new());
    }
    Ok(machine
        .program
        .iter()
        .enumerate()
        .filter(|(_, instr)| instruction_matches(instr, config))
        .collect())
}

pub(crate) fn instruction_matches(instr: &Instruction, config: &Configuration) -> bool {
    instr.from == config.state
        && instr
            .read
            .iter()
            .zip(&config.tapes)
            .all(|(a, t)| *a == t.scanned())
}

/// Writes, then moves each head, then changes state.
pub fn apply_instruction(config: &Configuration, instr: &Instruction) -> Configuration {
    let mut next = config.clone();
    next.state = instr.to;
    for ((tape, &sym), &mv) in next.tapes.iter_mut().zip(&instr.write).zip(&instr.moves) {
        tape.write(sym);
        tape.step(mv);
    }
    next
}

/// Decodes the coordinates held on the index tapes addressing `side`.
pub fn decode_index(tapes: &[TapeSpec], config: &Configuration, side: IndexSide) -> Vec<u64> {
    tapes
        .iter()
        .zip(&config.tapes)
        .filter(|(spec, _)| spec.role.addresses(side))
        .map(|(_, t)| t.value())
        .collect()
}

/// The configuration that computes output bit `coords`.
pub fn make_output_config(header: &MachineHeader, coords: &[u64]) -> Result<Configuration> {
    output_config_for(&header.tapes, coords)
}

pub(crate) fn output_config_for(tapes: &[TapeSpec], coords: &[u64]) -> Result<Configuration> {
    let mut config = Configuration::blank(tapes, StateId::OUTPUT);
    let mut remaining = coords.iter();
    for (spec, tape) in tapes.iter().zip(config.tapes.iter_mut()) {
        if !spec.role.addresses(IndexSide::Output) {
            continue;
        }
        let c = *remaining.next().ok_or_else(|| {
            Error::Argument(format!(
                "expected more than {} output coordinates",
                coords.len()
            ))
        })?;
        if c >= spec.dim {
            return Err(Error::Argument(format!(
                "output coordinate {c} out of range for dim {}",
                spec.dim
            )));
        }
        tape.set_value(c);
    }
    if remaining.next().is_some() {
        return Err(Error::Argument(format!(
            "too many output coordinates ({})",
            coords.len()
        )));
    }
    Ok(config)
}

/// Row-major enumeration of every coordinate tuple below `dims`.
/// Zero dimensions yield a single empty tuple.
pub fn row_major_coords(dims: &[usize]) -> Vec<Vec<u64>> {
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    for mut flat in 0..total {
        let mut coords = vec![0u64; dims.len()];
        for (i, &d) in dims.iter().enumerate().rev() {
            coords[i] = (flat % d) as u64;
            flat /= d;
        }
        out.push(coords);
    }
    out
}
