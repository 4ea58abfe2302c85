//! Genetic operators over gene lists.
//!
//! Every operator keeps genes valid for the header and keeps the program
//! length within [`LengthBounds`].

use rand::seq::SliceRandom;
use rand::Rng;

use crate::machine::{Instruction, MachineHeader, Move, StateId, Symbol};

use super::Genotype;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LengthBounds {
    pub min: usize,
    pub max: usize,
}

impl LengthBounds {
    pub fn contains(&self, len: usize) -> bool {
        (self.min..=self.max).contains(&len)
    }
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

/// A uniformly random gene for `header`.
pub fn random_gene<R: Rng + ?Sized>(header: &MachineHeader, rng: &mut R) -> Instruction {
    let k = header.num_tapes();
    let sym = |rng: &mut R| *Symbol::ALL.choose(rng).unwrap();
    let mv = |rng: &mut R| *Move::ALL.choose(rng).unwrap();
    Instruction {
        from: StateId(rng.gen_range(0..header.num_states)),
        read: (0..k).map(|_| sym(rng)).collect(),
        to: StateId(rng.gen_range(0..header.num_states)),
        write: (0..k).map(|_| sym(rng)).collect(),
        moves: (0..k).map(|_| mv(rng)).collect(),
        dw: sign(rng),
        db: sign(rng),
    }
}

pub fn random_genotype<R: Rng + ?Sized>(
    header: &MachineHeader,
    len: usize,
    rng: &mut R,
) -> Genotype {
    Genotype {
        header: header.clone(),
        program: (0..len).map(|_| random_gene(header, rng)).collect(),
    }
}

fn other<T: Copy + PartialEq, R: Rng + ?Sized>(all: &[T], cur: T, rng: &mut R) -> T {
    let rest: Vec<T> = all.iter().copied().filter(|&x| x != cur).collect();
    *rest.choose(rng).unwrap()
}

fn other_state<R: Rng + ?Sized>(n: u32, cur: StateId, rng: &mut R) -> StateId {
    let v = rng.gen_range(0..n - 1);
    StateId(if v >= cur.0 { v + 1 } else { v })
}

/// Resamples one field of one gene to a different value. Returns `false`
/// (leaving `g` unchanged) when the program is empty.
pub fn mutate_point<R: Rng + ?Sized>(g: &mut Genotype, rng: &mut R) -> bool {
    if g.program.is_empty() {
        return false;
    }
    let n = g.header.num_states;
    let k = g.header.num_tapes();
    let i = rng.gen_range(0..g.program.len());
    let gene = &mut g.program[i];
    // States are only mutable when there is another value to take.
    let state_fields = if n > 1 { 2 } else { 0 };
    let field = rng.gen_range(0..state_fields + 3 * k + 2);
    match field {
        f if f < state_fields => {
            if f == 0 {
                gene.from = other_state(n, gene.from, rng);
            } else {
                gene.to = other_state(n, gene.to, rng);
            }
        }
        f if f < state_fields + k => {
            let t = f - state_fields;
            gene.read[t] = other(&Symbol::ALL, gene.read[t], rng);
        }
        f if f < state_fields + 2 * k => {
            let t = f - state_fields - k;
            gene.write[t] = other(&Symbol::ALL, gene.write[t], rng);
        }
        f if f < state_fields + 3 * k => {
            let t = f - state_fields - 2 * k;
            gene.moves[t] = other(&Move::ALL, gene.moves[t], rng);
        }
        f if f == state_fields + 3 * k => gene.dw = -gene.dw,
        _ => gene.db = -gene.db,
    }
    true
}

/// Inserts a random gene at a random position unless at the maximum length.
pub fn insert_gene<R: Rng + ?Sized>(g: &mut Genotype, bounds: LengthBounds, rng: &mut R) -> bool {
    if g.program.len() >= bounds.max {
        return false;
    }
    let at = rng.gen_range(0..=g.program.len());
    let gene = random_gene(&g.header, rng);
    g.program.insert(at, gene);
    true
}

/// Deletes a random gene unless at the minimum length.
pub fn delete_gene<R: Rng + ?Sized>(g: &mut Genotype, bounds: LengthBounds, rng: &mut R) -> bool {
    if g.program.len() <= bounds.min || g.program.is_empty() {
        return false;
    }
    let at = rng.gen_range(0..g.program.len());
    g.program.remove(at);
    true
}

/// One-point crossover with an independent cut in each parent. Cut pairs
/// whose children would leave `bounds` are redrawn; after a few failed draws
/// the parents are returned unchanged.
pub fn crossover<R: Rng + ?Sized>(
    a: &Genotype,
    b: &Genotype,
    bounds: LengthBounds,
    rng: &mut R,
) -> (Genotype, Genotype) {
    let (la, lb) = (a.program.len(), b.program.len());
    for _ in 0..16 {
        let ca = rng.gen_range(0..=la);
        let cb = rng.gen_range(0..=lb);
        let (l1, l2) = (ca + (lb - cb), cb + (la - ca));
        if !bounds.contains(l1) || !bounds.contains(l2) {
            continue;
        }
        let mut c1 = a.program[..ca].to_vec();
        c1.extend_from_slice(&b.program[cb..]);
        let mut c2 = b.program[..cb].to_vec();
        c2.extend_from_slice(&a.program[ca..]);
        return (
            Genotype {
                header: a.header.clone(),
                program: c1,
            },
            Genotype {
                header: a.header.clone(),
                program: c2,
            },
        );
    }
    (a.clone(), b.clone())
}

/// Reverses a random contiguous segment of at least two genes.
pub fn invert<R: Rng + ?Sized>(g: &mut Genotype, rng: &mut R) -> bool {
    let len = g.program.len();
    if len < 2 {
        return false;
    }
    let i = rng.gen_range(0..len - 1);
    let j = rng.gen_range(i + 2..=len);
    g.program[i..j].reverse();
    true
}
