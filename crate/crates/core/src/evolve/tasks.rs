//! Benchmark tasks with exact oracles, and the fitness function.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::build::{build, Limits};
use crate::error::{Error, Result};
use crate::exec::{BitArray, Evaluator};
use crate::machine::{MachineHeader, TapeRole, TapeSpec};

use super::Genotype;

/// Seed and size of the fixed input sample used when a task has more than
/// 12 input bits (transitive closure on four vertices, for example).
pub const SAMPLE_SEED: u64 = 0x7c_2024;
pub const SAMPLE_SIZE: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    /// OR of `n` bits.
    Exists(usize),
    /// AND of `n` bits.
    All(usize),
    /// XOR of `n` bits, `n <= 4`.
    Parity(usize),
    /// Closure of an `n` x `n` adjacency matrix, `n <= 4`.
    TransitiveClosure(usize),
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, n) = match *self {
            Task::Exists(n) => ("exists", n),
            Task::All(n) => ("all", n),
            Task::Parity(n) => ("parity", n),
            Task::TransitiveClosure(n) => ("transitive-closure", n),
        };
        write!(f, "{name}(n={n})")
    }
}

impl Task {
    pub fn from_name(name: &str, n: usize) -> Result<Task> {
        let task = match name {
            "exists" | "or" => Task::Exists(n),
            "all" | "and" => Task::All(n),
            "parity" | "xor" => Task::Parity(n),
            "transitive-closure" | "tc" => Task::TransitiveClosure(n),
            other => {
                return Err(Error::Argument(format!(
                    "unknown task `{other}` (expected exists, all, parity or transitive-closure)"
                )))
            }
        };
        let max = match task {
            Task::Exists(_) | Task::All(_) => 20,
            Task::Parity(_) | Task::TransitiveClosure(_) => 4,
        };
        if n == 0 || n > max {
            return Err(Error::Argument(format!(
                "{name} needs 1 <= n <= {max}, got {n}"
            )));
        }
        Ok(task)
    }

    pub fn input_dims(&self) -> Vec<usize> {
        match *self {
            Task::Exists(n) | Task::All(n) | Task::Parity(n) => vec![n],
            Task::TransitiveClosure(n) => vec![n, n],
        }
    }

    pub fn output_dims(&self) -> Vec<usize> {
        match *self {
            Task::Exists(_) | Task::All(_) | Task::Parity(_) => vec![],
            Task::TransitiveClosure(n) => vec![n, n],
        }
    }

    pub fn oracle(&self, input: &BitArray) -> BitArray {
        let bits = input.bits();
        let one = |b: bool| BitArray::from_bits(&[], vec![b]).expect("scalar");
        match *self {
            Task::Exists(_) => one(bits.iter().any(|&b| b)),
            Task::All(_) => one(bits.iter().all(|&b| b)),
            Task::Parity(_) => one(bits.iter().filter(|&&b| b).count() % 2 == 1),
            Task::TransitiveClosure(n) => warshall(n, input),
        }
    }

    /// Training cases: exhaustive where feasible, otherwise a fixed sample.
    pub fn cases(&self) -> Vec<(BitArray, BitArray)> {
        let dims = self.input_dims();
        let bits: usize = dims.iter().product();
        let inputs: Vec<BitArray> = if bits <= 12 {
            (0..1u64 << bits)
                .map(|v| BitArray::from_index(&dims, v))
                .collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
            (0..SAMPLE_SIZE)
                .map(|_| {
                    let v: Vec<bool> = (0..bits).map(|_| rng.gen_bool(0.5)).collect();
                    BitArray::from_bits(&dims, v).expect("sized")
                })
                .collect()
        };
        inputs
            .into_iter()
            .map(|i| {
                let o = self.oracle(&i);
                (i, o)
            })
            .collect()
    }

    /// Index tapes for the task plus `work_tapes` work tapes of `work_cells`
    /// cells. Tasks with equal input and output dims share io-index tapes.
    pub fn default_header(
        &self,
        work_tapes: usize,
        work_cells: usize,
        states: u32,
    ) -> Result<MachineHeader> {
        let (ins, outs) = (self.input_dims(), self.output_dims());
        let mut tapes = Vec::new();
        if ins == outs {
            for &d in &ins {
                tapes.push(TapeSpec::index(TapeRole::IoIndex, d as u64)?);
            }
        } else {
            for &d in &ins {
                tapes.push(TapeSpec::index(TapeRole::InputIndex, d as u64)?);
            }
            for &d in &outs {
                tapes.push(TapeSpec::index(TapeRole::OutputIndex, d as u64)?);
            }
        }
        for _ in 0..work_tapes {
            tapes.push(TapeSpec::work(work_cells)?);
        }
        MachineHeader::ptm(states.max(2), tapes)
    }
}

/// Reflexive-free transitive closure: `out[i][j]` iff a path of length at
/// least one leads from `i` to `j`.
pub fn warshall(n: usize, adj: &BitArray) -> BitArray {
    let mut r: Vec<bool> = adj.bits().to_vec();
    for k in 0..n {
        for i in 0..n {
            if !r[i * n + k] {
                continue;
            }
            for j in 0..n {
                if r[k * n + j] {
                    r[i * n + j] = true;
                }
            }
        }
    }
    BitArray::from_bits(&[n, n], r).expect("n x n")
}

/// Fraction of output bits that match the oracle over `cases`. Genotypes
/// whose build fails, or whose network has the wrong shape, score 0.
pub fn fitness(g: &Genotype, cases: &[(BitArray, BitArray)], limits: &Limits) -> f64 {
    let Ok(net) = build(g, limits) else {
        return 0.0;
    };
    let Some((first_in, first_out)) = cases.first() else {
        return 0.0;
    };
    if net.input_dims != first_in.dims() || net.output_dims != first_out.dims() {
        return 0.0;
    }
    let mut eval = Evaluator::new(&net);
    let (mut hit, mut total) = (0usize, 0usize);
    for (input, want) in cases {
        let Ok(got) = eval.evaluate(input) else {
            return 0.0;
        };
        hit += got
            .bits()
            .iter()
            .zip(want.bits())
            .filter(|(a, b)| a == b)
            .count();
        total += want.len();
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warshall_chain() {
        // 0 -> 1 -> 2
        let adj = BitArray::from_row_major_str(&[3, 3], "010001000").unwrap();
        assert_eq!(warshall(3, &adj).to_row_major_string(), "011001000");
        // a 2-cycle reaches itself
        let adj = BitArray::from_row_major_str(&[2, 2], "0110").unwrap();
        assert_eq!(warshall(2, &adj).to_row_major_string(), "1111");
    }

    #[test]
    fn case_counts() {
        assert_eq!(Task::Exists(4).cases().len(), 16);
        assert_eq!(Task::TransitiveClosure(3).cases().len(), 512);
        assert_eq!(Task::TransitiveClosure(4).cases().len(), SAMPLE_SIZE);
        assert!(Task::from_name("parity", 5).is_err());
    }

    #[test]
    fn headers() {
        let h = Task::Exists(6).default_header(1, 2, 4).unwrap();
        assert_eq!(h.input_dims(), vec![6]);
        assert_eq!(h.output_dims(), Vec::<usize>::new());
        assert_eq!(h.num_tapes(), 2);
        let h = Task::TransitiveClosure(3).default_header(0, 1, 3).unwrap();
        assert_eq!(h.input_dims(), vec![3, 3]);
        assert_eq!(h.output_dims(), vec![3, 3]);
    }
}
