//! Perceptron Turing machines.
//!
//! A machine program is read as a *developmental* description of a neural
//! network: every configuration reachable from an output configuration
//! becomes a node, every instruction application becomes a link, and the
//! per-instruction differential weights and biases are summed into the link
//! weights and node biases. The same machinery builds Boolean circuits from
//! alternating machines.
//!
//! The crate is organised along the life cycle of a network:
//!
//! - [`machine`] and [`format`]: machines, instructions, configurations, and
//!   their text format.
//! - [`build`]: the build phase (depth-first, memoised, cycle-free).
//! - [`exec`]: the execution phase on bit arrays.
//! - [`evolve`]: genetic operators and a generational GA over programs.
//! - [`lopro`]: a small logic-programming language that elaborates to
//!   high-level instructions and lowers to raw programs.
//!
//! ```
//! use ptm::{build, exec, format, Limits};
//!
//! let machine = format::parse_machine("\
//! ptm v1
//! states 2
//! tape 0 input-index dim 1
//! instr 0 # -> 1 # N +1 +1
//! instr 0 # -> 1 # N +1 -1
//! ").unwrap();
//! let net = build::build(&machine, &Limits::unlimited()).unwrap();
//! let table = exec::truth_table(&net).unwrap();
//! assert_eq!(table[1].1.to_row_major_string(), "1");
//! ```

pub mod build;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod format;
pub mod lopro;
pub mod machine;
pub mod network;

pub use build::{build, build_traced, Limits, OnExceed};
pub use error::{Error, Result};
pub use exec::{evaluate, truth_table, BitArray};
pub use machine::{
    Configuration, Flavor, GateType, Instruction, MachineHeader, MachineSpec, Move, StateId,
    Symbol, TapeRole, TapeSpec,
};
pub use network::{Link, Network, Node, NodeId, NodeKind};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/machines.md")]
    mod machines {}
    #[doc = include_str!("../../../book/src/building.md")]
    mod building {}
    #[doc = include_str!("../../../book/src/perceptrons.md")]
    mod perceptrons {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/lopro.md")]
    mod lopro {}
}
