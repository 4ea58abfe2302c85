//! Neuroevolution over machine programs.
//!
//! A genotype is a whole machine: the header fixes the tapes and state count,
//! the gene list is the program. Fitness is measured on the network the
//! genotype builds.

pub mod ga;
pub mod operators;
pub mod tasks;

pub use ga::{genotype_hash, history_csv, run, GaConfig, GaResult, GenerationRecord};
pub use operators::LengthBounds;
pub use tasks::{fitness, warshall, Task};

/// Genes are the program of a [`MachineSpec`](crate::machine::MachineSpec).
pub type Genotype = crate::machine::MachineSpec;
