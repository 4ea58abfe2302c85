//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use ptm::build::BuildTrace;
use ptm::evolve::operators::random_gene;
use ptm::{
    build, build_traced, Flavor, GateType, Limits, MachineHeader, MachineSpec, Network, OnExceed,
    TapeSpec,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// A random machine with 2 to 4 states, an input-index tape of dim 1..=4,
/// sometimes an output-index tape of dim 1..=2, at most one work tape of at
/// most 2 cells, and up to 10 genes. One in five machines is alternating.
pub fn random_machine<R: Rng>(rng: &mut R) -> MachineSpec {
    let mut tapes = vec![TapeSpec::input_index(rng.gen_range(1..=4)).unwrap()];
    if rng.gen_bool(0.3) {
        tapes.push(TapeSpec::output_index(rng.gen_range(1..=2)).unwrap());
    }
    if rng.gen_bool(0.5) {
        tapes.push(TapeSpec::work(rng.gen_range(1..=2)).unwrap());
    }
    let states = rng.gen_range(2..=4u32);
    let header = if rng.gen_bool(0.2) {
        let gates = (0..states)
            .map(|_| *GateType::ALL.choose(rng).unwrap())
            .collect();
        MachineHeader::atm(gates, tapes).unwrap()
    } else {
        MachineHeader::ptm(states, tapes).unwrap()
    };
    let len = rng.gen_range(0..=10);
    let program = (0..len).map(|_| random_gene(&header, rng)).collect();
    MachineSpec::new(header, program).unwrap()
}

/// Bias and link weights recomputed from the instructions each node kept.
pub fn recompute(m: &MachineSpec, net: &Network, trace: &BuildTrace) {
    let atm = m.header.flavor == Flavor::Atm;
    for node in &net.nodes {
        let kept = &trace.kept[node.id];
        let bias: i64 = kept
            .iter()
            .map(|&(o, _)| if atm { 0 } else { i64::from(m.program[o].db) })
            .sum();
        assert_eq!(node.bias, bias, "bias of node {}", node.id);
        let mut weights: BTreeMap<usize, i64> = BTreeMap::new();
        for &(o, t) in kept {
            *weights.entry(t).or_default() += if atm { 1 } else { i64::from(m.program[o].dw) };
        }
        let actual: BTreeMap<usize, i64> = net
            .links_from(node.id)
            .iter()
            .map(|l| (l.to, l.weight))
            .collect();
        assert_eq!(actual, weights, "links of node {}", node.id);
    }
}

/// Flipping one gene's `db` keeps every link and moves the bias of exactly
/// the nodes that kept that gene, by 2 in the direction of the new sign.
pub fn flip_locality(m: &MachineSpec, gene: usize) {
    let limits = Limits::nodes(2_000, OnExceed::Stop);
    let (net, trace) = build_traced(m, &limits).unwrap();
    let mut flipped = m.clone();
    flipped.program[gene].db = -flipped.program[gene].db;
    let other = build(&flipped, &limits).unwrap();
    assert_eq!(net.links, other.links);
    assert_eq!(net.nodes.len(), other.nodes.len());
    let step = 2 * i64::from(flipped.program[gene].db);
    for (a, b) in net.nodes.iter().zip(&other.nodes) {
        let uses = trace.kept[a.id].iter().filter(|&&(o, _)| o == gene).count() as i64;
        assert!(uses <= 1);
        assert_eq!(b.bias - a.bias, uses * step, "node {}", a.id);
    }
}
