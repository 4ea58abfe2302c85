//! Property tests for the builder, the evaluator, the machine model and the
//! genetic operators.

mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptm::evolve::operators::{
    crossover, delete_gene, insert_gene, invert, mutate_point, random_genotype,
};
use ptm::evolve::{fitness, LengthBounds, Task};
use ptm::machine::{decode_index, make_output_config, row_major_coords, IndexSide, TapeState};
use ptm::{
    build, build_traced, evaluate, BitArray, Configuration, Flavor, Instruction, Limits,
    MachineSpec, Network, OnExceed, StateId, Symbol, TapeSpec,
};

fn machine(seed: u64) -> MachineSpec {
    common::random_machine(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn random_input(net: &Network, seed: u64) -> BitArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = net.input_dims.iter().product();
    BitArray::from_bits(&net.input_dims, (0..n).map(|_| rng.gen()).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn builds_are_acyclic(seed in any::<u64>()) {
        let net = build(&machine(seed), &Limits::nodes(2_000, OnExceed::Stop)).unwrap();
        prop_assert!(net.is_acyclic());
    }

    #[test]
    fn weights_match_instruction_sums(seed in any::<u64>()) {
        let m = machine(seed);
        let (net, trace) = build_traced(&m, &Limits::nodes(2_000, OnExceed::Stop)).unwrap();
        common::recompute(&m, &net, &trace);
    }

    #[test]
    fn builds_are_byte_deterministic(seed in any::<u64>()) {
        let m = machine(seed);
        let a = build(&m, &Limits::unlimited()).unwrap().to_structured();
        let b = build(&m, &Limits::unlimited()).unwrap().to_structured();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn db_flip_is_local(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let m = machine(seed);
        prop_assume!(m.header.flavor == Flavor::Ptm && !m.program.is_empty());
        common::flip_locality(&m, pick.index(m.program.len()));
    }

    #[test]
    fn configurations_are_memoised(seed in any::<u64>()) {
        let (_, trace) = build_traced(&machine(seed), &Limits::unlimited()).unwrap();
        let mut seen = HashSet::new();
        for c in trace.configs.iter().flatten() {
            prop_assert!(seen.insert(c.canonical_key()));
        }
    }

    #[test]
    fn node_limit_builds_a_prefix(seed in any::<u64>(), cap in 1usize..40) {
        let m = machine(seed);
        let (full, full_trace) = build_traced(&m, &Limits::unlimited()).unwrap();
        let (part, part_trace) = build_traced(&m, &Limits::nodes(cap, OnExceed::Stop)).unwrap();
        prop_assert!(part.nodes.len() <= cap.max(1));
        prop_assert!(part.nodes.len() <= full.nodes.len());
        let prefix = &full_trace.configs[..part.nodes.len()];
        // Interior nodes are recorded on expansion, so compare leaves and
        // expanded nodes only where both builds recorded a configuration.
        for (a, b) in part_trace.configs.iter().zip(prefix) {
            if let (Some(a), Some(b)) = (a, b) {
                prop_assert_eq!(a, b);
            }
        }
        let bigger = build(&m, &Limits::nodes(cap + 5, OnExceed::Stop)).unwrap();
        prop_assert!(bigger.nodes.len() >= part.nodes.len());
        if part.report.limit_hit.is_none() {
            prop_assert_eq!(part.to_structured(), full.to_structured());
        }
    }

    #[test]
    fn fatal_limit_errors_exactly_when_stop_would_truncate(seed in any::<u64>(), cap in 1usize..40) {
        let m = machine(seed);
        let stop = build(&m, &Limits::nodes(cap, OnExceed::Stop)).unwrap();
        let fail = build(&m, &Limits::nodes(cap, OnExceed::Fail));
        prop_assert_eq!(stop.report.limit_hit.is_some(), fail.is_err());
    }

    #[test]
    fn evaluation_is_pure(seed in any::<u64>(), input_seed in any::<u64>()) {
        let net = build(&machine(seed), &Limits::nodes(2_000, OnExceed::Stop)).unwrap();
        let input = random_input(&net, input_seed);
        let a = evaluate(&net, &input).unwrap();
        let b = evaluate(&net, &input).unwrap();
        prop_assert_eq!(a.dims(), net.output_dims.as_slice());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn structured_export_round_trips(seed in any::<u64>(), input_seed in any::<u64>()) {
        let net = build(&machine(seed), &Limits::nodes(2_000, OnExceed::Stop)).unwrap();
        let back = Network::from_structured(&net.to_structured()).unwrap();
        prop_assert_eq!(back.to_structured(), net.to_structured());
        let input = random_input(&net, input_seed);
        prop_assert_eq!(evaluate(&back, &input).unwrap(), evaluate(&net, &input).unwrap());
    }

    #[test]
    fn machine_text_round_trips(seed in any::<u64>()) {
        let m = machine(seed);
        let text = ptm::format::write_machine(&m, None);
        let back = ptm::format::parse_machine(&text).unwrap();
        prop_assert_eq!(back.header, m.header.clone());
        prop_assert_eq!(back.program.len(), m.program.len());
        if m.header.flavor == Flavor::Ptm {
            prop_assert_eq!(back.program, m.program);
        }
    }

    #[test]
    fn canonical_key_is_injective(a in config_strategy(), b in config_strategy()) {
        prop_assert_eq!(a.canonical_key() == b.canonical_key(), a == b);
    }

    #[test]
    fn output_coordinates_round_trip(d0 in 1u64..9, d1 in 1u64..5, work in 1usize..3) {
        let header = ptm::MachineHeader::ptm(2, vec![
            TapeSpec::output_index(d0).unwrap(),
            TapeSpec::work(work).unwrap(),
            TapeSpec::output_index(d1).unwrap(),
        ]).unwrap();
        for coords in row_major_coords(&header.output_dims()) {
            let c = make_output_config(&header, &coords).unwrap();
            prop_assert_eq!(c.state, StateId::OUTPUT);
            prop_assert_eq!(decode_index(&header.tapes, &c, IndexSide::Output), coords);
        }
        prop_assert!(make_output_config(&header, &[d0, 0]).is_err());
    }
}

/// Configurations of one fixed shape: two tapes of 2 and 3 cells.
fn config_strategy() -> impl Strategy<Value = Configuration> {
    let tape = |cells: usize| {
        (prop::collection::vec(0u8..2, cells), 0..=cells).prop_map(move |(bits, head)| {
            let mut t = TapeState::zeroed(cells);
            for (i, b) in bits.into_iter().enumerate() {
                t.cells[i + 1] = Symbol::from_bit(b == 1);
            }
            t.head = head;
            t
        })
    };
    (0u32..4, tape(2), tape(3)).prop_map(|(s, a, b)| Configuration {
        state: StateId(s),
        tapes: vec![a, b],
    })
}

fn genes_valid(g: &MachineSpec) -> bool {
    g.program
        .iter()
        .all(|i| g.header.check_instruction(i).is_ok())
}

fn fields(i: &Instruction) -> Vec<String> {
    let mut f = vec![i.from.to_string(), i.to.to_string()];
    f.extend(i.read.iter().map(|s| s.to_string()));
    f.extend(i.write.iter().map(|s| s.to_string()));
    f.extend(i.moves.iter().map(|m| m.as_char().to_string()));
    f.push(i.dw.to_string());
    f.push(i.db.to_string());
    f
}

fn sorted(genes: &[Instruction]) -> Vec<Vec<String>> {
    let mut v: Vec<_> = genes.iter().map(fields).collect();
    v.sort();
    v
}

#[test]
fn operator_invariants_over_many_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let header = Task::Exists(3).default_header(1, 2, 4).unwrap();
    let bounds = LengthBounds { min: 1, max: 12 };
    for _ in 0..1_500 {
        let len = rng.gen_range(1..=12);
        let g = random_genotype(&header, len, &mut rng);

        let mut m = g.clone();
        assert!(mutate_point(&mut m, &mut rng));
        assert!(genes_valid(&m));
        let changed: usize = g
            .program
            .iter()
            .zip(&m.program)
            .map(|(a, b)| {
                fields(a)
                    .iter()
                    .zip(fields(b))
                    .filter(|(x, y)| **x != *y)
                    .count()
            })
            .sum();
        assert_eq!(changed, 1);

        let mut v = g.clone();
        invert(&mut v, &mut rng);
        assert_eq!(sorted(&v.program), sorted(&g.program));

        let mut ins = g.clone();
        let grew = insert_gene(&mut ins, bounds, &mut rng);
        assert_eq!(ins.program.len(), g.program.len() + usize::from(grew));
        assert!(bounds.contains(ins.program.len()) && genes_valid(&ins));

        let mut del = g.clone();
        let shrank = delete_gene(&mut del, bounds, &mut rng);
        assert_eq!(del.program.len() + usize::from(shrank), g.program.len());
        assert!(bounds.contains(del.program.len()));

        let other = random_genotype(&header, rng.gen_range(1..=12), &mut rng);
        let (c1, c2) = crossover(&g, &other, bounds, &mut rng);
        assert!(bounds.contains(c1.program.len()) && bounds.contains(c2.program.len()));
        let mut parents = g.program.clone();
        parents.extend(other.program.iter().cloned());
        let mut children = c1.program.clone();
        children.extend(c2.program.iter().cloned());
        assert_eq!(sorted(&children), sorted(&parents));
    }
}

#[test]
fn fitness_stays_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let task = Task::Exists(3);
    let cases = task.cases();
    let header = task.default_header(1, 2, 4).unwrap();
    let limits = Limits::nodes(500, OnExceed::Fail);
    for _ in 0..300 {
        let g = random_genotype(&header, rng.gen_range(0..16), &mut rng);
        let f = fitness(&g, &cases, &limits);
        assert!((0.0..=1.0).contains(&f), "{f}");
    }
}

#[test]
fn empty_genotype_scores_one_in_sixteen() {
    let task = Task::Exists(4);
    let g = random_genotype(
        &task.default_header(0, 1, 2).unwrap(),
        0,
        &mut ChaCha8Rng::seed_from_u64(0),
    );
    assert_eq!(fitness(&g, &task.cases(), &Limits::unlimited()), 1.0 / 16.0);
}

#[test]
fn fatal_limit_scores_zero() {
    let hl = ptm::lopro::compile(
        ptm::lopro::programs::EXISTS,
        &ptm::lopro::ElabOptions::default().with_param("n", 4),
    )
    .unwrap();
    let g = ptm::lopro::lower(&hl).unwrap().machine;
    let cases = Task::Exists(4).cases();
    assert_eq!(fitness(&g, &cases, &Limits::unlimited()), 1.0);
    assert_eq!(fitness(&g, &cases, &Limits::nodes(3, OnExceed::Fail)), 0.0);
}

#[test]
fn elitism_keeps_best_fitness_non_decreasing() {
    let task = Task::Exists(3);
    let header = task.default_header(1, 1, 3).unwrap();
    let config = ptm::evolve::GaConfig {
        population: 30,
        generations: 15,
        seed: 9,
        ..Default::default()
    };
    let r = ptm::evolve::run(&header, &task.cases(), &[], &config).unwrap();
    for w in r.history.windows(2) {
        assert!(w[1].best >= w[0].best, "{:?}", r.history);
    }
}
