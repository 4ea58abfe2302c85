//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each, and
//! exits non-zero if any fails. Run with `cargo test -p ptm --test acceptance`.
//!
//! Oracles (OR, AND, reachability) are written out here rather than taken
//! from the library. Time budgets are wall-clock limits per criterion.

mod common;

use std::collections::VecDeque;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptm::evolve::{self, GaConfig, Task};
use ptm::format::{parse_machine, write_machine};
use ptm::lopro::{self, programs, ElabOptions};
use ptm::{build, build_traced, evaluate, truth_table, BitArray, Flavor, Limits, Network};

type Outcome = Result<String, String>;
type Oracle = fn(&[bool]) -> bool;
/// Name, check, time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn or_oracle(bits: &[bool]) -> bool {
    bits.iter().any(|&b| b)
}

fn and_oracle(bits: &[bool]) -> bool {
    bits.iter().all(|&b| b)
}

/// Paths of length at least one, by breadth-first search from each vertex.
fn reachability(n: usize, adj: &[bool]) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for s in 0..n {
        let mut queue: VecDeque<usize> = (0..n).filter(|&j| adj[s * n + j]).collect();
        while let Some(v) = queue.pop_front() {
            if out[s * n + v] {
                continue;
            }
            out[s * n + v] = true;
            queue.extend((0..n).filter(|&j| adj[v * n + j]));
        }
    }
    out
}

fn program_net(src: &str, n: i64) -> Network {
    let hl = lopro::compile(src, &ElabOptions::default().with_param("n", n)).unwrap();
    lopro::build_highlevel(&hl, &Limits::unlimited()).unwrap()
}

/// Checks a scalar program against `oracle` on every input; returns the
/// number of evaluations.
fn exhaustive(net: &Network, oracle: Oracle) -> Result<usize, String> {
    let table = truth_table(net).map_err(|e| e.to_string())?;
    for (input, out) in &table {
        ensure(out.bits() == [oracle(input.bits())], || {
            format!("input {} gave {}", input.to_bitset_string(), out)
        })?;
    }
    Ok(table.len())
}

/// Four PTM instructions from the output state: two links to input bit 0
/// and two to a helper state that writes a 1 and reads input bit 1.
fn gate_machine(dbs: [&str; 4]) -> String {
    format!(
        "ptm v1\nstates 3\ntape 0 input-index dim 2\n\
         instr 0 # -> 1 # N +1 {}\n\
         instr 0 # -> 1 # N +1 {}\n\
         instr 0 # -> 2 # R +1 {}\n\
         instr 0 # -> 2 # R +1 {}\n\
         instr 2 0 -> 1 1 L +1 +1\n\
         instr 2 0 -> 1 1 L +1 -1\n",
        dbs[0], dbs[1], dbs[2], dbs[3]
    )
}

fn c1_gates() -> Outcome {
    let cases: [(&str, [&str; 4], i64, Oracle); 2] = [
        ("and", ["-1", "-1", "-1", "+1"], -2, and_oracle),
        ("or", ["+1", "-1", "+1", "-1"], 0, or_oracle),
    ];
    let mut details = Vec::new();
    for (name, dbs, bias, oracle) in cases {
        let net = build(
            &parse_machine(&gate_machine(dbs)).unwrap(),
            &Limits::unlimited(),
        )
        .unwrap();
        let out = net.outputs[0].unwrap();
        let weights: Vec<i64> = net.links_from(out).iter().map(|l| l.weight).collect();
        ensure(net.nodes[out].bias == bias && weights == [2, 2], || {
            format!("{name}: bias {} weights {weights:?}", net.nodes[out].bias)
        })?;
        exhaustive(&net, oracle).map_err(|e| format!("{name}: {e}"))?;
        details.push(format!("{name} bias {bias} weights (2,2)"));
    }
    Ok(details.join(", "))
}

fn c2_exists() -> Outcome {
    let mut evals = 0;
    for n in 1..=6 {
        evals += exhaustive(&program_net(programs::EXISTS, n), or_oracle)
            .map_err(|e| format!("n={n}: {e}"))?;
    }
    ensure(evals == 126, || format!("{evals} evaluations"))?;
    let net = program_net(programs::EXISTS, 6);
    let input = BitArray::from_bitset_str(&[6], "001101").unwrap();
    let out = evaluate(&net, &input).unwrap().to_bitset_string();
    ensure(out == "1", || format!("scenario printed {out}"))?;
    Ok(format!("{evals} evaluations, \"001101\" -> {out}"))
}

fn c3_all() -> Outcome {
    let mut evals = 0;
    for n in 1..=6 {
        evals += exhaustive(&program_net(programs::ALL, n), and_oracle)
            .map_err(|e| format!("n={n}: {e}"))?;
    }
    Ok(format!("{evals} evaluations"))
}

fn c4_transitive_closure() -> Outcome {
    let check = |n: usize, net: &Network, adj: Vec<bool>| -> Result<(), String> {
        let want = reachability(n, &adj);
        let input = BitArray::from_bits(&[n, n], adj).unwrap();
        let got = evaluate(net, &input).unwrap();
        ensure(got.bits() == want.as_slice(), || {
            format!("n={n} graph {} gave {}", input, got)
        })
    };
    let net3 = program_net(programs::TRANSITIVE_CLOSURE, 3);
    for v in 0..512u64 {
        check(3, &net3, BitArray::from_index(&[3, 3], v).bits().to_vec())?;
    }
    let net4 = program_net(programs::TRANSITIVE_CLOSURE, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        check(4, &net4, (0..16).map(|_| rng.gen_bool(0.3)).collect())?;
    }
    Ok("512 graphs on 3 vertices, 200 seeded graphs on 4".into())
}

fn c5_scaling() -> Outcome {
    let mut evals = 0;
    for n in [4, 6, 16] {
        evals += exhaustive(&program_net(programs::EXISTS, n), or_oracle)
            .map_err(|e| format!("end={n}: {e}"))?;
    }
    Ok(format!("end 4, 6, 16 ({evals} evaluations)"))
}

fn c6_lowering() -> Outcome {
    let mut genes = Vec::new();
    for n in 1..=4 {
        let hl =
            lopro::compile(programs::EXISTS, &ElabOptions::default().with_param("n", n)).unwrap();
        let high =
            truth_table(&lopro::build_highlevel(&hl, &Limits::unlimited()).unwrap()).unwrap();
        let lowered = lopro::lower(&hl).map_err(|e| e.to_string())?;
        let text = write_machine(&lowered.machine, Some(&lowered.state_names));
        let machine = parse_machine(&text).map_err(|e| e.to_string())?;
        let low = truth_table(&build(&machine, &Limits::unlimited()).unwrap()).unwrap();
        ensure(low == high, || format!("n={n}: truth tables differ"))?;
        genes.push(machine.program.len().to_string());
    }
    Ok(format!("n=1..4 equal, genes {}", genes.join("/")))
}

fn c7_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let limits = Limits::nodes(2_000, ptm::OnExceed::Stop);
    let mut flips = 0;
    for i in 0..1_000 {
        let m = common::random_machine(&mut rng);
        let (net, trace) = build_traced(&m, &limits).unwrap();
        ensure(net.is_acyclic(), || format!("machine {i}: cycle"))?;
        common::recompute(&m, &net, &trace);
        let again = build(&m, &limits).unwrap();
        ensure(again.to_structured() == net.to_structured(), || {
            format!("machine {i}: nondeterministic build")
        })?;
        if m.header.flavor == Flavor::Ptm && !m.program.is_empty() {
            common::flip_locality(&m, rng.gen_range(0..m.program.len()));
            flips += 1;
        }
    }
    Ok(format!("1000 machines, {flips} db flips"))
}

fn seeded_exists_run(seed: u64) -> Result<evolve::GaResult, String> {
    let task = Task::Exists(4);
    let hl = lopro::compile(programs::EXISTS, &ElabOptions::default().with_param("n", 4)).unwrap();
    let genotype = lopro::lower(&hl).unwrap().machine;
    let config = GaConfig {
        population: 100,
        generations: 50,
        elitism: 1,
        seed,
        ..Default::default()
    };
    evolve::run(
        &genotype.header,
        &task.cases(),
        std::slice::from_ref(&genotype),
        &config,
    )
    .map_err(|e| e.to_string())
}

fn c8_seeded() -> Outcome {
    let a = seeded_exists_run(2024)?;
    ensure(a.history.len() == 50, || {
        format!("{} generations", a.history.len())
    })?;
    for r in &a.history {
        ensure(r.best == 1.0, || {
            format!("generation {} best {}", r.generation, r.best)
        })?;
    }
    let b = seeded_exists_run(2024)?;
    ensure(a.history == b.history, || "histories differ".into())?;
    Ok("best 1.0 in all 50 generations, histories identical".into())
}

/// Documented smoke seeds: 2-bit OR, 3 states, no work tape.
const SMOKE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn c9_smoke() -> Outcome {
    let task = Task::Exists(2);
    let header = task.default_header(0, 1, 3).unwrap();
    let cases = task.cases();
    let mut hits = Vec::new();
    for seed in SMOKE_SEEDS {
        let config = GaConfig {
            generations: 200,
            seed,
            ..Default::default()
        };
        let r = evolve::run(&header, &cases, &[], &config).map_err(|e| e.to_string())?;
        let first = r.history.iter().position(|h| h.best == 1.0);
        hits.push(match first {
            Some(g) => format!("seed {seed}: gen {g}"),
            None => format!("seed {seed}: best {:.3}", r.best_fitness),
        });
    }
    let solved = hits.iter().filter(|h| h.contains("gen")).count();
    ensure(solved >= 3, || {
        format!("{solved}/5 solved ({})", hits.join("; "))
    })?;
    Ok(format!("{solved}/5 solved ({})", hits.join("; ")))
}

/// Depths measured when the criterion was pinned.
const TC_DEPTHS: [(i64, usize); 3] = [(2, 15), (4, 24), (8, 35)];

fn c10_depth() -> Outcome {
    let mut depths = Vec::new();
    for (n, expected) in TC_DEPTHS {
        let d = program_net(programs::TRANSITIVE_CLOSURE, n).depth;
        ensure(d == expected, || {
            format!("depth({n}) = {d}, pinned {expected}")
        })?;
        depths.push(d);
    }
    let bound = 64 * depths[0] / 4;
    ensure(depths[2] < bound, || {
        format!("depth(8) = {} >= {bound}", depths[2])
    })?;
    Ok(format!(
        "depth(2)={} depth(4)={} depth(8)={} < {bound}",
        depths[0], depths[1], depths[2]
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 AND/OR construction", c1_gates, 1),
        ("2 Exists = OR", c2_exists, 5),
        ("3 All = AND", c3_all, 5),
        (
            "4 TransitiveClosure = reachability",
            c4_transitive_closure,
            60,
        ),
        ("5 Exists scaling", c5_scaling, 10),
        ("6 lowering equivalence", c6_lowering, 10),
        ("7 structural invariants", c7_invariants, 120),
        ("8 seeded evolution", c8_seeded, 120),
        ("9 evolution smoke", c9_smoke, 300),
        ("10 depth report", c10_depth, 60),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(o) => o,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(d) if took > Duration::from_secs(budget) => {
                Err(format!("{d}; over the {budget} s budget"))
            }
            o => o,
        };
        match outcome {
            Ok(d) => println!("criterion {name}: PASS ({d}) [{:.2} s]", took.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("criterion {name}: FAIL ({e}) [{:.2} s]", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
