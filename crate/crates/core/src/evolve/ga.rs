//! A generational genetic algorithm over PTM programs.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::build::{Limits, OnExceed};
use crate::error::{Error, Result};
use crate::exec::BitArray;
use crate::format::write_machine;
use crate::machine::MachineHeader;

use super::operators::{
    crossover, delete_gene, insert_gene, invert, mutate_point, random_genotype, LengthBounds,
};
use super::tasks::fitness;
use super::Genotype;

#[derive(Clone, Debug)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub elitism: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub insert_rate: f64,
    pub delete_rate: f64,
    pub inversion_rate: f64,
    pub initial_len: usize,
    pub bounds: LengthBounds,
    /// Build limits per fitness evaluation. Exceeding them scores 0.
    pub limits: Limits,
    pub seed: u64,
    /// Worker threads for fitness evaluation; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 100,
            generations: 50,
            tournament: 3,
            elitism: 1,
            crossover_rate: 0.7,
            mutation_rate: 0.8,
            insert_rate: 0.1,
            delete_rate: 0.1,
            inversion_rate: 0.05,
            initial_len: 8,
            bounds: LengthBounds { min: 1, max: 64 },
            limits: Limits::nodes(5_000, OnExceed::Fail),
            seed: 0,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_hash: String,
}

#[derive(Clone, Debug)]
pub struct GaResult {
    pub history: Vec<GenerationRecord>,
    pub best: Genotype,
    pub best_fitness: f64,
}

/// First 16 hex digits of the SHA-256 of the genotype's text form.
pub fn genotype_hash(g: &Genotype) -> String {
    let digest = Sha256::digest(write_machine(g, None).as_bytes());
    digest[..8].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// CSV with one row per generation.
pub fn history_csv(history: &[GenerationRecord]) -> String {
    let mut out = String::from("generation,best,mean,best_hash\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{}",
            r.generation, r.best, r.mean, r.best_hash
        );
    }
    out
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// The seed for one individual slot of one generation.
pub fn derive_seed(master: u64, generation: u64, slot: u64) -> u64 {
    splitmix(splitmix(splitmix(master) ^ generation) ^ slot)
}

fn rng_for(master: u64, generation: usize, slot: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, generation as u64, slot as u64))
}

/// Runs the GA. With `seeds`, the first individuals are exact copies of the
/// seeds and the rest are mutated copies; otherwise the population is random
/// over `header`.
pub fn run(
    header: &MachineHeader,
    cases: &[(BitArray, BitArray)],
    seeds: &[Genotype],
    config: &GaConfig,
) -> Result<GaResult> {
    if config.population == 0 || config.tournament == 0 {
        return Err(Error::Argument(
            "population and tournament size must be positive".into(),
        ));
    }
    if config.elitism > config.population {
        return Err(Error::Argument(format!(
            "elitism {} exceeds population {}",
            config.elitism, config.population
        )));
    }
    let mut bounds = config.bounds;
    for s in seeds {
        bounds.max = bounds.max.max(s.program.len());
        bounds.min = bounds.min.min(s.program.len());
    }
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Argument(format!("cannot start {n} workers: {e}")))?
            .install(|| evolve(header, cases, seeds, config, bounds)),
        None => evolve(header, cases, seeds, config, bounds),
    }
}

fn evolve(
    header: &MachineHeader,
    cases: &[(BitArray, BitArray)],
    seeds: &[Genotype],
    config: &GaConfig,
    bounds: LengthBounds,
) -> Result<GaResult> {
    let mut population: Vec<Genotype> = (0..config.population)
        .into_par_iter()
        .map(|slot| {
            let mut rng = rng_for(config.seed, 0, slot);
            if seeds.is_empty() {
                random_genotype(header, config.initial_len, &mut rng)
            } else if slot < seeds.len() {
                seeds[slot].clone()
            } else {
                let mut g = seeds[slot % seeds.len()].clone();
                vary(&mut g, config, bounds, &mut rng);
                g
            }
        })
        .collect();

    let mut history = Vec::with_capacity(config.generations);
    let mut best = (population[0].clone(), f64::MIN);
    for generation in 0..config.generations {
        let scores: Vec<f64> = population
            .par_iter()
            .map(|g| fitness(g, cases, &config.limits))
            .collect();
        let order = ranking(&scores);
        let top = order[0];
        if scores[top] > best.1 {
            best = (population[top].clone(), scores[top]);
        }
        history.push(GenerationRecord {
            generation,
            best: scores[top],
            mean: scores.iter().sum::<f64>() / scores.len() as f64,
            best_hash: genotype_hash(&population[top]),
        });
        if generation + 1 == config.generations {
            break;
        }
        let next_gen = generation + 1;
        let elites: Vec<Genotype> = order[..config.elitism]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        let children: Vec<Genotype> = (config.elitism..config.population)
            .into_par_iter()
            .map(|slot| {
                let mut rng = rng_for(config.seed, next_gen, slot);
                let a = tournament(&scores, config.tournament, &mut rng);
                let mut child = if rng.gen_bool(config.crossover_rate) {
                    let b = tournament(&scores, config.tournament, &mut rng);
                    let (c1, c2) = crossover(&population[a], &population[b], bounds, &mut rng);
                    if rng.gen_bool(0.5) {
                        c1
                    } else {
                        c2
                    }
                } else {
                    population[a].clone()
                };
                vary(&mut child, config, bounds, &mut rng);
                child
            })
            .collect();
        population = elites;
        population.extend(children);
    }
    Ok(GaResult {
        history,
        best: best.0,
        best_fitness: best.1,
    })
}

/// Individuals by descending fitness, ties by position.
fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

fn tournament<R: Rng>(scores: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.gen_range(0..scores.len());
    for _ in 1..size {
        let c = rng.gen_range(0..scores.len());
        if scores[c] > scores[best] || (scores[c] == scores[best] && c < best) {
            best = c;
        }
    }
    best
}

fn vary<R: Rng>(g: &mut Genotype, config: &GaConfig, bounds: LengthBounds, rng: &mut R) {
    if rng.gen_bool(config.mutation_rate) {
        mutate_point(g, rng);
    }
    if rng.gen_bool(config.insert_rate) {
        insert_gene(g, bounds, rng);
    }
    if rng.gen_bool(config.delete_rate) {
        delete_gene(g, bounds, rng);
    }
    if rng.gen_bool(config.inversion_rate) {
        invert(g, rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_is_stable() {
        assert_eq!(ranking(&[0.5, 1.0, 0.5, 1.0]), vec![1, 3, 0, 2]);
    }

    #[test]
    fn seeds_differ_by_slot_and_generation() {
        let a = derive_seed(1, 0, 0);
        assert_ne!(a, derive_seed(1, 0, 1));
        assert_ne!(a, derive_seed(1, 1, 0));
        assert_ne!(a, derive_seed(2, 0, 0));
    }
}
