//! Steady-state genetic algorithm.
//!
//! Each iteration draws a tournament of distinct individuals, removes the
//! worst of them (ties broken uniformly at random), crosses the two best
//! remaining — for the default tournament of three, simply the other two in
//! drawn order — and inserts the child, optionally mutated, in the freed
//! slot. The population size is therefore constant.

use super::state::RunState;
use super::{GaConfig, GaMutationOp, RunRecord, SearchConfig};
use crate::error::Result;
use crate::fitness::FitnessValue;
use crate::ops::{apply_mutation, crossover, mixing_mutation, MutationDescriptor, MutationKind};
use crate::rng::RandomSource;
use crate::table::TruthTable;
use rand::Rng;
use std::time::Instant;

/// `k` distinct indices from `0..len` via a partial Fisher–Yates pass,
/// returned in drawn order.
fn sample_distinct(rng: &mut RandomSource, len: usize, k: usize, scratch: &mut Vec<usize>) {
    scratch.clear();
    scratch.extend(0..len);
    for t in 0..k {
        let r = rng.random_range(t..len);
        scratch.swap(t, r);
    }
    scratch.truncate(k);
}

fn mutate(child: &TruthTable, op: GaMutationOp, rng: &mut RandomSource) -> TruthTable {
    let len = child.len();
    match op {
        GaMutationOp::BitFlip => {
            let i = rng.random_range(0..len);
            let descriptor = MutationDescriptor::single(MutationKind::BitFlip, i)
                .expect("flip takes a single index");
            apply_mutation(child, &descriptor)
                .expect("index in range")
                .changed()
                .expect("a flip always changes the table")
        }
        GaMutationOp::TwoBitFlip => {
            let first = rng.random_range(0..len);
            let second = {
                let s = rng.random_range(0..len - 1);
                if s >= first {
                    s + 1
                } else {
                    s
                }
            };
            let descriptor = MutationDescriptor::pair(
                MutationKind::TwoBitFlip,
                first.min(second),
                first.max(second),
            )
            .expect("distinct ordered pair");
            apply_mutation(child, &descriptor)
                .expect("indices in range")
                .changed()
                .expect("a two-bit flip always changes the table")
        }
        GaMutationOp::Mixing => mixing_mutation(child, rng),
    }
}

/// Runs the steady-state genetic algorithm.
pub fn ga_run(cfg: &GaConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let mut rng = RandomSource::new(cfg.seed);
    let mut state = RunState::new(cfg.fitness, cfg.budget);

    let mut population: Vec<(TruthTable, FitnessValue)> =
        Vec::with_capacity(cfg.population_size);
    for _ in 0..cfg.population_size {
        let individual = TruthTable::random(cfg.n, &mut rng)?;
        let Some(fitness) = state.evaluate(&individual) else {
            break;
        };
        population.push((individual, fitness));
    }

    let mut drawn = Vec::with_capacity(population.len());
    let mut tied = Vec::with_capacity(cfg.tournament_size);
    while !state.exhausted() && population.len() >= cfg.tournament_size {
        sample_distinct(&mut rng, population.len(), cfg.tournament_size, &mut drawn);

        // Worst of the tournament, ties broken uniformly.
        let worst_fitness = drawn.iter().map(|&i| population[i].1).min().unwrap();
        tied.clear();
        tied.extend(drawn.iter().copied().filter(|&i| population[i].1 == worst_fitness));
        let worst = if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.random_range(0..tied.len())]
        };

        // Parents: the two best of the remainder (for a tournament of
        // three, the other two), kept in drawn order.
        let mut parents: Vec<usize> = drawn.iter().copied().filter(|&i| i != worst).collect();
        parents.sort_by(|&a, &b| population[b].1.cmp(&population[a].1));
        parents.truncate(2);
        parents.sort_by_key(|&i| drawn.iter().position(|&d| d == i).unwrap());

        let child = crossover(
            &population[parents[0]].0,
            &population[parents[1]].0,
            cfg.crossover,
            &mut rng,
        )?;
        let child = if cfg.mutation_probability > 0.0
            && rng.random_bool(cfg.mutation_probability)
        {
            let op = cfg.mutation_ops[rng.random_range(0..cfg.mutation_ops.len())];
            mutate(&child, op, &mut rng)
        } else {
            child
        };

        let Some(fitness) = state.evaluate(&child) else {
            break;
        };
        population[worst] = (child, fitness);
    }

    Ok(state.finish("ga", SearchConfig::Ga(cfg.clone()), started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::Objective;
    use crate::ops::CrossoverKind;

    #[test]
    fn budget_equal_to_population_yields_initialization_only() {
        let mut cfg = GaConfig::new(4, CrossoverKind::UniformRandom, Objective::F1, 100, 21);
        cfg.population_size = 100;
        let record = ga_run(&cfg).unwrap();
        assert_eq!(record.evaluations, 100);
        // Best of 100 random 16-bit tables is whatever initialization found.
        assert!(record.trajectory.last().unwrap().evaluation <= 100);
    }

    #[test]
    fn runs_are_reproducible_and_trajectories_non_decreasing() {
        let cfg = GaConfig::new(5, CrossoverKind::SinglePointRandom, Objective::F2, 3_000, 4);
        let a = ga_run(&cfg).unwrap();
        let b = ga_run(&cfg).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.evaluations, 3_000);
        assert!(a
            .trajectory
            .windows(2)
            .all(|w| w[0].fitness < w[1].fitness));
    }

    #[test]
    fn finds_the_n4_optimum_with_a_modest_budget() {
        let cfg = GaConfig::new(4, CrossoverKind::UniformRandom, Objective::F1, 5_000, 11);
        let record = ga_run(&cfg).unwrap();
        assert_eq!(record.best_nonlinearity(), 6);
    }

    #[test]
    fn sampling_draws_distinct_indices() {
        let mut rng = RandomSource::new(1);
        let mut scratch = Vec::new();
        for _ in 0..200 {
            sample_distinct(&mut rng, 10, 3, &mut scratch);
            assert_eq!(scratch.len(), 3);
            assert!(scratch[0] != scratch[1] && scratch[1] != scratch[2] && scratch[0] != scratch[2]);
            assert!(scratch.iter().all(|&i| i < 10));
        }
    }

    #[test]
    fn mutation_probability_zero_never_mutates_crossover_output() {
        // With single-point crossover of two equal parents the child must
        // equal them unless mutation fires.
        let mut cfg = GaConfig::new(3, CrossoverKind::SinglePointRandom, Objective::F1, 300, 9);
        cfg.mutation_probability = 0.0;
        cfg.mutation_ops.clear();
        assert!(cfg.validate().is_ok());
        let record = ga_run(&cfg).unwrap();
        assert_eq!(record.evaluations, 300);
    }
}
