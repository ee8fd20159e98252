//! Run bookkeeping shared by all algorithms: the evaluation budget, the
//! best-so-far record with its trajectory, and two candidate-evaluation
//! paths that agree exactly — a full butterfly transform, and an `O(2^n)`
//! spectral update for candidates that differ from a cached base by one or
//! two flipped table entries. Flipping entry `p` changes exactly one term
//! of every coefficient sum, adding `−2·(−1)^{f(p)}·(−1)^{a·p}` to `W(a)`,
//! so the candidate spectrum is exact integer arithmetic either way.

use super::{RunRecord, SearchConfig, TrajectoryPoint};
use crate::fitness::{FitnessValue, Objective};
use crate::table::TruthTable;
use crate::walsh::walsh_transform;
use std::time::Instant;

pub(super) struct RunState {
    objective: Objective,
    budget: u64,
    used: u64,
    best: Option<(FitnessValue, TruthTable)>,
    trajectory: Vec<TrajectoryPoint>,
}

impl RunState {
    pub fn new(objective: Objective, budget: u64) -> Self {
        Self {
            objective,
            budget,
            used: 0,
            best: None,
            trajectory: Vec::new(),
        }
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    fn record(&mut self, fitness: FitnessValue, table: &TruthTable) {
        let improved = match &self.best {
            None => true,
            Some((best, _)) => fitness > *best,
        };
        if improved {
            self.best = Some((fitness, table.clone()));
            self.trajectory.push(TrajectoryPoint {
                evaluation: self.used,
                fitness,
            });
        }
    }

    /// Spends one evaluation on a full-transform fitness computation;
    /// `None` once the budget is exhausted.
    pub fn evaluate(&mut self, table: &TruthTable) -> Option<FitnessValue> {
        self.evaluate_full(table).map(|(fitness, _)| fitness)
    }

    /// As [`RunState::evaluate`], but also hands back the spectrum
    /// coefficients for callers that cache them.
    pub fn evaluate_full(&mut self, table: &TruthTable) -> Option<(FitnessValue, Vec<i32>)> {
        if self.exhausted() {
            return None;
        }
        self.used += 1;
        let spectrum = walsh_transform(table);
        let fitness = self.objective.of_spectrum(&spectrum);
        self.record(fitness, table);
        Some((fitness, spectrum.coeffs().to_vec()))
    }

    /// Spends one evaluation on a candidate that differs from `base` only
    /// at table entries `i` (and `j`), using `base`'s cached spectrum.
    pub fn evaluate_flips(
        &mut self,
        base: &TruthTable,
        base_spectrum: &[i32],
        candidate: &TruthTable,
        i: usize,
        j: Option<usize>,
    ) -> Option<FitnessValue> {
        if self.exhausted() {
            return None;
        }
        self.used += 1;
        let len = base_spectrum.len();
        let ci = if base.get(i) { 2 } else { -2 };
        let cj = j.map(|j| if base.get(j) { 2 } else { -2 });
        let mut max = 0u32;
        let mut count = 0u64;
        for (a, &w) in base_spectrum.iter().enumerate() {
            let sign = |p: usize| 1 - 2 * ((a & p).count_ones() & 1) as i32;
            let mut w = w + ci * sign(i);
            if let (Some(c), Some(j)) = (cj, j) {
                w += c * sign(j);
            }
            let magnitude = w.unsigned_abs();
            if magnitude > max {
                max = magnitude;
                count = 1;
            } else if magnitude == max {
                count += 1;
            }
        }
        let nl = (len as u32 / 2) - max / 2;
        let fitness = match self.objective {
            Objective::F1 => FitnessValue::plain(nl),
            Objective::F2 => FitnessValue::refined(nl, len as u64 - count, len as u64),
        };
        self.record(fitness, candidate);
        Some(fitness)
    }

    pub fn finish(
        self,
        algorithm: &str,
        config: SearchConfig,
        started: Instant,
    ) -> RunRecord {
        let (best_fitness, best) = self.best.expect("budget ≥ 1 guarantees one evaluation");
        RunRecord {
            algorithm: algorithm.to_owned(),
            config,
            trajectory: self.trajectory,
            best,
            best_fitness,
            evaluations: self.used,
            seconds: started.elapsed().as_secs_f64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    /// The flip path must agree exactly with a fresh full transform, for
    /// both objectives, across sizes on both sides of the word boundary.
    #[test]
    fn flip_evaluation_equals_full_transform() {
        let mut rng = RandomSource::new(5);
        for n in [3u32, 6, 8] {
            let len = 1usize << n;
            for objective in [Objective::F1, Objective::F2] {
                for _ in 0..60 {
                    let base = TruthTable::random(n, &mut rng).unwrap();
                    let spectrum = walsh_transform(&base);
                    let i = (rng.next_seed() % len as u64) as usize;
                    let j = {
                        let j = (rng.next_seed() % (len as u64 - 1)) as usize;
                        if j >= i {
                            j + 1
                        } else {
                            j
                        }
                    };

                    let mut single = base.clone();
                    single.flip(i);
                    let mut pair = single.clone();
                    pair.flip(j);

                    let mut state = RunState::new(objective, 10);
                    let got = state
                        .evaluate_flips(&base, spectrum.coeffs(), &single, i, None)
                        .unwrap();
                    assert_eq!(got, objective.evaluate(&single));
                    let got = state
                        .evaluate_flips(&base, spectrum.coeffs(), &pair, i, Some(j))
                        .unwrap();
                    assert_eq!(got, objective.evaluate(&pair));
                }
            }
        }
    }

    #[test]
    fn budget_is_a_hard_ceiling_and_trajectory_grows_monotonically() {
        let mut rng = RandomSource::new(11);
        let mut state = RunState::new(Objective::F2, 5);
        for k in 0..8 {
            let t = TruthTable::random(4, &mut rng).unwrap();
            let outcome = state.evaluate(&t);
            assert_eq!(outcome.is_some(), k < 5);
        }
        let record = state.finish(
            "ls",
            SearchConfig::Ls(super::super::LsConfig::new(
                4,
                vec![crate::ops::MutationKind::BitFlip],
                Objective::F2,
                5,
                0,
            )),
            Instant::now(),
        );
        assert_eq!(record.evaluations, 5);
        assert!(record
            .trajectory
            .windows(2)
            .all(|w| w[0].fitness < w[1].fitness && w[0].evaluation < w[1].evaluation));
        assert_eq!(
            record.best_fitness,
            record.trajectory.last().unwrap().fitness
        );
    }
}
