//! Budgeted search over Boolean functions: greedy first-improvement local
//! search (with and without backtracking to earlier accepted solutions) and
//! a steady-state genetic algorithm.
//!
//! Every algorithm spends a budget of *evaluations* — one evaluation per
//! fitness computation of a candidate, including rejected neighbors — and
//! returns a [`RunRecord`] with the full best-so-far trajectory. Runs are
//! deterministic functions of their configuration (the wall-time field
//! aside), and repeated experiments derive per-repetition seeds so that two
//! configurations sharing a base seed see *paired* random streams.

mod genetic;
mod local;
mod state;

pub use genetic::ga_run;
pub use local::{ls_revert_run, ls_run, ls_run_from};

use crate::error::{Error, Result};
use crate::fitness::{FitnessValue, Objective};
use crate::ops::{format_operator_combo, CrossoverKind, MutationKind};
use crate::rng::RandomSource;
use crate::table::TruthTable;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Stream tag for deriving per-repetition seeds inside [`experiment`].
const RUN_SEED_STREAM: u64 = 9;

/// A fresh uniformly random function: each table entry is an independent
/// fair coin.
pub fn random_function(n: u32, rng: &mut RandomSource) -> Result<TruthTable> {
    TruthTable::random(n, rng)
}

/// Seed for repetition `run` of a config whose base seed is `base_seed`.
///
/// Exposed so single repetitions of an experiment can be reproduced in
/// isolation. Configs sharing a base seed get identical per-run seeds,
/// which is what makes paired-seed comparisons meaningful.
pub fn derived_run_seed(base_seed: u64, run: u64) -> u64 {
    RandomSource::with_stream(base_seed, RUN_SEED_STREAM)
        .derive(run)
        .next_seed()
}

fn check_n(n: u32) -> Result<()> {
    if !(1..=crate::table::MAX_N).contains(&n) {
        return Err(Error::ConfigInvalid {
            reason: format!("variable count {n} outside supported range"),
        });
    }
    Ok(())
}

/// Configuration of the two local-search variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsConfig {
    pub n: u32,
    /// Operators scanned in this order inside the main loop.
    pub operator_sequence: Vec<MutationKind>,
    /// Backtrack to earlier accepted solutions when the current one
    /// dead-ends ([`ls_revert_run`]) instead of stopping ([`ls_run`]).
    pub revert: bool,
    pub fitness: Objective,
    /// Maximum number of fitness evaluations.
    pub budget: u64,
    pub seed: u64,
    /// After convergence with budget left, restart from a fresh random
    /// function, keeping the best solution seen across descents.
    pub restart_on_convergence: bool,
    /// Scan mutation positions in canonical enumeration order instead of
    /// an order shuffled once per solution. First-improvement acceptance
    /// makes the scan order part of the algorithm; the shuffled default
    /// removes the low-index bias of the canonical order.
    pub canonical_order: bool,
    /// Keep only the immediate predecessor on the revert chain (one level
    /// of undo) instead of the full chain of accepted solutions.
    pub single_level_revert: bool,
}

impl LsConfig {
    /// A non-reverting config with the documented defaults: restart on
    /// convergence, shuffled position order, full-chain revert semantics.
    pub fn new(
        n: u32,
        operator_sequence: Vec<MutationKind>,
        fitness: Objective,
        budget: u64,
        seed: u64,
    ) -> Self {
        Self {
            n,
            operator_sequence,
            revert: false,
            fitness,
            budget,
            seed,
            restart_on_convergence: true,
            canonical_order: false,
            single_level_revert: false,
        }
    }

    /// The same config with the revert strategy enabled.
    pub fn reverting(mut self) -> Self {
        self.revert = true;
        self
    }

    pub fn with_restart(mut self, restart: bool) -> Self {
        self.restart_on_convergence = restart;
        self
    }

    pub fn with_canonical_order(mut self, canonical: bool) -> Self {
        self.canonical_order = canonical;
        self
    }

    pub fn with_single_level_revert(mut self, single_level: bool) -> Self {
        self.single_level_revert = single_level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        if self.operator_sequence.is_empty() {
            return Err(Error::ConfigInvalid {
                reason: "operator sequence is empty".into(),
            });
        }
        for (i, op) in self.operator_sequence.iter().enumerate() {
            if self.operator_sequence[..i].contains(op) {
                return Err(Error::ConfigInvalid {
                    reason: format!("duplicate operator {op} in sequence"),
                });
            }
        }
        if self.budget == 0 {
            return Err(Error::ConfigInvalid {
                reason: "budget must be at least one evaluation".into(),
            });
        }
        if self.single_level_revert && !self.revert {
            return Err(Error::ConfigInvalid {
                reason: "single_level_revert requires revert".into(),
            });
        }
        Ok(())
    }

    /// Short config identifier, e.g. `ls-r:2bit/bit:f2`.
    pub fn label(&self) -> String {
        let algo = if self.revert { "ls-r" } else { "ls" };
        format!(
            "{algo}:{}:{}",
            format_operator_combo(&self.operator_sequence),
            self.fitness
        )
    }
}

/// Mutation operators available to the genetic algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaMutationOp {
    /// Flip one uniformly chosen table entry.
    BitFlip,
    /// Flip two distinct uniformly chosen table entries.
    TwoBitFlip,
    /// Shuffle the entries between two distinct uniformly chosen points.
    Mixing,
}

impl GaMutationOp {
    pub const ALL: [GaMutationOp; 3] = [
        GaMutationOp::BitFlip,
        GaMutationOp::TwoBitFlip,
        GaMutationOp::Mixing,
    ];

    pub fn token(self) -> &'static str {
        match self {
            GaMutationOp::BitFlip => "bit",
            GaMutationOp::TwoBitFlip => "2bit",
            GaMutationOp::Mixing => "mix",
        }
    }
}

impl fmt::Display for GaMutationOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for GaMutationOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bit" | "bitflip" => GaMutationOp::BitFlip,
            "2bit" | "2bitflip" => GaMutationOp::TwoBitFlip,
            "mix" | "mixing" => GaMutationOp::Mixing,
            _ => {
                return Err(Error::ParseFailed {
                    what: "GA mutation operator",
                    text: s.to_owned(),
                })
            }
        })
    }
}

/// Configuration of the steady-state genetic algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub n: u32,
    pub population_size: usize,
    /// Individuals drawn per tournament; the worst of them is replaced by
    /// the child of the remaining two.
    pub tournament_size: usize,
    /// Must be one of the randomized kinds; the deterministic ones would
    /// collapse the steady-state dynamics.
    pub crossover: CrossoverKind,
    pub mutation_ops: Vec<GaMutationOp>,
    pub mutation_probability: f64,
    pub fitness: Objective,
    pub budget: u64,
    pub seed: u64,
}

impl GaConfig {
    /// Defaults: population 100, tournament 3, all three mutation
    /// operators, mutation probability 0.5.
    pub fn new(n: u32, crossover: CrossoverKind, fitness: Objective, budget: u64, seed: u64) -> Self {
        Self {
            n,
            population_size: 100,
            tournament_size: 3,
            crossover,
            mutation_ops: GaMutationOp::ALL.to_vec(),
            mutation_probability: 0.5,
            fitness,
            budget,
            seed,
        }
    }

    pub fn with_mutation_ops(mut self, ops: Vec<GaMutationOp>) -> Self {
        self.mutation_ops = ops;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        if self.tournament_size < 3 {
            return Err(Error::ConfigInvalid {
                reason: "tournament needs at least three individuals (worst out, two parents)"
                    .into(),
            });
        }
        if self.tournament_size > self.population_size {
            return Err(Error::ConfigInvalid {
                reason: format!(
                    "tournament size {} exceeds population size {}",
                    self.tournament_size, self.population_size
                ),
            });
        }
        if self.crossover.is_deterministic() {
            return Err(Error::ConfigInvalid {
                reason: format!("crossover {} is deterministic", self.crossover),
            });
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(Error::ConfigInvalid {
                reason: format!(
                    "mutation probability {} outside [0, 1]",
                    self.mutation_probability
                ),
            });
        }
        if self.mutation_ops.is_empty() && self.mutation_probability > 0.0 {
            return Err(Error::ConfigInvalid {
                reason: "mutation can fire but no mutation operators are configured".into(),
            });
        }
        for (i, op) in self.mutation_ops.iter().enumerate() {
            if self.mutation_ops[..i].contains(op) {
                return Err(Error::ConfigInvalid {
                    reason: format!("duplicate GA mutation operator {op}"),
                });
            }
        }
        if self.budget == 0 {
            return Err(Error::ConfigInvalid {
                reason: "budget must be at least one evaluation".into(),
            });
        }
        Ok(())
    }

    /// Short config identifier, e.g. `ga:uniform-random:bit+2bit+mix:f1`.
    pub fn label(&self) -> String {
        let muts = self
            .mutation_ops
            .iter()
            .map(|m| m.token())
            .collect::<Vec<_>>()
            .join("+");
        format!("ga:{}:{muts}:{}", self.crossover, self.fitness)
    }
}

/// One point of the best-so-far trajectory: after `evaluation` fitness
/// computations (1-based), the best fitness seen became `fitness`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub evaluation: u64,
    pub fitness: FitnessValue,
}

/// Any runnable search configuration; doubles as the config snapshot
/// embedded in a [`RunRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchConfig {
    Ls(LsConfig),
    Ga(GaConfig),
}

impl SearchConfig {
    pub fn label(&self) -> String {
        match self {
            SearchConfig::Ls(c) => c.label(),
            SearchConfig::Ga(c) => c.label(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            SearchConfig::Ls(c) => c.seed,
            SearchConfig::Ga(c) => c.seed,
        }
    }

    pub fn n(&self) -> u32 {
        match self {
            SearchConfig::Ls(c) => c.n,
            SearchConfig::Ga(c) => c.n,
        }
    }

    fn reseeded(&self, seed: u64) -> Self {
        let mut cfg = self.clone();
        match &mut cfg {
            SearchConfig::Ls(c) => c.seed = seed,
            SearchConfig::Ga(c) => c.seed = seed,
        }
        cfg
    }

    fn resized(&self, n: u32) -> Self {
        let mut cfg = self.clone();
        match &mut cfg {
            SearchConfig::Ls(c) => c.n = n,
            SearchConfig::Ga(c) => c.n = n,
        }
        cfg
    }

    /// Runs the configured algorithm.
    pub fn run(&self) -> Result<RunRecord> {
        match self {
            SearchConfig::Ls(c) if c.revert => ls_revert_run(c),
            SearchConfig::Ls(c) => ls_run(c),
            SearchConfig::Ga(c) => ga_run(c),
        }
    }
}

/// Everything one run produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    /// `"ls"`, `"ls-revert"`, or `"ga"`.
    pub algorithm: String,
    pub config: SearchConfig,
    /// Best-so-far improvements in evaluation order; non-decreasing in
    /// fitness by construction.
    pub trajectory: Vec<TrajectoryPoint>,
    pub best: TruthTable,
    pub best_fitness: FitnessValue,
    pub evaluations: u64,
    /// Wall-clock duration; informational only. Excluded from serialized
    /// output so that persisted records are byte-identical across runs
    /// (timing belongs in sidecar metadata).
    #[serde(default, skip_serializing)]
    pub seconds: f64,
}

impl RunRecord {
    pub fn best_nonlinearity(&self) -> u32 {
        self.best_fitness.nl()
    }

    /// The trajectory thinned to every `every`-th improvement; the first
    /// and last points are always kept.
    pub fn downsampled_trajectory(&self, every: usize) -> Vec<TrajectoryPoint> {
        let every = every.max(1);
        let last = self.trajectory.len().saturating_sub(1);
        self.trajectory
            .iter()
            .enumerate()
            .filter(|(i, _)| i % every == 0 || *i == last)
            .map(|(_, p)| *p)
            .collect()
    }
}

/// Five-number summary for box plots over final nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxPlot {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Aggregate statistics over an experiment's repetitions of one config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryStats {
    pub min_nl: u32,
    pub mean_nl: f64,
    pub median_nl: f64,
    pub max_nl: u32,
    pub box_plot: BoxPlot,
    pub mean_evaluations: f64,
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let position = q * (sorted.len() - 1) as f64;
    let low = position.floor() as usize;
    let high = position.ceil() as usize;
    sorted[low] + (sorted[high] - sorted[low]) * (position - low as f64)
}

impl SummaryStats {
    fn from_records(records: &[RunRecord]) -> Self {
        let mut nls: Vec<f64> = records
            .iter()
            .map(|r| r.best_nonlinearity() as f64)
            .collect();
        nls.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let runs = nls.len() as f64;
        SummaryStats {
            min_nl: nls[0] as u32,
            mean_nl: nls.iter().sum::<f64>() / runs,
            median_nl: quantile(&nls, 0.5),
            max_nl: nls[nls.len() - 1] as u32,
            box_plot: BoxPlot {
                min: nls[0],
                q1: quantile(&nls, 0.25),
                median: quantile(&nls, 0.5),
                q3: quantile(&nls, 0.75),
                max: nls[nls.len() - 1],
            },
            mean_evaluations: records.iter().map(|r| r.evaluations as f64).sum::<f64>() / runs,
        }
    }
}

/// All repetitions of one config within an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigOutcome {
    pub config: SearchConfig,
    pub label: String,
    pub records: Vec<RunRecord>,
    pub stats: SummaryStats,
}

/// Runs `runs` independent repetitions of every config at size `n`.
///
/// Each config is re-targeted to `n`; repetition `r` uses
/// [`derived_run_seed`] of the config's base seed, so configs sharing a
/// base seed are compared on paired random streams. Repetitions run in
/// parallel; results are deterministic regardless of thread count.
pub fn experiment(configs: &[SearchConfig], runs: u64, n: u32) -> Result<Vec<ConfigOutcome>> {
    if runs == 0 {
        return Err(Error::ConfigInvalid {
            reason: "experiment needs at least one run".into(),
        });
    }
    configs
        .iter()
        .map(|config| {
            let config = config.resized(n);
            let records: Vec<RunRecord> = (0..runs)
                .into_par_iter()
                .map(|r| config.reseeded(derived_run_seed(config.seed(), r)).run())
                .collect::<Result<_>>()?;
            Ok(ConfigOutcome {
                label: config.label(),
                stats: SummaryStats::from_records(&records),
                config,
                records,
            })
        })
        .collect()
}

/// Per-run CSV rows (`config,run,final-nl,final-fitness,evaluations,seconds`)
/// for a whole experiment.
pub fn experiment_csv(outcomes: &[ConfigOutcome]) -> String {
    let mut out = String::from("config,run,final_nl,final_fitness,evaluations,seconds\n");
    for outcome in outcomes {
        for (r, record) in outcome.records.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{:.3}\n",
                outcome.label,
                r,
                record.best_nonlinearity(),
                record.best_fitness,
                record.evaluations,
                record.seconds,
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_function_is_seeded_and_unbiased() {
        let mut rng = RandomSource::new(7);
        let a = random_function(8, &mut rng).unwrap();
        let b = random_function(8, &mut RandomSource::new(7)).unwrap();
        assert_eq!(a, b);
        let c = random_function(8, &mut RandomSource::new(8)).unwrap();
        assert_ne!(a, c);

        // Mean weight over 1000 draws: binomial(256, ½) per draw, so the
        // sample mean stays within 3σ/√1000 ≈ 0.76 of 128.
        let mut rng = RandomSource::new(99);
        let total: u64 = (0..1000)
            .map(|_| random_function(8, &mut rng).unwrap().weight() as u64)
            .sum();
        let mean = total as f64 / 1000.0;
        assert!((mean - 128.0).abs() < 3.0, "mean weight {mean}");
    }

    #[test]
    fn config_validation_catches_bad_shapes() {
        let ls = LsConfig::new(4, vec![], Objective::F1, 100, 1);
        assert!(ls.validate().is_err());
        let ls = LsConfig::new(
            4,
            vec![MutationKind::BitFlip, MutationKind::BitFlip],
            Objective::F1,
            100,
            1,
        );
        assert!(ls.validate().is_err());
        let ls = LsConfig::new(4, vec![MutationKind::BitFlip], Objective::F1, 100, 1)
            .with_single_level_revert(true);
        assert!(ls.validate().is_err(), "single-level without revert");
        assert!(ls.reverting().validate().is_ok());

        let ga = GaConfig::new(4, CrossoverKind::SinglePointMid, Objective::F1, 100, 1);
        assert!(ga.validate().is_err(), "deterministic crossover");
        let mut ga = GaConfig::new(4, CrossoverKind::UniformRandom, Objective::F1, 100, 1);
        assert!(ga.validate().is_ok());
        ga.tournament_size = 101;
        assert!(ga.validate().is_err());
        ga.tournament_size = 3;
        ga.mutation_probability = 1.5;
        assert!(ga.validate().is_err());
    }

    #[test]
    fn labels_and_mutation_op_round_trip() {
        let ls = LsConfig::new(
            8,
            vec![MutationKind::TwoBitFlip, MutationKind::BitFlip],
            Objective::F2,
            100,
            1,
        );
        assert_eq!(ls.label(), "ls:2bit/bit:f2");
        assert_eq!(ls.clone().reverting().label(), "ls-r:2bit/bit:f2");
        let ga = GaConfig::new(8, CrossoverKind::UniformRandom, Objective::F1, 100, 1);
        assert_eq!(ga.label(), "ga:uniform-random:bit+2bit+mix:f1");
        for op in GaMutationOp::ALL {
            assert_eq!(op.token().parse::<GaMutationOp>().unwrap(), op);
        }
    }

    #[test]
    fn derived_seeds_are_stable_and_spread() {
        let a = derived_run_seed(42, 0);
        assert_eq!(a, derived_run_seed(42, 0));
        assert_ne!(a, derived_run_seed(42, 1));
        assert_ne!(a, derived_run_seed(43, 0));
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
    }

    #[test]
    fn single_run_experiment_summarizes_that_record() {
        let cfg = SearchConfig::Ls(
            LsConfig::new(4, vec![MutationKind::BitFlip], Objective::F1, 500, 2)
                .with_restart(false),
        );
        let outcomes = experiment(&[cfg], 1, 4).unwrap();
        assert_eq!(outcomes.len(), 1);
        let outcome = &outcomes[0];
        assert_eq!(outcome.records.len(), 1);
        let nl = outcome.records[0].best_nonlinearity();
        assert_eq!(outcome.stats.min_nl, nl);
        assert_eq!(outcome.stats.max_nl, nl);
        assert_eq!(outcome.stats.mean_nl, nl as f64);
        assert_eq!(outcome.stats.box_plot.median, nl as f64);
        assert_eq!(
            outcome.stats.mean_evaluations,
            outcome.records[0].evaluations as f64
        );
        let csv = experiment_csv(&outcomes);
        assert!(csv.starts_with("config,run,"));
        assert!(csv.contains("ls:bit:f1,0,"));
    }

    #[test]
    fn experiments_pair_seeds_and_override_the_size() {
        let ls = SearchConfig::Ls(
            LsConfig::new(8, vec![MutationKind::BitFlip], Objective::F2, 300, 42)
                .with_restart(false),
        );
        let lsr = SearchConfig::Ls(
            LsConfig::new(8, vec![MutationKind::BitFlip], Objective::F2, 300, 42)
                .with_restart(false)
                .reverting(),
        );
        let outcomes = experiment(&[ls, lsr], 3, 5).unwrap();
        for outcome in &outcomes {
            assert_eq!(outcome.config.n(), 5);
            for record in &outcome.records {
                assert_eq!(record.best.n(), 5);
            }
        }
        // Paired streams: both algorithms see the same derived seed per
        // run, hence identical initial functions, hence identical first
        // trajectory points.
        for r in 0..3 {
            assert_eq!(
                outcomes[0].records[r].trajectory[0],
                outcomes[1].records[r].trajectory[0]
            );
        }
    }
}
