//! Command-line surface: one parser struct per subcommand.

use std::path::PathBuf;

use boolnl::analysis::SamplePlan;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

/// Boolean-function nonlinearity toolbox: operator landscape studies, search
/// experiments, reference-table reproduction, and distribution censuses.
#[derive(Debug, Parser)]
#[command(name = "boolnl", version, about, max_term_width = 100)]
pub struct Cli {
    /// Base seed for every randomized stage.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Worker threads for parallel studies (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Directory that receives all output files.
    #[arg(long, global = true, env = "BOOLNL_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,

    /// Primary output format for study results (search always writes its run
    /// records as JSON plus CSV summaries).
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn token(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Operator landscape studies over the function space.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Search experiments: genetic algorithm, local search, or local search
    /// with reverts.
    Search(SearchArgs),
    /// Re-run a pinned study and diff the result against the bundled
    /// reference table.
    Reproduce(ReproduceArgs),
    /// Census of the nonlinearity distribution itself.
    Census(CensusArgs),
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Check whether an operator shifts the Walsh spectrum by one fixed
    /// delta per position, and report that delta when it exists.
    Consistency(OpStudyArgs),
    /// Tally how often an operator raises, keeps, or lowers nonlinearity,
    /// by starting nonlinearity.
    Transitions(OpStudyArgs),
    /// For every function, test which of rotation / bit flip / two-bit flip
    /// can raise its nonlinearity; tally the eight success patterns.
    Reachability(ReachabilityArgs),
    /// Tally how often a crossover child beats both parents, per pair of
    /// parent nonlinearities.
    Crossover(CrossoverArgs),
}

/// How much of the function space a study covers.
///
/// With none of the three sizing flags, spaces of at most 2^16 functions
/// (n ≤ 4) are enumerated and larger ones are rejected with a request for an
/// explicit sample size.
#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Number of variables.
    #[arg(long)]
    pub n: u32,

    /// Enumerate the whole function space.
    #[arg(long, conflicts_with_all = ["fraction", "count"])]
    pub exhaustive: bool,

    /// Sample this fraction of the space, in (0, 1].
    #[arg(long, conflicts_with = "count")]
    pub fraction: Option<f64>,

    /// Sample this many functions.
    #[arg(long)]
    pub count: Option<u64>,

    /// Allow exhaustive runs over 2^32 functions (n = 5; hours of work).
    #[arg(long)]
    pub force_exhaustive: bool,
}

impl PlanArgs {
    pub fn plan(&self, seed: u64) -> Result<SamplePlan, CliError> {
        let plan = if self.exhaustive {
            SamplePlan::exhaustive()
        } else if let Some(f) = self.fraction {
            SamplePlan::sampled_fraction(f, seed)
        } else if let Some(c) = self.count {
            SamplePlan::sampled_count(c, seed)
        } else if self.n <= 4 {
            SamplePlan::exhaustive()
        } else {
            return Err(CliError::Usage(format!(
                "the space of {}-variable functions is too large to enumerate by default; \
                 pass --exhaustive, --fraction, or --count",
                self.n
            )));
        };
        Ok(if self.force_exhaustive {
            plan.with_large_exhaustive()
        } else {
            plan
        })
    }
}

#[derive(Debug, Args)]
pub struct OpStudyArgs {
    /// Operator: bitset, bitreset, bitflip, 2bitflip, 2bitflipeq, 2bitset,
    /// 2bitreset, or rot.
    #[arg(long)]
    pub op: String,

    #[command(flatten)]
    pub plan: PlanArgs,
}

#[derive(Debug, Args)]
pub struct ReachabilityArgs {
    #[command(flatten)]
    pub plan: PlanArgs,

    /// In sampled runs, do not replace the rare low-nonlinearity classes by
    /// their exact parametrization; rely on uniform draws alone.
    #[arg(long)]
    pub no_stratify: bool,
}

#[derive(Debug, Args)]
pub struct CrossoverArgs {
    /// Crossover operator: single-mid, uniform-evenodd, single-random, or
    /// uniform-random.
    #[arg(long)]
    pub kind: String,

    /// Number of variables.
    #[arg(long)]
    pub n: u32,

    /// Pair evaluations per (nonlinearity, nonlinearity) cell (n ≤ 4).
    #[arg(long, default_value_t = 10_000)]
    pub pairs_per_cell: u64,

    /// Total uniform pair draws, binned by observed parent nonlinearity
    /// (required for n ≥ 5).
    #[arg(long)]
    pub draws: Option<u64>,

    /// Evaluate every ordered pair exactly once (n ≤ 4).
    #[arg(long, conflicts_with_all = ["pairs_per_cell", "draws"])]
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    /// Steady-state genetic algorithm.
    Ga,
    /// Greedy first-improvement local search.
    Ls,
    /// Local search that reverts to earlier solutions when a descent dead-ends.
    LsR,
}

impl Algo {
    pub fn token(self) -> &'static str {
        match self {
            Algo::Ga => "ga",
            Algo::Ls => "ls",
            Algo::LsR => "ls-r",
        }
    }
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Algorithm to run.
    #[arg(long, value_enum)]
    pub algo: Algo,

    /// Objective: 1 = nonlinearity alone, 2 = nonlinearity refined by how
    /// many spectrum entries sit at the maximum.
    #[arg(long, default_value_t = 2)]
    pub fitness: u8,

    /// Mutation operators for local search, applied in the given order,
    /// e.g. "2bit/bit" or "rot/bit/2bit".
    #[arg(long)]
    pub ops: Option<String>,

    /// Number of variables.
    #[arg(long)]
    pub n: u32,

    /// Independent runs. Run k of every configuration launched with the same
    /// base seed uses the same derived seed, so configurations pair up.
    #[arg(long, default_value_t = 30)]
    pub runs: u64,

    /// Fitness-evaluation budget per run.
    #[arg(long, default_value_t = 500_000)]
    pub budget: u64,

    /// Genetic algorithm: crossover operator (single-mid, uniform-evenodd,
    /// single-random, uniform-random).
    #[arg(long, default_value = "uniform-random")]
    pub crossover: String,

    /// Genetic algorithm: population size.
    #[arg(long, default_value_t = 100)]
    pub population: usize,

    /// Genetic algorithm: tournament size.
    #[arg(long, default_value_t = 3)]
    pub tournament: usize,

    /// Genetic algorithm: probability that a child is mutated.
    #[arg(long, default_value_t = 0.5)]
    pub mutation_prob: f64,

    /// Genetic algorithm: mutation operator pool, e.g. "bit,2bit,mix".
    #[arg(long, default_value = "bit,2bit,mix")]
    pub mutation_ops: String,

    /// Local search: stop after the first descent converges instead of
    /// restarting from fresh random functions until the budget is spent.
    #[arg(long)]
    pub no_restart: bool,

    /// Local search: scan positions in index order instead of per-solution
    /// seeded shuffles.
    #[arg(long)]
    pub canonical_order: bool,

    /// Reverting local search: cap the revert chain at one level.
    #[arg(long)]
    pub single_level_revert: bool,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Reference table to rebuild: 2, 3, 4, 5, 7, or 8.
    #[arg(long)]
    pub table: u8,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn small_spaces_default_to_exhaustive_plans() {
        let args = PlanArgs {
            n: 4,
            exhaustive: false,
            fraction: None,
            count: None,
            force_exhaustive: false,
        };
        assert!(args.plan(1).unwrap().is_exhaustive());
    }

    #[test]
    fn large_spaces_demand_an_explicit_size() {
        let args = PlanArgs {
            n: 8,
            exhaustive: false,
            fraction: None,
            count: None,
            force_exhaustive: false,
        };
        assert!(matches!(args.plan(1), Err(CliError::Usage(_))));
        let sized = PlanArgs {
            count: Some(1000),
            ..args
        };
        let plan = sized.plan(7).unwrap();
        assert!(!plan.is_exhaustive());
        assert_eq!(plan.count, Some(1000));
        assert_eq!(plan.seed, 7);
    }

    #[test]
    fn flag_placement_of_globals_is_free() {
        let cli = Cli::try_parse_from([
            "boolnl",
            "reproduce",
            "--table",
            "7",
            "--seed",
            "3",
        ])
        .unwrap();
        assert_eq!(cli.seed, 3);
        match cli.command {
            Command::Reproduce(r) => assert_eq!(r.table, 7),
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn plan_sizing_flags_conflict() {
        assert!(Cli::try_parse_from([
            "boolnl",
            "census",
            "--n",
            "5",
            "--exhaustive",
            "--fraction",
            "0.5",
        ])
        .is_err());
    }
}
