//! Runs parsed commands: executes the studies and searches, writes primary
//! output files plus a metadata sidecar per invocation, and judges
//! reproductions against the bundled reference tables.
//!
//! Primary outputs depend only on the command, seed, and version — never on
//! time or thread count — so identical invocations write identical bytes.
//! Timestamps and timings live in the `.meta.json` sidecars.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use boolnl::analysis::{
    consistency_study, crossover_study, nl_census, reachability_study_with, transition_study,
    ReachabilityOptions, SamplePlan,
};
use boolnl::{
    experiment, parse_operator_combo, CrossoverKind, GaConfig, GaMutationOp, LsConfig,
    MutationKind, Objective, SearchConfig,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    Algo, AnalyzeCommand, CensusArgs, Cli, Command, CrossoverArgs, Format, OpStudyArgs,
    ReachabilityArgs, ReproduceArgs, SearchArgs,
};
use crate::golden::{golden_grid, reproduce_rule, MatchRule};
use crate::grid::{diff_exact, diff_tolerance, Deviation, Grid};
use crate::render;
use crate::CliError;

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        // If a pool already exists in this process the first size wins;
        // results do not depend on thread count, only throughput does.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    fs::create_dir_all(&cli.out_dir).map_err(|e| CliError::Io(cli.out_dir.clone(), e))?;
    let started = Instant::now();
    match &cli.command {
        Command::Analyze(AnalyzeCommand::Consistency(args)) => {
            cmd_consistency(cli, args, started)
        }
        Command::Analyze(AnalyzeCommand::Transitions(args)) => {
            cmd_transitions(cli, args, started)
        }
        Command::Analyze(AnalyzeCommand::Reachability(args)) => {
            cmd_reachability(cli, args, started)
        }
        Command::Analyze(AnalyzeCommand::Crossover(args)) => cmd_crossover(cli, args, started),
        Command::Search(args) => cmd_search(cli, args, started),
        Command::Reproduce(args) => cmd_reproduce(cli, args, started),
        Command::Census(args) => cmd_census(cli, args, started),
    }
}

// ---------------------------------------------------------------------------
// Output plumbing

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(path.clone(), e))?;
    Ok(path)
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Serialize(e.to_string()))
}

/// Writes the primary artifact in the selected format: the grid as CSV, or
/// the full result structure as JSON.
fn write_primary<T: Serialize>(
    cli: &Cli,
    stem: &str,
    grid: &Grid,
    full: &T,
) -> Result<PathBuf, CliError> {
    match cli.format {
        Format::Csv => write_file(&cli.out_dir, &format!("{stem}.csv"), &grid.to_csv()),
        Format::Json => write_file(&cli.out_dir, &format!("{stem}.json"), &to_json_pretty(full)?),
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    /// Full effective configuration; enough to re-run the invocation.
    config: serde_json::Value,
    seed: u64,
    threads: usize,
    format: &'a str,
    version: &'a str,
    timestamp_unix_ms: u128,
    wall_seconds: f64,
    outputs: Vec<String>,
}

fn write_sidecar(
    cli: &Cli,
    stem: &str,
    command: &str,
    config: serde_json::Value,
    outputs: &[PathBuf],
    started: Instant,
) -> Result<PathBuf, CliError> {
    let sidecar = Sidecar {
        command,
        config,
        seed: cli.seed,
        threads: cli.threads,
        format: cli.format.token(),
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix_ms: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        wall_seconds: started.elapsed().as_secs_f64(),
        outputs: outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
    };
    write_file(
        &cli.out_dir,
        &format!("{stem}.meta.json"),
        &to_json_pretty(&sidecar)?,
    )
}

// ---------------------------------------------------------------------------
// analyze

fn cmd_consistency(cli: &Cli, args: &OpStudyArgs, started: Instant) -> Result<(), CliError> {
    let op: MutationKind = args.op.parse()?;
    let plan = args.plan.plan(cli.seed)?;
    let report = consistency_study(op, args.plan.n, &plan)?;
    let grid = render::consistency_grid(&report);
    let stem = format!("consistency-{}-n{}", op.token(), args.plan.n);
    let primary = write_primary(cli, &stem, &grid, &report)?;
    write_sidecar(
        cli,
        &stem,
        "analyze consistency",
        json!({ "op": op.token(), "n": args.plan.n, "plan": plan }),
        std::slice::from_ref(&primary),
        started,
    )?;
    let consistent = report.positions.iter().filter(|p| p.consistent).count();
    println!(
        "consistency of `{}` at n = {}: {}/{} positions have a function-independent delta \
         ({} examined per position); wrote {}",
        op.token(),
        args.plan.n,
        consistent,
        report.positions.len(),
        report
            .positions
            .first()
            .map_or(0, |p| p.functions_examined),
        primary.display()
    );
    Ok(())
}

fn cmd_transitions(cli: &Cli, args: &OpStudyArgs, started: Instant) -> Result<(), CliError> {
    let op: MutationKind = args.op.parse()?;
    let plan = args.plan.plan(cli.seed)?;
    let table = transition_study(op, args.plan.n, &plan)?;
    let grid = render::transition_grid(&[&table])?;
    let stem = format!("transitions-{}-n{}", op.token(), args.plan.n);
    let primary = write_primary(cli, &stem, &grid, &table)?;
    write_sidecar(
        cli,
        &stem,
        "analyze transitions",
        json!({ "op": op.token(), "n": args.plan.n, "plan": plan }),
        std::slice::from_ref(&primary),
        started,
    )?;
    println!(
        "transition table for `{}` at n = {} ({:?}); wrote {}",
        op.token(),
        args.plan.n,
        table.collapse_check,
        primary.display()
    );
    Ok(())
}

fn cmd_reachability(cli: &Cli, args: &ReachabilityArgs, started: Instant) -> Result<(), CliError> {
    let plan = args.plan.plan(cli.seed)?;
    let options = ReachabilityOptions {
        stratify_low_nl: !args.no_stratify,
        ..ReachabilityOptions::default()
    };
    let census = reachability_study_with(args.plan.n, &plan, options)?;
    let grid = if census.exhaustive {
        render::reachability_count_grid(&census)
    } else {
        render::reachability_percent_grid(&census)
    };
    let stem = format!("reachability-n{}", args.plan.n);
    let primary = write_primary(cli, &stem, &grid, &census)?;
    write_sidecar(
        cli,
        &stem,
        "analyze reachability",
        json!({
            "n": args.plan.n,
            "plan": plan,
            "stratify_low_nl": !args.no_stratify,
        }),
        std::slice::from_ref(&primary),
        started,
    )?;
    println!(
        "improvement reachability at n = {} over {} columns; wrote {}",
        args.plan.n,
        render::reachability_levels(&census).len(),
        primary.display()
    );
    Ok(())
}

fn crossover_plan(cli: &Cli, args: &CrossoverArgs) -> Result<SamplePlan, CliError> {
    if args.exhaustive {
        if args.n > 4 {
            return Err(CliError::Usage(format!(
                "exhaustive pair enumeration is only tractable for n ≤ 4, not n = {}",
                args.n
            )));
        }
        return Ok(SamplePlan::exhaustive());
    }
    if args.n <= 4 {
        if args.draws.is_some() {
            return Err(CliError::Usage(
                "at n ≤ 4 the study is stratified per cell; size it with \
                 --pairs-per-cell (or --exhaustive), not --draws"
                    .into(),
            ));
        }
        Ok(SamplePlan::sampled_count(args.pairs_per_cell, cli.seed))
    } else {
        let draws = args.draws.ok_or_else(|| {
            CliError::Usage(format!(
                "at n = {} parent nonlinearities cannot be enumerated; size the \
                 study with --draws (total uniform pair draws)",
                args.n
            ))
        })?;
        Ok(SamplePlan::sampled_count(draws, cli.seed))
    }
}

fn cmd_crossover(cli: &Cli, args: &CrossoverArgs, started: Instant) -> Result<(), CliError> {
    let kind: CrossoverKind = args.kind.parse()?;
    let plan = crossover_plan(cli, args)?;
    let matrix = crossover_study(kind, args.n, &plan)?;
    let grid = render::crossover_floor_grid(&matrix);
    let stem = format!("crossover-{}-n{}", kind.token(), args.n);
    let primary = write_primary(cli, &stem, &grid, &matrix)?;
    write_sidecar(
        cli,
        &stem,
        "analyze crossover",
        json!({ "kind": kind.token(), "n": args.n, "plan": plan }),
        std::slice::from_ref(&primary),
        started,
    )?;
    println!(
        "crossover matrix for `{}` at n = {} ({} cells); wrote {}",
        kind.token(),
        args.n,
        matrix.cells().len(),
        primary.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// census

fn cmd_census(cli: &Cli, args: &CensusArgs, started: Instant) -> Result<(), CliError> {
    let plan = args.plan.plan(cli.seed)?;
    let census = nl_census(args.plan.n, &plan)?;
    let grid = render::census_grid(&census);
    let stem = format!("census-n{}", args.plan.n);
    let primary = write_primary(cli, &stem, &grid, &census)?;
    write_sidecar(
        cli,
        &stem,
        "census",
        json!({ "n": args.plan.n, "plan": plan }),
        std::slice::from_ref(&primary),
        started,
    )?;
    println!(
        "nonlinearity census at n = {} over {} functions; wrote {}",
        args.plan.n,
        census.total(),
        primary.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// search

fn build_search_config(cli: &Cli, args: &SearchArgs) -> Result<SearchConfig, CliError> {
    let fitness = match args.fitness {
        1 => Objective::F1,
        2 => Objective::F2,
        other => {
            return Err(CliError::Usage(format!(
                "--fitness must be 1 or 2, got {other}"
            )))
        }
    };
    match args.algo {
        Algo::Ls | Algo::LsR => {
            let ops = args.ops.as_deref().ok_or_else(|| {
                CliError::Usage(
                    "local search needs --ops, an order like \"2bit/bit\" or \"rot/bit/2bit\""
                        .into(),
                )
            })?;
            let sequence = parse_operator_combo(ops)?;
            let mut config = LsConfig::new(args.n, sequence, fitness, args.budget, cli.seed);
            if args.algo == Algo::LsR {
                config = config.reverting();
            }
            config = config
                .with_restart(!args.no_restart)
                .with_canonical_order(args.canonical_order)
                .with_single_level_revert(args.single_level_revert);
            Ok(SearchConfig::Ls(config))
        }
        Algo::Ga => {
            if args.ops.is_some() {
                return Err(CliError::Usage(
                    "--ops selects local-search operators; the genetic algorithm's \
                     pool is --mutation-ops"
                        .into(),
                ));
            }
            let crossover: CrossoverKind = args.crossover.parse()?;
            let mutation_ops = args
                .mutation_ops
                .split(',')
                .map(|t| t.trim().parse::<GaMutationOp>())
                .collect::<boolnl::Result<Vec<_>>>()?;
            let mut config = GaConfig::new(args.n, crossover, fitness, args.budget, cli.seed)
                .with_mutation_ops(mutation_ops);
            config.population_size = args.population;
            config.tournament_size = args.tournament;
            config.mutation_probability = args.mutation_prob;
            Ok(SearchConfig::Ga(config))
        }
    }
}

fn file_stem_for(label: &str, n: u32) -> String {
    let sanitized: String = label
        .chars()
        .map(|c| match c {
            ':' => '_',
            '/' => '+',
            c => c,
        })
        .collect();
    format!("search-{sanitized}-n{n}")
}

fn cmd_search(cli: &Cli, args: &SearchArgs, started: Instant) -> Result<(), CliError> {
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let config = build_search_config(cli, args)?;
    let outcomes = experiment(std::slice::from_ref(&config), args.runs, args.n)?;
    let outcome = &outcomes[0];

    let stem = file_stem_for(&outcome.label, args.n);
    let records = write_file(
        &cli.out_dir,
        &format!("{stem}.records.json"),
        &to_json_pretty(&outcome.records)?,
    )?;
    let runs = write_file(
        &cli.out_dir,
        &format!("{stem}.runs.csv"),
        &render::runs_grid(outcome).to_csv(),
    )?;
    let summary = write_file(
        &cli.out_dir,
        &format!("{stem}.summary.csv"),
        &render::summary_grid(&outcomes).to_csv(),
    )?;
    let outputs = vec![records, runs, summary];
    write_sidecar(
        cli,
        &stem,
        "search",
        json!({
            "config": config,
            "runs": args.runs,
            "per_run_seconds": outcome
                .records
                .iter()
                .map(|r| r.seconds)
                .collect::<Vec<_>>(),
        }),
        &outputs,
        started,
    )?;
    let stats = &outcome.stats;
    println!(
        "{} at n = {}: {} runs, final nl mean {:.2} (min {}, max {}), mean evaluations {:.0}; \
         wrote {} + runs/summary CSVs",
        outcome.label,
        args.n,
        outcome.records.len(),
        stats.mean_nl,
        stats.min_nl,
        stats.max_nl,
        stats.mean_evaluations,
        outputs[0].display(),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// reproduce

/// Per-cell pair evaluations pinned for rebuilding the crossover tables.
/// A power of two, so small cells (whose pair spaces divide it) are covered
/// by exact whole passes and only the large cells carry sampling noise far
/// below the ±3pp tolerance.
pub const REPRODUCE_PAIRS_PER_CELL: u64 = 262_144;

struct Reproduction {
    /// The produced table, in the reference layout.
    produced: Grid,
    /// Deviations against the bundled reference, per the table's rule.
    deviations: Vec<Deviation>,
    /// Effective study parameters (for the sidecar).
    config: serde_json::Value,
}

fn reproduce_table(cli: &Cli, table: u8) -> Result<Reproduction, CliError> {
    let reference = golden_grid(table)?;
    match table {
        2 => {
            let plan = SamplePlan::exhaustive();
            let report = consistency_study(MutationKind::BitSet, 3, &plan)?;
            let produced = render::delta_grid(&report)?;
            let deviations = diff_exact(&produced, &reference)?;
            Ok(Reproduction {
                produced,
                deviations,
                config: json!({ "study": "consistency", "op": "bitset", "n": 3, "plan": plan }),
            })
        }
        3 => {
            let plan = SamplePlan::exhaustive();
            let bit = transition_study(MutationKind::BitFlip, 4, &plan)?;
            let two = transition_study(MutationKind::TwoBitFlip, 4, &plan)?;
            let produced = render::transition_grid(&[&bit, &two])?;
            let deviations = diff_exact(&produced, &reference)?;
            Ok(Reproduction {
                produced,
                deviations,
                config: json!({
                    "study": "transitions",
                    "ops": ["bitflip", "2bitflip"],
                    "n": 4,
                    "plan": plan,
                }),
            })
        }
        4 => {
            let plan = SamplePlan::exhaustive();
            let rot = transition_study(MutationKind::Rotation, 4, &plan)?;
            let produced = render::transition_grid(&[&rot])?;
            let deviations = diff_exact(&produced, &reference)?;
            Ok(Reproduction {
                produced,
                deviations,
                config: json!({ "study": "transitions", "op": "rot", "n": 4, "plan": plan }),
            })
        }
        5 => {
            let plan = SamplePlan::exhaustive();
            let census = reachability_study_with(4, &plan, ReachabilityOptions::default())?;
            let produced = render::reachability_count_grid(&census);
            let deviations = diff_exact(&produced, &reference)?;
            Ok(Reproduction {
                produced,
                deviations,
                config: json!({ "study": "reachability", "n": 4, "plan": plan }),
            })
        }
        7 | 8 => {
            let kind = if table == 7 {
                CrossoverKind::SinglePointMid
            } else {
                CrossoverKind::UniformEvenOdd
            };
            let plan = SamplePlan::sampled_count(REPRODUCE_PAIRS_PER_CELL, cli.seed);
            let matrix = crossover_study(kind, 4, &plan)?;
            let produced = render::crossover_floor_grid(&matrix);
            let rows = render::crossover_percent_rows(&matrix);
            let deviations = diff_tolerance(&rows, &reference, 3.0)?;
            Ok(Reproduction {
                produced,
                deviations,
                config: json!({
                    "study": "crossover",
                    "kind": kind.token(),
                    "n": 4,
                    "plan": plan,
                }),
            })
        }
        other => Err(CliError::Usage(format!(
            "no reproducible table {other}; choose 2, 3, 4, 5, 7, or 8"
        ))),
    }
}

fn reproduction_report(table: u8, rule: MatchRule, produced: &Grid, deviations: &[Deviation]) -> String {
    let cells = produced.rows.len() * (produced.header.len() - 1);
    let rule_text = match rule {
        MatchRule::Exact => "exact".to_owned(),
        MatchRule::WithinPercentagePoints(pp) => {
            format!("within ±{pp:.1} percentage points at full precision")
        }
    };
    let mut out = String::new();
    if deviations.is_empty() {
        out.push_str(&format!(
            "table {table}: MATCH — all {cells} cells {rule_text}\n"
        ));
    } else {
        out.push_str(&format!(
            "table {table}: MISMATCH — {} of {cells} cells deviate (rule: {rule_text})\n",
            deviations.len()
        ));
        for d in deviations {
            out.push_str(&format!("  {d}\n"));
        }
    }
    out
}

fn cmd_reproduce(cli: &Cli, args: &ReproduceArgs, started: Instant) -> Result<(), CliError> {
    let rule = reproduce_rule(args.table).ok_or_else(|| {
        if args.table == 6 {
            CliError::Usage(
                "table 6 is a sampled percentage table without a pinned reproduction; \
                 rebuild it with `analyze reachability --n 5 --fraction 0.01` and \
                 compare against the bundled reference"
                    .into(),
            )
        } else {
            CliError::Usage(format!(
                "no reproducible table {}; choose 2, 3, 4, 5, 7, or 8",
                args.table
            ))
        }
    })?;
    let repro = reproduce_table(cli, args.table)?;
    let stem = format!("table{}", args.table);
    let produced_path = write_file(
        &cli.out_dir,
        &format!("{stem}-produced.csv"),
        &repro.produced.to_csv(),
    )?;
    let report = reproduction_report(args.table, rule, &repro.produced, &repro.deviations);
    let report_path = write_file(&cli.out_dir, &format!("{stem}-report.txt"), &report)?;
    write_sidecar(
        cli,
        &stem,
        "reproduce",
        json!({ "table": args.table, "pinned": repro.config }),
        &[produced_path, report_path],
        started,
    )?;
    print!("{report}");
    if repro.deviations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Diff {
            table: args.table,
            deviations: repro.deviations.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::CrossoverArgs;

    fn cli(out: &str) -> Cli {
        Cli {
            seed: 1,
            threads: 0,
            out_dir: PathBuf::from(out),
            format: Format::Csv,
            command: Command::Reproduce(ReproduceArgs { table: 2 }),
        }
    }

    #[test]
    fn labels_become_safe_file_stems() {
        assert_eq!(
            file_stem_for("ls-r:2bit/bit:f2", 9),
            "search-ls-r_2bit+bit_f2-n9"
        );
        assert_eq!(
            file_stem_for("ga:uniform-random:bit+2bit+mix:f1", 8),
            "search-ga_uniform-random_bit+2bit+mix_f1-n8"
        );
    }

    #[test]
    fn crossover_sizing_is_per_cell_below_five_variables() {
        let cli = cli("/tmp/unused");
        let args = CrossoverArgs {
            kind: "uniform-random".into(),
            n: 4,
            pairs_per_cell: 123,
            draws: None,
            exhaustive: false,
        };
        let plan = crossover_plan(&cli, &args).unwrap();
        assert_eq!(plan.count, Some(123));

        let big = CrossoverArgs { n: 6, ..args };
        assert!(matches!(crossover_plan(&cli, &big), Err(CliError::Usage(_))));
        let sized = CrossoverArgs {
            n: 6,
            draws: Some(50_000),
            kind: "uniform-random".into(),
            pairs_per_cell: 10_000,
            exhaustive: false,
        };
        assert_eq!(crossover_plan(&cli, &sized).unwrap().count, Some(50_000));
    }

    #[test]
    fn ga_rejects_the_local_search_operator_flag() {
        let cli = cli("/tmp/unused");
        let args = SearchArgs {
            algo: Algo::Ga,
            fitness: 1,
            ops: Some("2bit/bit".into()),
            n: 4,
            runs: 1,
            budget: 100,
            crossover: "uniform-random".into(),
            population: 10,
            tournament: 3,
            mutation_prob: 0.5,
            mutation_ops: "bit".into(),
            no_restart: false,
            canonical_order: false,
            single_level_revert: false,
        };
        assert!(matches!(
            build_search_config(&cli, &args),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn fitness_flag_maps_to_the_two_objectives_only() {
        let cli = cli("/tmp/unused");
        let mut args = SearchArgs {
            algo: Algo::Ls,
            fitness: 3,
            ops: Some("bit".into()),
            n: 4,
            runs: 1,
            budget: 100,
            crossover: "uniform-random".into(),
            population: 10,
            tournament: 3,
            mutation_prob: 0.5,
            mutation_ops: "bit".into(),
            no_restart: false,
            canonical_order: false,
            single_level_revert: false,
        };
        assert!(build_search_config(&cli, &args).is_err());
        args.fitness = 1;
        let config = build_search_config(&cli, &args).unwrap();
        assert_eq!(config.label(), "ls:bit:f1");
    }
}
