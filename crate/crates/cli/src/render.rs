//! Converts study results into labeled grids whose layout mirrors the
//! bundled reference tables: integer percentages are floored, counts are
//! exact, and the top nonlinearity class (which nothing can improve past)
//! is omitted from reachability and crossover views.

use boolnl::analysis::{
    floor_percent, CrossoverMatrix, NlCensus, ReachabilityCensus, SuccessPattern,
    TransitionTable,
};
use boolnl::{ConfigOutcome, MutationPosition};

use crate::grid::Grid;
use crate::CliError;

fn nl_header(first: &str, levels: impl Iterator<Item = u32>) -> Vec<String> {
    std::iter::once(first.to_owned())
        .chain(levels.map(|l| l.to_string()))
        .collect()
}

/// Full consistency report: one row per position, delta columns filled only
/// when the operator's shift is function-independent at that position.
pub fn consistency_grid(report: &boolnl::analysis::ConsistencyReport) -> Grid {
    let len = 1usize << report.n;
    let mut header = vec![
        "descriptor".to_owned(),
        "consistent".to_owned(),
        "examined".to_owned(),
        "matches_closed_form".to_owned(),
    ];
    header.extend((0..len).map(|i| format!("d{i}")));
    let mut grid = Grid::new(header);
    grid.notes.push(format!(
        "spectrum-delta consistency of `{}` at n = {} ({})",
        report.operator.token(),
        report.n,
        if report.exhaustive {
            "exhaustive".to_owned()
        } else {
            "sampled".to_owned()
        }
    ));
    for p in &report.positions {
        let mut cells = vec![
            p.consistent.to_string(),
            p.functions_examined.to_string(),
            p.matches_closed_form
                .map_or_else(|| "-".to_owned(), |b| b.to_string()),
        ];
        match &p.delta {
            Some(delta) => cells.extend(delta.deltas().iter().map(|d| d.to_string())),
            None => cells.extend(std::iter::repeat_n("-".to_owned(), len)),
        }
        grid.push_row(p.descriptor.to_string(), cells);
    }
    grid
}

/// Bare position-by-index delta grid for single-position operators whose
/// delta is function-independent everywhere (the table 2 layout).
pub fn delta_grid(report: &boolnl::analysis::ConsistencyReport) -> Result<Grid, CliError> {
    let len = 1usize << report.n;
    let mut grid = Grid::new(nl_header("position", 0..len as u32));
    grid.notes.push(format!(
        "spectrum delta of `{}` per position, n = {}",
        report.operator.token(),
        report.n
    ));
    for p in &report.positions {
        let MutationPosition::Single(i) = p.descriptor.position() else {
            return Err(CliError::Usage(format!(
                "`{}` is not a single-position operator; the delta grid only \
                 applies to those",
                report.operator.token()
            )));
        };
        let Some(delta) = &p.delta else {
            return Err(CliError::Usage(format!(
                "operator `{}` has no function-independent delta at {}; \
                 see the full consistency report",
                report.operator.token(),
                p.descriptor
            )));
        };
        grid.push_row(
            i.to_string(),
            delta.deltas().iter().map(|d| d.to_string()).collect(),
        );
    }
    Ok(grid)
}

fn triple(counts: &boolnl::analysis::TransitionCounts) -> String {
    let total = counts.total();
    format!(
        "{}/{}/{}",
        floor_percent(counts.increase, total),
        floor_percent(counts.same, total),
        floor_percent(counts.decrease, total)
    )
}

/// Transition percentages, one cell per starting nonlinearity, each cell
/// `increase/same/decrease` floored to integer percent. Position-collapsed
/// operators give one row each; a per-position table (rotation) gives one
/// row per amount.
pub fn transition_grid(tables: &[&TransitionTable]) -> Result<Grid, CliError> {
    let Some(first) = tables.first() else {
        return Err(CliError::Usage("no transition tables to render".into()));
    };
    let mut levels: Vec<u32> = tables.iter().flat_map(|t| t.start_levels()).collect();
    levels.sort_unstable();
    levels.dedup();

    if first.per_position {
        if tables.len() != 1 {
            return Err(CliError::Usage(
                "per-position transition tables render one at a time".into(),
            ));
        }
        let mut grid = Grid::new(nl_header("amount", levels.iter().copied()));
        grid.notes.push(format!(
            "`{}` transition percentages (increase/same/decrease, floored) at n = {}",
            first.operator.token(),
            first.n
        ));
        for amount in first.positions() {
            let cells = levels
                .iter()
                .map(|&nl| {
                    first
                        .row(Some(amount), nl)
                        .map_or_else(|| "-".to_owned(), |r| triple(&r.counts))
                })
                .collect();
            grid.push_row(amount.to_string(), cells);
        }
        Ok(grid)
    } else {
        let mut grid = Grid::new(nl_header("operator", levels.iter().copied()));
        grid.notes.push(format!(
            "transition percentages (increase/same/decrease, floored) at n = {}",
            first.n
        ));
        for table in tables {
            if table.per_position {
                return Err(CliError::Usage(
                    "cannot mix collapsed and per-position transition tables".into(),
                ));
            }
            let cells = levels
                .iter()
                .map(|&nl| {
                    table
                        .row(None, nl)
                        .map_or_else(|| "-".to_owned(), |r| triple(&r.counts))
                })
                .collect();
            grid.push_row(table.operator.token(), cells);
        }
        Ok(grid)
    }
}

/// Nonlinearity classes shown in reachability and crossover views: every
/// populated class strictly below the highest populated one.
fn shown_levels(populated: impl Iterator<Item = u32>) -> Vec<u32> {
    let mut levels: Vec<u32> = populated.collect();
    levels.sort_unstable();
    levels.dedup();
    levels.pop();
    levels
}

pub fn reachability_levels(census: &ReachabilityCensus) -> Vec<u32> {
    shown_levels(
        census
            .columns()
            .iter()
            .filter(|c| c.total > 0)
            .map(|c| c.nl),
    )
}

/// Exhaustive reachability: pattern-by-nonlinearity counts plus a total row.
pub fn reachability_count_grid(census: &ReachabilityCensus) -> Grid {
    let levels = reachability_levels(census);
    let mut grid = Grid::new(nl_header("pattern", levels.iter().copied()));
    grid.notes.push(format!(
        "improvement-reachability counts at n = {} by (rotation, bit flip, two-bit flip) success",
        census.n
    ));
    for pattern in SuccessPattern::display_order() {
        let cells = levels
            .iter()
            .map(|&nl| census.count(pattern, nl).to_string())
            .collect();
        grid.push_row(pattern.label(), cells);
    }
    grid.push_row(
        "total",
        levels
            .iter()
            .map(|&nl| census.column(nl).total.to_string())
            .collect(),
    );
    grid
}

/// Sampled reachability as full-precision percentage rows, for tolerance
/// comparisons.
pub fn reachability_percent_rows(census: &ReachabilityCensus) -> Vec<(String, Vec<f64>)> {
    let levels = reachability_levels(census);
    SuccessPattern::display_order()
        .iter()
        .map(|&pattern| {
            (
                pattern.label(),
                levels
                    .iter()
                    .map(|&nl| census.percentage(pattern, nl))
                    .collect(),
            )
        })
        .collect()
}

/// Sampled reachability: percentages at fixed three-decimal precision.
pub fn reachability_percent_grid(census: &ReachabilityCensus) -> Grid {
    let levels = reachability_levels(census);
    let mut grid = Grid::new(nl_header("pattern", levels.iter().copied()));
    grid.notes.push(format!(
        "improvement-reachability percentages at n = {} by (rotation, bit flip, two-bit flip) success",
        census.n
    ));
    for (label, values) in reachability_percent_rows(census) {
        grid.push_row(label, values.iter().map(|v| format!("{v:.3}")).collect());
    }
    grid
}

pub fn crossover_levels(matrix: &CrossoverMatrix) -> Vec<u32> {
    shown_levels(matrix.levels().into_iter())
}

/// Full-precision percentage of children strictly above both parents, one
/// row per first-parent nonlinearity.
pub fn crossover_percent_rows(matrix: &CrossoverMatrix) -> Vec<(String, Vec<f64>)> {
    let levels = crossover_levels(matrix);
    levels
        .iter()
        .map(|&a| {
            (
                a.to_string(),
                levels
                    .iter()
                    .map(|&b| matrix.cell(a, b).map_or(0.0, |c| c.p_higher()))
                    .collect(),
            )
        })
        .collect()
}

/// Floored integer view of the same matrix (the published layout).
pub fn crossover_floor_grid(matrix: &CrossoverMatrix) -> Grid {
    let levels = crossover_levels(matrix);
    let mut grid = Grid::new(nl_header("nl", levels.iter().copied()));
    grid.notes.push(format!(
        "percentage of `{}` children strictly above both parents at n = {} (floored)",
        matrix.kind.token(),
        matrix.n
    ));
    for &a in &levels {
        let cells = levels
            .iter()
            .map(|&b| {
                matrix
                    .cell(a, b)
                    .map_or_else(|| "-".to_owned(), |c| floor_percent(c.higher, c.pairs).to_string())
            })
            .collect();
        grid.push_row(a.to_string(), cells);
    }
    grid
}

/// Nonlinearity distribution: one row per class.
pub fn census_grid(census: &NlCensus) -> Grid {
    let mut grid = Grid::new(vec![
        "nl".to_owned(),
        "count".to_owned(),
        "percent".to_owned(),
    ]);
    grid.notes.push(format!(
        "nonlinearity distribution at n = {} ({})",
        census.n,
        if census.exhaustive {
            "exhaustive".to_owned()
        } else {
            format!("{} draws", census.draws.unwrap_or(0))
        }
    ));
    for (nl, &count) in census.counts().iter().enumerate() {
        grid.push_row(
            nl.to_string(),
            vec![count.to_string(), format!("{:.6}", census.percentage(nl as u32))],
        );
    }
    grid
}

/// Per-run results of one search configuration.
pub fn runs_grid(outcome: &ConfigOutcome) -> Grid {
    let mut grid = Grid::new(
        ["config", "run", "final_nl", "final_fitness", "evaluations"]
            .map(str::to_owned)
            .to_vec(),
    );
    for (run, record) in outcome.records.iter().enumerate() {
        grid.push_row(
            outcome.label.clone(),
            vec![
                run.to_string(),
                record.best_nonlinearity().to_string(),
                record.best_fitness.to_string(),
                record.evaluations.to_string(),
            ],
        );
    }
    grid
}

/// Box-plot-ready summary, one row per configuration.
pub fn summary_grid(outcomes: &[ConfigOutcome]) -> Grid {
    let mut grid = Grid::new(
        [
            "config",
            "runs",
            "min_nl",
            "q1_nl",
            "median_nl",
            "q3_nl",
            "max_nl",
            "mean_nl",
            "mean_evaluations",
        ]
        .map(str::to_owned)
        .to_vec(),
    );
    for outcome in outcomes {
        let s = &outcome.stats;
        grid.push_row(
            outcome.label.clone(),
            vec![
                outcome.records.len().to_string(),
                s.min_nl.to_string(),
                format!("{:.2}", s.box_plot.q1),
                format!("{:.2}", s.median_nl),
                format!("{:.2}", s.box_plot.q3),
                s.max_nl.to_string(),
                format!("{:.4}", s.mean_nl),
                format!("{:.1}", s.mean_evaluations),
            ],
        );
    }
    grid
}
