//! Bundled reference tables and their per-table comparison rules.

use crate::grid::Grid;
use crate::CliError;

/// Raw CSV text of a bundled reference table.
pub fn golden_csv(table: u8) -> Option<&'static str> {
    Some(match table {
        2 => include_str!("../data/table2.csv"),
        3 => include_str!("../data/table3.csv"),
        4 => include_str!("../data/table4.csv"),
        5 => include_str!("../data/table5.csv"),
        6 => include_str!("../data/table6.csv"),
        7 => include_str!("../data/table7.csv"),
        8 => include_str!("../data/table8.csv"),
        _ => return None,
    })
}

pub fn golden_grid(table: u8) -> Result<Grid, CliError> {
    let text = golden_csv(table)
        .ok_or_else(|| CliError::Usage(format!("no bundled reference table {table}")))?;
    Grid::parse(&format!("reference table {table}"), text)
}

/// How a reproduction is judged against its reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchRule {
    /// Every cell must match exactly (deterministic studies).
    Exact,
    /// Every cell must lie within this many percentage points, compared at
    /// full precision (sampled studies).
    WithinPercentagePoints(f64),
}

/// Tables the `reproduce` subcommand can rebuild, with their rules.
pub fn reproduce_rule(table: u8) -> Option<MatchRule> {
    match table {
        2 | 3 | 4 | 5 => Some(MatchRule::Exact),
        7 | 8 => Some(MatchRule::WithinPercentagePoints(3.0)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_table_parses() {
        for t in [2u8, 3, 4, 5, 6, 7, 8] {
            let grid = golden_grid(t).unwrap();
            assert!(!grid.rows.is_empty(), "table {t} has rows");
            for (label, cells) in &grid.rows {
                assert_eq!(
                    cells.len() + 1,
                    grid.header.len(),
                    "table {t} row {label} is rectangular"
                );
            }
        }
    }

    #[test]
    fn reference_shapes_match_their_layouts() {
        assert_eq!(golden_grid(2).unwrap().rows.len(), 8);
        assert_eq!(golden_grid(3).unwrap().rows.len(), 2);
        assert_eq!(golden_grid(4).unwrap().rows.len(), 15);
        assert_eq!(golden_grid(5).unwrap().rows.len(), 9); // 8 patterns + total
        assert_eq!(golden_grid(6).unwrap().rows.len(), 8);
        assert_eq!(golden_grid(7).unwrap().rows.len(), 6);
        assert_eq!(golden_grid(8).unwrap().rows.len(), 6);
        assert_eq!(golden_grid(6).unwrap().header.len(), 13); // pattern + nl 0..=11
    }

    #[test]
    fn only_reproducible_tables_have_rules() {
        assert_eq!(reproduce_rule(2), Some(MatchRule::Exact));
        assert_eq!(reproduce_rule(6), None);
        assert_eq!(
            reproduce_rule(7),
            Some(MatchRule::WithinPercentagePoints(3.0))
        );
        assert_eq!(reproduce_rule(1), None);
        assert_eq!(reproduce_rule(9), None);
    }
}
