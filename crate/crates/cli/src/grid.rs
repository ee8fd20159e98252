//! A small labeled table: one header row, one label per data row, string
//! cells. Covers every CSV this tool reads or writes, including the bundled
//! reference tables.

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    /// Leading comment lines (written with a `#` prefix, skipped on parse).
    pub notes: Vec<String>,
    /// First entry names the row-label column.
    pub header: Vec<String>,
    /// `(label, cells)`; `cells.len() == header.len() - 1`.
    pub rows: Vec<(String, Vec<String>)>,
}

impl Grid {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            notes: Vec::new(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, label: impl Into<String>, cells: Vec<String>) {
        let label = label.into();
        debug_assert_eq!(
            cells.len() + 1,
            self.header.len(),
            "row {label} width must match the header"
        );
        self.rows.push((label, cells));
    }

    pub fn cell(&self, label: &str, column: &str) -> Option<&str> {
        let col = self.header.iter().skip(1).position(|h| h == column)?;
        let (_, cells) = self.rows.iter().find(|(l, _)| l == label)?;
        cells.get(col).map(String::as_str)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for note in &self.notes {
            out.push_str("# ");
            out.push_str(note);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for (label, cells) in &self.rows {
            out.push_str(label);
            for cell in cells {
                out.push(',');
                out.push_str(cell);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the `to_csv` dialect: `#` comments and blank lines are skipped,
    /// cells never contain commas.
    pub fn parse(name: &str, text: &str) -> Result<Self, CliError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Usage(format!("{name}: empty table")))?
            .split(',')
            .map(str::to_owned)
            .collect();
        let mut grid = Grid::new(header);
        for line in lines {
            let mut cells: Vec<String> = line.split(',').map(str::to_owned).collect();
            if cells.len() != grid.header.len() {
                return Err(CliError::Usage(format!(
                    "{name}: row `{line}` has {} cells, header has {}",
                    cells.len(),
                    grid.header.len()
                )));
            }
            let label = cells.remove(0);
            grid.rows.push((label, cells));
        }
        Ok(grid)
    }
}

/// One cell that disagrees between a produced table and its reference.
#[derive(Debug, Clone)]
pub struct Deviation {
    pub row: String,
    pub column: String,
    pub produced: String,
    pub reference: String,
    /// Absolute numeric difference, when the comparison was numeric.
    pub delta: Option<f64>,
}

impl std::fmt::Display for Deviation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "row {} column {}: produced {} vs reference {}",
            self.row, self.column, self.produced, self.reference
        )?;
        if let Some(d) = self.delta {
            write!(f, " (|diff| = {d:.3})")?;
        }
        Ok(())
    }
}

fn check_shape(produced: &Grid, reference: &Grid) -> Result<(), CliError> {
    if produced.header != reference.header {
        return Err(CliError::Usage(format!(
            "table shape mismatch: produced header [{}] vs reference [{}]",
            produced.header.join(" "),
            reference.header.join(" ")
        )));
    }
    let labels = |g: &Grid| g.rows.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>();
    if labels(produced) != labels(reference) {
        return Err(CliError::Usage(format!(
            "table shape mismatch: produced rows [{}] vs reference [{}]",
            labels(produced).join(" "),
            labels(reference).join(" ")
        )));
    }
    Ok(())
}

/// Cell-for-cell textual equality.
pub fn diff_exact(produced: &Grid, reference: &Grid) -> Result<Vec<Deviation>, CliError> {
    check_shape(produced, reference)?;
    let mut out = Vec::new();
    for ((label, ours), (_, theirs)) in produced.rows.iter().zip(&reference.rows) {
        for (col, (a, b)) in produced.header[1..].iter().zip(ours.iter().zip(theirs)) {
            if a != b {
                let delta = match (a.parse::<f64>(), b.parse::<f64>()) {
                    (Ok(x), Ok(y)) => Some((x - y).abs()),
                    _ => None,
                };
                out.push(Deviation {
                    row: label.clone(),
                    column: col.clone(),
                    produced: a.clone(),
                    reference: b.clone(),
                    delta,
                });
            }
        }
    }
    Ok(out)
}

/// Numeric comparison of full-precision values against a reference grid:
/// every cell must lie within `tolerance` (absolute, in the units of the
/// table — percentage points for percent tables).
pub fn diff_tolerance(
    produced: &[(String, Vec<f64>)],
    reference: &Grid,
    tolerance: f64,
) -> Result<Vec<Deviation>, CliError> {
    let labels: Vec<&String> = produced.iter().map(|(l, _)| l).collect();
    let ref_labels: Vec<&String> = reference.rows.iter().map(|(l, _)| l).collect();
    if labels != ref_labels {
        return Err(CliError::Usage(format!(
            "table shape mismatch: produced rows [{}] vs reference [{}]",
            labels.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "),
            ref_labels.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ")
        )));
    }
    let mut out = Vec::new();
    for ((label, ours), (_, theirs)) in produced.iter().zip(&reference.rows) {
        if ours.len() != theirs.len() {
            return Err(CliError::Usage(format!(
                "table shape mismatch in row {label}: {} vs {} cells",
                ours.len(),
                theirs.len()
            )));
        }
        for (col, (value, cell)) in reference.header[1..].iter().zip(ours.iter().zip(theirs)) {
            let target: f64 = cell.parse().map_err(|_| {
                CliError::Usage(format!(
                    "reference cell ({label}, {col}) is not numeric: `{cell}`"
                ))
            })?;
            let delta = (value - target).abs();
            if delta > tolerance {
                out.push(Deviation {
                    row: label.clone(),
                    column: col.clone(),
                    produced: format!("{value:.3}"),
                    reference: cell.clone(),
                    delta: Some(delta),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Grid {
        let mut g = Grid::new(vec!["k".into(), "a".into(), "b".into()]);
        g.notes.push("demo".into());
        g.push_row("r1", vec!["1".into(), "2".into()]);
        g.push_row("r2", vec!["3".into(), "4".into()]);
        g
    }

    #[test]
    fn csv_round_trip() {
        let g = sample();
        let text = g.to_csv();
        assert!(text.starts_with("# demo\nk,a,b\n"));
        let parsed = Grid::parse("demo", &text).unwrap();
        assert_eq!(parsed.header, g.header);
        assert_eq!(parsed.rows, g.rows);
    }

    #[test]
    fn exact_diff_reports_the_changed_cell_only() {
        let g = sample();
        let mut h = sample();
        h.rows[1].1[0] = "5".into();
        let devs = diff_exact(&g, &h).unwrap();
        assert_eq!(devs.len(), 1);
        assert_eq!(devs[0].row, "r2");
        assert_eq!(devs[0].column, "a");
        assert_eq!(devs[0].delta, Some(2.0));
    }

    #[test]
    fn shape_mismatch_is_an_error_not_a_deviation() {
        let g = sample();
        let mut h = sample();
        h.rows.pop();
        assert!(diff_exact(&g, &h).is_err());
    }

    #[test]
    fn tolerance_diff_uses_absolute_distance() {
        let reference = sample();
        let rows = vec![
            ("r1".to_string(), vec![1.4, 2.0]),
            ("r2".to_string(), vec![3.0, 6.5]),
        ];
        let devs = diff_tolerance(&rows, &reference, 0.5).unwrap();
        assert_eq!(devs.len(), 1);
        assert_eq!(devs[0].row, "r2");
        assert_eq!(devs[0].column, "b");
    }
}
