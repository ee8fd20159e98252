//! Nonlinearity-transition statistics: for one mutation operator, the
//! empirical probability that applying it raises, keeps, or lowers
//! nonlinearity, tallied by the starting nonlinearity.
//!
//! Ineffective applications (the operator's no-op marker, e.g. setting an
//! already-set bit) are excluded — the statistics describe mutations that
//! actually happened. For position-addressed operators the per-position
//! statistics coincide (any two positions are related by an affine input
//! substitution, which preserves nonlinearity), so the table collapses
//! them into one row per starting nonlinearity after verifying that
//! exhaustive counts really are position-independent. Rotation keeps one
//! row per amount: different amounts genuinely behave differently.

use super::kernels::{self, MAX_WORD_N};
use super::{nl_cap, percent, streams, SampleMode, SamplePlan, ENUM_CHUNK, SAMPLE_CHUNK};
use crate::error::{Error, Result};
use crate::ops::{apply_mutation, descriptors_for, MutationDescriptor, MutationKind};
use crate::table::TruthTable;
use crate::walsh::walsh_transform;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Outcome tallies of one table cell.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCounts {
    pub increase: u64,
    pub same: u64,
    pub decrease: u64,
}

impl TransitionCounts {
    pub fn total(&self) -> u64 {
        self.increase + self.same + self.decrease
    }

    /// (increase, same, decrease) as full-precision percentages.
    pub fn percentages(&self) -> (f64, f64, f64) {
        let t = self.total();
        (
            percent(self.increase, t),
            percent(self.same, t),
            percent(self.decrease, t),
        )
    }

    fn add(&mut self, other: &TransitionCounts) {
        self.increase += other.increase;
        self.same += other.same;
        self.decrease += other.decrease;
    }
}

/// One row: outcome counts for mutations applied at `position` (rotation
/// amount, or `None` when positions are collapsed) to functions of
/// nonlinearity `start_nl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionRow {
    pub position: Option<usize>,
    pub start_nl: u32,
    pub counts: TransitionCounts,
}

/// How position-independence was established before collapsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseCheck {
    /// Exhaustive run; per-position counts were bit-for-bit equal.
    ExactlyVerified,
    /// No collapse: rows are keyed per position (rotation amounts).
    PerPosition,
    /// Sampled run; positions pooled without an exactness claim (sampling
    /// noise makes per-position counts differ even when the underlying
    /// probabilities agree).
    SampledUnverified,
}

/// Transition statistics for one operator at one variable count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionTable {
    pub operator: MutationKind,
    pub n: u32,
    pub per_position: bool,
    pub collapse_check: CollapseCheck,
    pub rows: Vec<TransitionRow>,
}

impl TransitionTable {
    pub fn row(&self, position: Option<usize>, start_nl: u32) -> Option<&TransitionRow> {
        self.rows
            .iter()
            .find(|r| r.position == position && r.start_nl == start_nl)
    }

    /// Distinct starting nonlinearities present, ascending.
    pub fn start_levels(&self) -> Vec<u32> {
        let mut levels: Vec<u32> = self.rows.iter().map(|r| r.start_nl).collect();
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    /// Distinct position keys present, ascending (empty when collapsed).
    pub fn positions(&self) -> Vec<usize> {
        let mut keys: Vec<usize> = self.rows.iter().filter_map(|r| r.position).collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

/// Per-chunk accumulator: `[descriptor][start_nl] -> counts`.
type Acc = Vec<Vec<TransitionCounts>>;

fn new_acc(descriptor_count: usize, levels: usize) -> Acc {
    vec![vec![TransitionCounts::default(); levels]; descriptor_count]
}

fn merge_acc(mut a: Acc, b: Acc) -> Acc {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (ca, cb) in ra.iter_mut().zip(rb) {
            ca.add(&cb);
        }
    }
    a
}

#[inline]
fn classify(old_max: i32, new_max: i32) -> usize {
    // Lower max |W| means higher nonlinearity.
    match new_max.cmp(&old_max) {
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Equal => 1,
        std::cmp::Ordering::Greater => 2,
    }
}

#[inline]
fn bump(counts: &mut TransitionCounts, class: usize) {
    match class {
        0 => counts.increase += 1,
        1 => counts.same += 1,
        _ => counts.decrease += 1,
    }
}

/// Tallies every effective mutation of `kind` on the packed function.
fn tally_word(kind: MutationKind, n: u32, word: u64, acc: &mut Acc) {
    let len = 1usize << n;
    let mut buf = [0i32; 64];
    kernels::wht_word(n, word, &mut buf);
    let spec = &buf[..len];
    let old_max = kernels::max_abs(spec);
    let nl0 = kernels::nl_from_max(n, old_max) as usize;

    if kind.takes_single() {
        for i in 0..len {
            let bit = (word >> i) & 1;
            let effective = match kind {
                MutationKind::BitFlip => true,
                MutationKind::BitSet => bit == 0,
                MutationKind::BitReset => bit == 1,
                _ => unreachable!(),
            };
            if !effective {
                continue;
            }
            // An effective set/reset IS a flip of that bit.
            let new_max = kernels::bitflip_new_max(n, word, spec, i);
            bump(&mut acc[i][nl0], classify(old_max, new_max));
        }
    } else if kind.takes_pair() {
        let mut idx = 0usize;
        for i in 0..len {
            let bi = (word >> i) & 1;
            for j in i + 1..len {
                let bj = (word >> j) & 1;
                let effective = match kind {
                    MutationKind::TwoBitFlip => true,
                    MutationKind::TwoBitFlipIfEqual => bi == bj,
                    MutationKind::TwoBitSet => bi == 0 && bj == 0,
                    MutationKind::TwoBitReset => bi == 1 && bj == 1,
                    _ => unreachable!(),
                };
                if effective {
                    let new_max = kernels::twobitflip_new_max(n, word, spec, i, j);
                    bump(&mut acc[idx][nl0], classify(old_max, new_max));
                }
                idx += 1;
            }
        }
    } else {
        let mut rbuf = [0i32; 64];
        for r in 1..len {
            kernels::wht_word(n, kernels::rotate_word(n, word, r), &mut rbuf);
            let new_max = kernels::max_abs(&rbuf[..len]);
            bump(&mut acc[r - 1][nl0], classify(old_max, new_max));
        }
    }
}

/// Generic-path tally for `n > 6`, through the public operator semantics.
fn tally_table(
    descriptors: &[MutationDescriptor],
    table: &TruthTable,
    acc: &mut Acc,
) {
    let spec = walsh_transform(table);
    let old_max = spec.max_abs() as i32;
    let nl0 = spec.nonlinearity() as usize;
    for (idx, m) in descriptors.iter().enumerate() {
        if let Some(mutated) = apply_mutation(table, m)
            .expect("canonical descriptors are in range")
            .changed()
        {
            let new_max = walsh_transform(&mutated).max_abs() as i32;
            bump(&mut acc[idx][nl0], classify(old_max, new_max));
        }
    }
}

fn descriptor_count(kind: MutationKind, len: usize) -> usize {
    if kind.takes_single() {
        len
    } else if kind.takes_pair() {
        len * (len - 1) / 2
    } else {
        len - 1
    }
}

/// Runs the transition study for one operator.
///
/// Exhaustive plans enumerate every function (word-packed for `n ≤ 6`);
/// sampled plans draw functions uniformly (each bit an independent coin).
/// For non-rotation operators the per-position tallies are collapsed; an
/// exhaustive run first verifies they are identical and reports
/// [`Error::CollapseViolation`] otherwise.
pub fn transition_study(
    kind: MutationKind,
    n: u32,
    plan: &SamplePlan,
) -> Result<TransitionTable> {
    plan.validate(n)?;
    let len = 1usize << n;
    let levels = nl_cap(n) as usize + 1;
    let desc_count = descriptor_count(kind, len);

    let acc = match plan.mode {
        SampleMode::Exhaustive => {
            let words = 1u64 << (1u64 << n);
            let chunks = words.div_ceil(ENUM_CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut acc = new_acc(desc_count, levels);
                    let start = c * ENUM_CHUNK;
                    let end = (start + ENUM_CHUNK).min(words);
                    for word in start..end {
                        tally_word(kind, n, word, &mut acc);
                    }
                    acc
                })
                .reduce(|| new_acc(desc_count, levels), merge_acc)
        }
        SampleMode::Sampled => {
            let draws = plan.draws(n)?.expect("sampled");
            let chunks = draws.div_ceil(SAMPLE_CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut acc = new_acc(desc_count, levels);
                    let mut rng = plan.chunk_rng(streams::TRANSITION, c);
                    let in_chunk = SAMPLE_CHUNK.min(draws - c * SAMPLE_CHUNK);
                    if n <= MAX_WORD_N {
                        let mask = if len == 64 { !0u64 } else { (1u64 << len) - 1 };
                        for _ in 0..in_chunk {
                            tally_word(kind, n, rng.next_u64() & mask, &mut acc);
                        }
                    } else {
                        let descriptors: Vec<_> = descriptors_for(kind, len).collect();
                        for _ in 0..in_chunk {
                            let t = TruthTable::random(n, &mut rng).expect("valid n");
                            tally_table(&descriptors, &t, &mut acc);
                        }
                    }
                    acc
                })
                .reduce(|| new_acc(desc_count, levels), merge_acc)
        }
    };

    if kind == MutationKind::Rotation {
        let mut rows = Vec::new();
        for (idx, per_nl) in acc.iter().enumerate() {
            for (nl, counts) in per_nl.iter().enumerate() {
                if counts.total() > 0 {
                    rows.push(TransitionRow {
                        position: Some(idx + 1),
                        start_nl: nl as u32,
                        counts: *counts,
                    });
                }
            }
        }
        return Ok(TransitionTable {
            operator: kind,
            n,
            per_position: true,
            collapse_check: CollapseCheck::PerPosition,
            rows,
        });
    }

    // Collapse positions. Exhaustive runs must show identical per-position
    // counts — pooling silently would paper over a real asymmetry.
    let collapse_check = if plan.is_exhaustive() {
        for nl in 0..levels {
            let reference = acc[0][nl];
            for (idx, per_nl) in acc.iter().enumerate().skip(1) {
                if per_nl[nl] != reference {
                    return Err(Error::CollapseViolation {
                        operator: kind.token().to_string(),
                        detail: format!(
                            "start nl {nl}: position 0 counted {reference:?} but position \
                             {idx} counted {:?}",
                            per_nl[nl]
                        ),
                    });
                }
            }
        }
        CollapseCheck::ExactlyVerified
    } else {
        CollapseCheck::SampledUnverified
    };

    let mut rows = Vec::new();
    for nl in 0..levels {
        let mut pooled = TransitionCounts::default();
        for per_nl in &acc {
            pooled.add(&per_nl[nl]);
        }
        if pooled.total() > 0 {
            rows.push(TransitionRow {
                position: None,
                start_nl: nl as u32,
                counts: pooled,
            });
        }
    }
    Ok(TransitionTable {
        operator: kind,
        n,
        per_position: false,
        collapse_check,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::floor_percent;

    fn floor_row(table: &TransitionTable, nl: u32) -> (u64, u64, u64) {
        let c = table.row(None, nl).expect("row present").counts;
        let t = c.total();
        (
            floor_percent(c.increase, t),
            floor_percent(c.same, t),
            floor_percent(c.decrease, t),
        )
    }

    #[test]
    fn bitflip_n3_exhaustive_basics() {
        let table =
            transition_study(MutationKind::BitFlip, 3, &SamplePlan::exhaustive()).unwrap();
        assert!(!table.per_position);
        assert_eq!(table.collapse_check, CollapseCheck::ExactlyVerified);
        // 256 functions × 8 positions, every mutation effective.
        let examined: u64 = table.rows.iter().map(|r| r.counts.total()).sum();
        assert_eq!(examined, 256 * 8);
        // A single flip never leaves nonlinearity unchanged.
        assert!(table.rows.iter().all(|r| r.counts.same == 0));
        // From the maximum (nl 2) the only way is down; from 0 the only way
        // is up.
        let top = table.row(None, 2).unwrap().counts;
        assert_eq!(top.increase, 0);
        let bottom = table.row(None, 0).unwrap().counts;
        assert_eq!(bottom.decrease, 0);
    }

    #[test]
    fn bitflip_n4_reproduces_known_percentages() {
        let table =
            transition_study(MutationKind::BitFlip, 4, &SamplePlan::exhaustive()).unwrap();
        assert_eq!(floor_row(&table, 0), (100, 0, 0));
        assert_eq!(floor_row(&table, 4), (48, 0, 52));
        assert_eq!(floor_row(&table, 6), (0, 0, 100));
        for nl in 0..=6 {
            assert_eq!(table.row(None, nl).unwrap().counts.same, 0, "nl {nl}");
        }
    }

    #[test]
    fn twobitflip_n4_known_cells() {
        let table =
            transition_study(MutationKind::TwoBitFlip, 4, &SamplePlan::exhaustive()).unwrap();
        // Exact fractions at start nl 3: 40 / 57.5 / 2.5 percent.
        let c = table.row(None, 3).unwrap().counts;
        let t = c.total();
        assert_eq!((c.increase * 1000) / t, 400);
        assert_eq!((c.same * 1000) / t, 575);
        assert_eq!((c.decrease * 1000) / t, 25);
    }

    #[test]
    fn rotation_n4_multiples_of_four_never_change_nonlinearity() {
        let table =
            transition_study(MutationKind::Rotation, 4, &SamplePlan::exhaustive()).unwrap();
        assert!(table.per_position);
        for amount in [4usize, 8, 12] {
            for nl in table.start_levels() {
                let c = table.row(Some(amount), nl).unwrap().counts;
                assert_eq!(c.increase, 0, "amount {amount} nl {nl}");
                assert_eq!(c.decrease, 0, "amount {amount} nl {nl}");
            }
        }
    }

    #[test]
    fn rotation_n4_odd_amounts_agree_and_match_known_row() {
        let table =
            transition_study(MutationKind::Rotation, 4, &SamplePlan::exhaustive()).unwrap();
        let row_of = |amount: usize| -> Vec<TransitionCounts> {
            table
                .start_levels()
                .into_iter()
                .map(|nl| table.row(Some(amount), nl).unwrap().counts)
                .collect()
        };
        let odd = row_of(1);
        for amount in [3usize, 5, 7, 9, 11, 13, 15] {
            assert_eq!(row_of(amount), odd, "amount {amount}");
        }
        let even_non_multiple = row_of(2);
        for amount in [6usize, 10, 14] {
            assert_eq!(row_of(amount), even_non_multiple, "amount {amount}");
        }
        // Known floored percentages for odd amounts at start nl 0 and 4.
        let pct = |c: TransitionCounts| {
            let t = c.total();
            (
                floor_percent(c.increase, t),
                floor_percent(c.same, t),
                floor_percent(c.decrease, t),
            )
        };
        assert_eq!(pct(odd[0]), (75, 25, 0));
        assert_eq!(pct(odd[4]), (2, 89, 7));
        assert_eq!(pct(even_non_multiple[0]), (50, 50, 0));
    }

    #[test]
    fn conditional_operator_skips_noops_and_still_collapses() {
        let table =
            transition_study(MutationKind::BitSet, 3, &SamplePlan::exhaustive()).unwrap();
        assert_eq!(table.collapse_check, CollapseCheck::ExactlyVerified);
        // Only half of all (function, position) pairs have a 0-bit to set.
        let examined: u64 = table.rows.iter().map(|r| r.counts.total()).sum();
        assert_eq!(examined, 256 * 8 / 2);
    }

    #[test]
    fn sampled_study_is_reproducible_and_close_to_exhaustive() {
        let plan = SamplePlan::sampled_count(20_000, 11);
        let a = transition_study(MutationKind::BitFlip, 4, &plan).unwrap();
        let b = transition_study(MutationKind::BitFlip, 4, &plan).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.counts, rb.counts);
        }
        assert_eq!(a.collapse_check, CollapseCheck::SampledUnverified);
        // The dominant cell (start nl 4) should be near its exact value.
        let (inc, _, _) = a.row(None, 4).unwrap().counts.percentages();
        assert!((inc - 48.0).abs() < 3.0, "sampled increase {inc}");
    }
}
