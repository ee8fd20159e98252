//! Crossover outcome matrices: for parents grouped by their nonlinearity
//! pair, how often is the child's nonlinearity strictly above both
//! parents', strictly below both, or in between?
//!
//! At `n ≤ 4` the study bins the whole function space by nonlinearity once
//! and then covers each (nl₁, nl₂) cell directly — rare classes (such as
//! the 32 functions of nonlinearity 0 at n = 4) get exactly as many pair
//! evaluations as every other cell, which uniform pair sampling alone could
//! never deliver. A cell's quota is spent on whole enumeration passes over
//! the cell plus a uniformly drawn remainder, so small cells are evaluated
//! exactly. For `n ≥ 5` the classes cannot be materialized and the study
//! falls back to uniform pair draws binned after the fact.

use super::kernels::{self, MAX_WORD_N};
use super::{nl_cap, percent, streams, SamplePlan};
use crate::error::{Error, Result};
use crate::ops::{crossover, CrossoverKind};
use crate::rng::RandomSource;
use crate::table::TruthTable;
use crate::walsh::walsh_transform;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Tallies for one (nl₁, nl₂) parent cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossoverCell {
    /// First parent's nonlinearity (parent order matters for single-point
    /// forms).
    pub nl_first: u32,
    pub nl_second: u32,
    pub pairs: u64,
    /// Child strictly above both parents.
    pub higher: u64,
    /// Child strictly below both parents.
    pub lower: u64,
    /// Everything else (including ties with a parent).
    pub between: u64,
}

impl CrossoverCell {
    pub fn p_higher(&self) -> f64 {
        percent(self.higher, self.pairs)
    }

    pub fn p_lower(&self) -> f64 {
        percent(self.lower, self.pairs)
    }

    pub fn p_between(&self) -> f64 {
        percent(self.between, self.pairs)
    }
}

/// How the matrix's pair evaluations were allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverSampling {
    /// Every ordered pair of every cell, exactly once.
    Exhaustive,
    /// A fixed number of pair evaluations per cell (stratified).
    PerCell { pairs_per_cell: u64 },
    /// Uniform pair draws over the whole space, binned afterwards.
    UniformPairs { draws: u64 },
}

/// Crossover outcome matrix for one operator at one variable count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossoverMatrix {
    pub n: u32,
    pub kind: CrossoverKind,
    pub sampling: CrossoverSampling,
    cells: Vec<CrossoverCell>,
}

impl CrossoverMatrix {
    pub fn cell(&self, nl_first: u32, nl_second: u32) -> Option<&CrossoverCell> {
        self.cells
            .iter()
            .find(|c| c.nl_first == nl_first && c.nl_second == nl_second)
    }

    pub fn cells(&self) -> &[CrossoverCell] {
        &self.cells
    }

    /// Distinct parent nonlinearity levels present, ascending.
    pub fn levels(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .cells
            .iter()
            .flat_map(|c| [c.nl_first, c.nl_second])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[inline]
fn word_mask(len: usize) -> u64 {
    if len == 64 {
        !0
    } else {
        (1u64 << len) - 1
    }
}

#[inline]
fn splice(w1: u64, w2: u64, cut: usize, full: u64) -> u64 {
    let low = (1u64 << cut) - 1;
    (w1 & low) | (w2 & !low & full)
}

const EVEN_MASK: u64 = 0x5555_5555_5555_5555;

/// Child of two packed parents; mirrors the table-level operator (pinned by
/// the equivalence test below).
#[inline]
fn child_word(kind: CrossoverKind, len: usize, w1: u64, w2: u64, rng: &mut RandomSource) -> u64 {
    let full = word_mask(len);
    match kind {
        CrossoverKind::SinglePointMid => splice(w1, w2, len / 2, full),
        CrossoverKind::SinglePointRandom => splice(w1, w2, rng.random_range(1..len), full),
        CrossoverKind::UniformEvenOdd => (w1 & EVEN_MASK & full) | (w2 & !EVEN_MASK & full),
        CrossoverKind::UniformRandom => {
            let m = rng.next_u64() & full;
            (w1 & m) | (w2 & !m & full)
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Outcomes {
    pairs: u64,
    higher: u64,
    lower: u64,
    between: u64,
}

impl Outcomes {
    #[inline]
    fn record(&mut self, child_nl: u32, lo: u32, hi: u32) {
        self.pairs += 1;
        if child_nl > hi {
            self.higher += 1;
        } else if child_nl < lo {
            self.lower += 1;
        } else {
            self.between += 1;
        }
    }

    fn scaled(self, factor: u64) -> Self {
        Self {
            pairs: self.pairs * factor,
            higher: self.higher * factor,
            lower: self.lower * factor,
            between: self.between * factor,
        }
    }

    fn add(&mut self, o: Outcomes) {
        self.pairs += o.pairs;
        self.higher += o.higher;
        self.lower += o.lower;
        self.between += o.between;
    }
}

/// All functions of each nonlinearity, as packed words (`n ≤ 4`).
fn nl_buckets(n: u32) -> Vec<Vec<u64>> {
    let levels = nl_cap(n) as usize + 1;
    let mut buckets = vec![Vec::new(); levels];
    let words = 1u64 << (1u64 << n);
    for word in 0..words {
        buckets[kernels::nl_of_word(n, word) as usize].push(word);
    }
    buckets
}

fn cell_outcomes(
    kind: CrossoverKind,
    n: u32,
    first: &[u64],
    second: &[u64],
    evaluations: u64,
    rng: &mut RandomSource,
    lo: u32,
    hi: u32,
) -> Outcomes {
    let len = 1usize << n;
    let population = first.len() as u64 * second.len() as u64;
    let full_passes = evaluations / population;
    let remainder = evaluations % population;
    let mut total = Outcomes::default();

    if full_passes > 0 {
        // Deterministic operators give identical passes; run one and scale.
        let runs = if kind.is_deterministic() { 1 } else { full_passes };
        let mut passes = Outcomes::default();
        for _ in 0..runs {
            for &w1 in first {
                for &w2 in second {
                    let child = child_word(kind, len, w1, w2, rng);
                    passes.record(kernels::nl_of_word(n, child), lo, hi);
                }
            }
        }
        if kind.is_deterministic() {
            passes = passes.scaled(full_passes);
        }
        total.add(passes);
    }
    for _ in 0..remainder {
        let u = rng.random_range(0..population);
        let w1 = first[(u / second.len() as u64) as usize];
        let w2 = second[(u % second.len() as u64) as usize];
        let child = child_word(kind, len, w1, w2, rng);
        total.record(kernels::nl_of_word(n, child), lo, hi);
    }
    total
}

/// Runs the crossover study.
///
/// Plans size the work by `count`: pair evaluations **per cell** when the
/// space can be binned (`n ≤ 4`), total uniform pair draws otherwise.
/// Exhaustive plans (every ordered pair once) are accepted for `n ≤ 4`.
pub fn crossover_study(
    kind: CrossoverKind,
    n: u32,
    plan: &SamplePlan,
) -> Result<CrossoverMatrix> {
    plan.validate(n)?;
    if plan.fraction.is_some() {
        return Err(Error::PlanInvalid {
            reason: "crossover studies are sized by count (pair evaluations per cell, or \
                     total draws for n ≥ 5), not by fraction"
                .into(),
        });
    }

    if n <= 4 {
        let buckets = nl_buckets(n);
        let sampling = if plan.is_exhaustive() {
            CrossoverSampling::Exhaustive
        } else {
            CrossoverSampling::PerCell {
                pairs_per_cell: plan.count.expect("validated sampled plan"),
            }
        };
        let levels = buckets.len() as u32;
        let mut cell_keys = Vec::new();
        for a in 0..levels {
            for b in 0..levels {
                if !buckets[a as usize].is_empty() && !buckets[b as usize].is_empty() {
                    cell_keys.push((a, b));
                }
            }
        }
        let cells: Vec<CrossoverCell> = cell_keys
            .into_par_iter()
            .map(|(a, b)| {
                let first = &buckets[a as usize];
                let second = &buckets[b as usize];
                let population = first.len() as u64 * second.len() as u64;
                let evaluations = match sampling {
                    CrossoverSampling::Exhaustive => population,
                    CrossoverSampling::PerCell { pairs_per_cell } => pairs_per_cell,
                    CrossoverSampling::UniformPairs { .. } => unreachable!(),
                };
                let mut rng = plan.chunk_rng(streams::CROSSOVER, (a * levels + b) as u64);
                let (lo, hi) = (a.min(b), a.max(b));
                let o = cell_outcomes(kind, n, first, second, evaluations, &mut rng, lo, hi);
                CrossoverCell {
                    nl_first: a,
                    nl_second: b,
                    pairs: o.pairs,
                    higher: o.higher,
                    lower: o.lower,
                    between: o.between,
                }
            })
            .collect();
        return Ok(CrossoverMatrix {
            n,
            kind,
            sampling,
            cells,
        });
    }

    if plan.is_exhaustive() {
        return Err(Error::PlanInvalid {
            reason: format!(
                "exhaustive crossover enumeration at n = {n} means 2^{} ordered pairs",
                2 * (1u64 << n)
            ),
        });
    }

    // Uniform pair draws, binned by the observed parent nonlinearities.
    let draws = plan.count.expect("validated sampled plan");
    let levels = nl_cap(n) as usize + 1;
    let chunks = draws.div_ceil(super::SAMPLE_CHUNK);
    let grid = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut grid = vec![Outcomes::default(); levels * levels];
            let mut rng = plan.chunk_rng(streams::CROSSOVER, c);
            let in_chunk = super::SAMPLE_CHUNK.min(draws - c * super::SAMPLE_CHUNK);
            let len = 1usize << n;
            for _ in 0..in_chunk {
                let (a, b, child_nl) = if n <= MAX_WORD_N {
                    let full = word_mask(len);
                    let w1 = rng.next_u64() & full;
                    let w2 = rng.next_u64() & full;
                    let child = child_word(kind, len, w1, w2, &mut rng);
                    (
                        kernels::nl_of_word(n, w1),
                        kernels::nl_of_word(n, w2),
                        kernels::nl_of_word(n, child),
                    )
                } else {
                    let t1 = TruthTable::random(n, &mut rng).expect("valid n");
                    let t2 = TruthTable::random(n, &mut rng).expect("valid n");
                    let child = crossover(&t1, &t2, kind, &mut rng).expect("same n");
                    (
                        walsh_transform(&t1).nonlinearity(),
                        walsh_transform(&t2).nonlinearity(),
                        walsh_transform(&child).nonlinearity(),
                    )
                };
                grid[a as usize * levels + b as usize].record(child_nl, a.min(b), a.max(b));
            }
            grid
        })
        .reduce(
            || vec![Outcomes::default(); levels * levels],
            |mut x, y| {
                for (cx, cy) in x.iter_mut().zip(y) {
                    cx.add(cy);
                }
                x
            },
        );

    let mut cells = Vec::new();
    for a in 0..levels {
        for b in 0..levels {
            let o = grid[a * levels + b];
            if o.pairs > 0 {
                cells.push(CrossoverCell {
                    nl_first: a as u32,
                    nl_second: b as u32,
                    pairs: o.pairs,
                    higher: o.higher,
                    lower: o.lower,
                    between: o.between,
                });
            }
        }
    }
    Ok(CrossoverMatrix {
        n,
        kind,
        sampling: CrossoverSampling::UniformPairs { draws },
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    #[test]
    fn packed_children_match_table_crossover() {
        let mut rng = RandomSource::new(31);
        for _ in 0..200 {
            let t1 = TruthTable::random(4, &mut rng).unwrap();
            let t2 = TruthTable::random(4, &mut rng).unwrap();
            let (w1, w2) = (t1.as_word().unwrap(), t2.as_word().unwrap());
            for kind in [CrossoverKind::SinglePointMid, CrossoverKind::UniformEvenOdd] {
                let via_tables = crossover(&t1, &t2, kind, &mut rng).unwrap();
                let via_words = child_word(kind, 16, w1, w2, &mut rng);
                assert_eq!(via_words, via_tables.as_word().unwrap(), "{kind}");
            }
        }
    }

    #[test]
    fn exhaustive_n3_matrix_totals_cover_every_ordered_pair() {
        let m = crossover_study(CrossoverKind::SinglePointMid, 3, &SamplePlan::exhaustive())
            .unwrap();
        let total: u64 = m.cells().iter().map(|c| c.pairs).sum();
        assert_eq!(total, 256 * 256);
        for c in m.cells() {
            assert_eq!(c.higher + c.lower + c.between, c.pairs);
        }
    }

    #[test]
    fn the_two_deterministic_kinds_agree_exactly_when_exhaustive() {
        // The mid-cut and even/odd masks are related by an input-bit
        // permutation, which preserves nonlinearity, so their exhaustive
        // matrices are identical.
        let plan = SamplePlan::exhaustive();
        let sp = crossover_study(CrossoverKind::SinglePointMid, 3, &plan).unwrap();
        let ue = crossover_study(CrossoverKind::UniformEvenOdd, 3, &plan).unwrap();
        for (a, b) in sp.cells().iter().zip(ue.cells()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn small_cells_are_evaluated_exactly_under_per_cell_quotas() {
        // 2048 evaluations over the 1024-pair (0,0) cell = two full passes.
        let plan = SamplePlan::sampled_count(2048, 1);
        let m = crossover_study(CrossoverKind::SinglePointMid, 4, &plan).unwrap();
        let cell = m.cell(0, 0).unwrap();
        assert_eq!(cell.pairs, 2048);
        assert_eq!(cell.p_higher(), 87.5);
        // Affine × affine children can never fall below both parents.
        assert_eq!(cell.lower, 0);
    }

    #[test]
    fn per_cell_study_is_reproducible() {
        let plan = SamplePlan::sampled_count(500, 77);
        let a = crossover_study(CrossoverKind::UniformRandom, 4, &plan).unwrap();
        let b = crossover_study(CrossoverKind::UniformRandom, 4, &plan).unwrap();
        assert_eq!(a.cells(), b.cells());
    }

    #[test]
    fn fraction_plans_are_rejected() {
        let plan = SamplePlan::sampled_fraction(0.1, 1);
        assert!(crossover_study(CrossoverKind::SinglePointMid, 4, &plan).is_err());
    }

    #[test]
    fn uniform_pair_mode_bins_by_observed_nonlinearity() {
        let plan = SamplePlan::sampled_count(20_000, 5);
        let m = crossover_study(CrossoverKind::UniformEvenOdd, 5, &plan).unwrap();
        match m.sampling {
            CrossoverSampling::UniformPairs { draws } => assert_eq!(draws, 20_000),
            other => panic!("unexpected sampling {other:?}"),
        }
        let total: u64 = m.cells().iter().map(|c| c.pairs).sum();
        assert_eq!(total, 20_000);
        // Random n = 5 functions sit in the mid nonlinearity range.
        assert!(m.cell(8, 8).is_some());
    }
}
