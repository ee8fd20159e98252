//! Reachability census: for every function (or sample), which of the three
//! search operators — rotation, single-bit flip, two-bit flip — can produce
//! a neighbor of strictly higher nonlinearity. Each function contributes
//! one 3-bit success pattern, tallied against its nonlinearity; the
//! all-failure pattern marks the dead ends of any local search built from
//! these operators.
//!
//! Sampling note: uniform draws essentially never hit the tiny low-
//! nonlinearity classes (there are only `2^(n+1)` functions of
//! nonlinearity 0 among `2^(2^n)`), leaving those census columns empty.
//! Below `2^(n-2)` every function is a unique "affine ⊕ k flips" and that
//! parametrization samples the class uniformly, so the study can cover the
//! low columns exactly (small classes are enumerated outright, larger ones
//! sampled within the class) while the uniform pass covers the rest. This
//! stratified top-up is on by default for sampled plans and can be turned
//! off to get the literal uniform sample.

use super::kernels::{self, MAX_WORD_N};
use super::{nl_cap, percent, streams, SamplePlan, ENUM_CHUNK, SAMPLE_CHUNK};
use crate::error::Result;
use crate::ops::{neighborhood, MutationKind};
use crate::rng::RandomSource;
use crate::table::TruthTable;
use crate::walsh::walsh_transform;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which of the three operators can strictly raise nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuccessPattern {
    pub rotation: bool,
    pub bit_flip: bool,
    pub two_bit_flip: bool,
}

impl SuccessPattern {
    pub const COUNT: usize = 8;

    pub fn index(self) -> usize {
        ((self.rotation as usize) << 2)
            | ((self.bit_flip as usize) << 1)
            | (self.two_bit_flip as usize)
    }

    pub fn from_index(index: usize) -> Self {
        Self {
            rotation: index & 4 != 0,
            bit_flip: index & 2 != 0,
            two_bit_flip: index & 1 != 0,
        }
    }

    /// All eight patterns in the census's display order: all-success first,
    /// all-failure last.
    pub fn display_order() -> [Self; 8] {
        let mut out = [Self::from_index(0); 8];
        for (slot, index) in out.iter_mut().zip((0..8).rev()) {
            *slot = Self::from_index(index);
        }
        out
    }

    /// Compact label in (rotation, bit flip, two-bit flip) order.
    pub fn label(self) -> String {
        let mark = |b: bool| if b { '✓' } else { '✗' };
        format!(
            "({}{}{})",
            mark(self.rotation),
            mark(self.bit_flip),
            mark(self.two_bit_flip)
        )
    }
}

/// Evidence behind one per-nonlinearity column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnBasis {
    /// Every function counted.
    ExhaustiveCount,
    /// Whole nonlinearity class enumerated via its affine ⊕ k-flips form.
    StratumEnumerated,
    /// Class sampled uniformly via its affine ⊕ k-flips form.
    StratumSampled,
    /// Filled by the uniform sample over the whole space.
    UniformSample,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReachabilityColumn {
    pub nl: u32,
    /// Functions (or samples) tallied in this column.
    pub total: u64,
    pub basis: ColumnBasis,
}

/// Census options for sampled plans.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReachabilityOptions {
    /// Cover nonlinearity classes below `2^(n-2)` through their exact
    /// parametrization instead of relying on uniform draws.
    pub stratify_low_nl: bool,
    /// Enumerate a class completely when it has at most this many members.
    pub stratum_enumeration_limit: u64,
    /// Draws for each larger stratified class.
    pub stratum_draws: u64,
}

impl Default for ReachabilityOptions {
    fn default() -> Self {
        Self {
            stratify_low_nl: true,
            stratum_enumeration_limit: 400_000,
            stratum_draws: 200_000,
        }
    }
}

/// The census: counts per (success pattern, nonlinearity).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReachabilityCensus {
    pub n: u32,
    pub exhaustive: bool,
    /// Uniform draws requested by the plan (sampled mode).
    pub uniform_draws: Option<u64>,
    /// Uniform draws discarded because their column is stratified.
    pub uniform_discarded: u64,
    /// `counts[nl][pattern.index()]`.
    counts: Vec<[u64; 8]>,
    columns: Vec<ReachabilityColumn>,
}

impl ReachabilityCensus {
    pub fn count(&self, pattern: SuccessPattern, nl: u32) -> u64 {
        self.counts[nl as usize][pattern.index()]
    }

    pub fn column(&self, nl: u32) -> &ReachabilityColumn {
        &self.columns[nl as usize]
    }

    pub fn columns(&self) -> &[ReachabilityColumn] {
        &self.columns
    }

    /// Highest tabulated nonlinearity (the theoretical cap, even if the
    /// top columns are empty).
    pub fn max_nl(&self) -> u32 {
        self.columns.len() as u32 - 1
    }

    pub fn percentage(&self, pattern: SuccessPattern, nl: u32) -> f64 {
        percent(self.count(pattern, nl), self.column(nl).total)
    }
}

type Counts = Vec<[u64; 8]>;

fn merge_counts(mut a: Counts, b: Counts) -> Counts {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (ca, cb) in ra.iter_mut().zip(rb) {
            *ca += cb;
        }
    }
    a
}

/// (nonlinearity, pattern index) of a packed function.
fn probe_word(n: u32, word: u64) -> (usize, usize) {
    let len = 1usize << n;
    let mut buf = [0i32; 64];
    kernels::wht_word(n, word, &mut buf);
    let spec = &buf[..len];
    let max = kernels::max_abs(spec);
    let nl = kernels::nl_from_max(n, max) as usize;
    let bit = kernels::bitflip_can_improve(n, word, spec, max);
    let two = kernels::twobitflip_can_improve(n, word, spec, max);
    let rot = kernels::rotation_can_improve(n, word, max);
    (nl, ((rot as usize) << 2) | ((bit as usize) << 1) | (two as usize))
}

/// Generic probe through the public operator path, for `n > 6`.
fn probe_table(t: &TruthTable) -> (usize, usize) {
    let nl = walsh_transform(t).nonlinearity();
    let better =
        |kind| neighborhood(t, kind).any(|(_, out)| walsh_transform(&out).nonlinearity() > nl);
    let rot = better(MutationKind::Rotation);
    let bit = better(MutationKind::BitFlip);
    let two = better(MutationKind::TwoBitFlip);
    (
        nl as usize,
        ((rot as usize) << 2) | ((bit as usize) << 1) | (two as usize),
    )
}

/// Binomial coefficient, saturating at `u64::MAX`.
fn binomial(n: u64, k: u64) -> u64 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// The `2^(n+1)` affine functions as packed words.
fn affine_words(n: u32) -> Vec<u64> {
    let len = 1usize << n;
    let mut out = Vec::with_capacity(2 * len);
    for mask in 0..len {
        let mut word = 0u64;
        for x in 0..len {
            word |= (((x & mask).count_ones() & 1) as u64) << x;
        }
        out.push(word);
        out.push(!word & if len == 64 { !0 } else { (1u64 << len) - 1 });
    }
    out
}

/// Iterates all k-subsets of `0..len` as bit masks, lexicographically.
fn for_each_subset_mask(len: usize, k: usize, mut f: impl FnMut(u64)) {
    if k == 0 {
        f(0);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut mask = 0u64;
        for &i in &idx {
            mask |= 1 << i;
        }
        f(mask);
        // Advance to the next combination.
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] != len - k + pos {
                break;
            }
        }
        if idx[pos] == len - k + pos {
            return;
        }
        idx[pos] += 1;
        for i in pos + 1..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
}

fn random_subset_mask(len: usize, k: usize, rng: &mut RandomSource) -> u64 {
    let mut mask = 0u64;
    let mut chosen = 0;
    while chosen < k {
        let p = rng.random_range(0..len);
        if mask & (1u64 << p) == 0 {
            mask |= 1u64 << p;
            chosen += 1;
        }
    }
    mask
}

/// Runs the census with default options (stratified top-up on).
pub fn reachability_study(n: u32, plan: &SamplePlan) -> Result<ReachabilityCensus> {
    reachability_study_with(n, plan, ReachabilityOptions::default())
}

/// Runs the census with explicit options.
pub fn reachability_study_with(
    n: u32,
    plan: &SamplePlan,
    options: ReachabilityOptions,
) -> Result<ReachabilityCensus> {
    plan.validate(n)?;
    let len = 1usize << n;
    let levels = nl_cap(n) as usize + 1;
    let word_mask = if len == 64 { !0u64 } else { (1u64 << len) - 1 };

    if plan.is_exhaustive() {
        let words = 1u64 << (1u64 << n);
        let chunks = words.div_ceil(ENUM_CHUNK);
        let counts = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut counts = vec![[0u64; 8]; levels];
                let start = c * ENUM_CHUNK;
                let end = (start + ENUM_CHUNK).min(words);
                for word in start..end {
                    let (nl, pattern) = probe_word(n, word);
                    counts[nl][pattern] += 1;
                }
                counts
            })
            .reduce(|| vec![[0u64; 8]; levels], merge_counts);
        let columns = (0..levels)
            .map(|nl| ReachabilityColumn {
                nl: nl as u32,
                total: counts[nl].iter().sum(),
                basis: ColumnBasis::ExhaustiveCount,
            })
            .collect();
        return Ok(ReachabilityCensus {
            n,
            exhaustive: true,
            uniform_draws: None,
            uniform_discarded: 0,
            counts,
            columns,
        });
    }

    let draws = plan.draws(n)?.expect("sampled plan");
    let strata_bound = if options.stratify_low_nl {
        1usize << (n - 2)
    } else {
        0
    };

    // Uniform pass over the whole space; draws landing in a stratified
    // column are discarded (that column has its own exact basis).
    let chunks = draws.div_ceil(SAMPLE_CHUNK);
    let (mut counts, discarded) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![[0u64; 8]; levels];
            let mut discarded = 0u64;
            let mut rng = plan.chunk_rng(streams::REACHABILITY, c);
            let in_chunk = SAMPLE_CHUNK.min(draws - c * SAMPLE_CHUNK);
            for _ in 0..in_chunk {
                let (nl, pattern) = if n <= MAX_WORD_N {
                    probe_word(n, rng.next_u64() & word_mask)
                } else {
                    probe_table(&TruthTable::random(n, &mut rng).expect("valid n"))
                };
                if nl < strata_bound {
                    discarded += 1;
                } else {
                    counts[nl][pattern] += 1;
                }
            }
            (counts, discarded)
        })
        .reduce(
            || (vec![[0u64; 8]; levels], 0),
            |(a, da), (b, db)| (merge_counts(a, b), da + db),
        );

    let mut columns: Vec<ReachabilityColumn> = (0..levels)
        .map(|nl| ReachabilityColumn {
            nl: nl as u32,
            total: counts[nl].iter().sum(),
            basis: ColumnBasis::UniformSample,
        })
        .collect();

    // Stratified top-up of the low columns.
    let affines = if strata_bound > 0 { affine_words(n) } else { Vec::new() };
    for k in 0..strata_bound {
        let stratum_size = (2 * len as u64).saturating_mul(binomial(len as u64, k as u64));
        let enumerate = stratum_size <= options.stratum_enumeration_limit;
        let stratum_counts = if enumerate {
            affines
                .par_iter()
                .map(|&affine| {
                    let mut counts = vec![[0u64; 8]; levels];
                    for_each_subset_mask(len, k, |mask| {
                        let (nl, pattern) = probe_word(n, affine ^ mask);
                        counts[nl][pattern] += 1;
                    });
                    counts
                })
                .reduce(|| vec![[0u64; 8]; levels], merge_counts)
        } else {
            let stratum_chunks = options.stratum_draws.div_ceil(SAMPLE_CHUNK);
            (0..stratum_chunks)
                .into_par_iter()
                .map(|c| {
                    let mut counts = vec![[0u64; 8]; levels];
                    let mut rng = RandomSource::with_stream(plan.seed, streams::REACHABILITY_STRATA)
                        .derive(k as u64)
                        .derive(c);
                    let in_chunk =
                        SAMPLE_CHUNK.min(options.stratum_draws - c * SAMPLE_CHUNK);
                    for _ in 0..in_chunk {
                        let affine = affines[rng.random_range(0..affines.len())];
                        let mask = random_subset_mask(len, k, &mut rng);
                        let (nl, pattern) = probe_word(n, affine ^ mask);
                        counts[nl][pattern] += 1;
                    }
                    counts
                })
                .reduce(|| vec![[0u64; 8]; levels], merge_counts)
        };
        // Below 2^(n-2) the affine ⊕ k-flips form has nonlinearity exactly
        // k, so the stratum lands entirely in its own column.
        for (nl, row) in stratum_counts.iter().enumerate() {
            let total: u64 = row.iter().sum();
            if total > 0 {
                debug_assert_eq!(nl, k, "stratum {k} produced nonlinearity {nl}");
            }
            for (slot, c) in counts[nl].iter_mut().zip(row) {
                *slot += c;
            }
        }
        columns[k] = ReachabilityColumn {
            nl: k as u32,
            total: counts[k].iter().sum(),
            basis: if enumerate {
                ColumnBasis::StratumEnumerated
            } else {
                ColumnBasis::StratumSampled
            },
        };
    }

    Ok(ReachabilityCensus {
        n,
        exhaustive: false,
        uniform_draws: Some(draws),
        uniform_discarded: discarded,
        counts,
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(rot: bool, bit: bool, two: bool) -> SuccessPattern {
        SuccessPattern {
            rotation: rot,
            bit_flip: bit,
            two_bit_flip: two,
        }
    }

    #[test]
    fn pattern_indexing_round_trips() {
        for i in 0..8 {
            assert_eq!(SuccessPattern::from_index(i).index(), i);
        }
        let order = SuccessPattern::display_order();
        assert_eq!(order[0], pattern(true, true, true));
        assert_eq!(order[7], pattern(false, false, false));
        assert_eq!(pattern(true, true, false).label(), "(✓✓✗)");
    }

    #[test]
    fn exhaustive_n3_census_is_fully_characterized() {
        let census = reachability_study(3, &SamplePlan::exhaustive()).unwrap();
        assert!(census.exhaustive);
        // 16 affine functions at nl 0: half can improve by rotation, all by
        // both flips.
        assert_eq!(census.count(pattern(true, true, true), 0), 8);
        assert_eq!(census.count(pattern(false, true, true), 0), 8);
        // All 128 functions at nl 1 improve by single-bit flip only.
        assert_eq!(census.count(pattern(false, true, false), 1), 128);
        // The 112 maximal functions are dead ends by definition.
        assert_eq!(census.count(pattern(false, false, false), 2), 112);
        let total: u64 = (0..=census.max_nl())
            .map(|nl| census.column(nl).total)
            .sum();
        assert_eq!(total, 256);
        // Below the maximum, some operator always works.
        for nl in 0..2 {
            assert_eq!(census.count(pattern(false, false, false), nl), 0);
        }
    }

    #[test]
    fn exhaustive_n4_matches_known_cells() {
        let census = reachability_study(4, &SamplePlan::exhaustive()).unwrap();
        let totals: Vec<u64> = (0..=5).map(|nl| census.column(nl).total).collect();
        assert_eq!(totals, [32, 512, 3840, 17920, 28000, 14336]);
        // Dead ends appear exactly at nl 4.
        assert_eq!(census.count(pattern(false, false, false), 4), 1120);
        for nl in [0, 1, 2, 3, 5] {
            assert_eq!(census.count(pattern(false, false, false), nl), 0);
        }
        // At nl 5 only the single-bit flip can still improve.
        assert_eq!(census.count(pattern(false, true, false), 5), 14336);
        // A two-bit flip never succeeds where the single-bit flip fails.
        for nl in 0..=census.max_nl() {
            for rot in [false, true] {
                assert_eq!(census.count(pattern(rot, false, true), nl), 0);
            }
        }
    }

    #[test]
    fn subset_masks_cover_all_combinations() {
        let mut seen = Vec::new();
        for_each_subset_mask(5, 2, |m| seen.push(m));
        assert_eq!(seen.len(), 10);
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 10);
        assert!(seen.iter().all(|m| m.count_ones() == 2));
        let mut zero = Vec::new();
        for_each_subset_mask(5, 0, |m| zero.push(m));
        assert_eq!(zero, [0]);
    }

    #[test]
    fn stratified_sampled_census_fills_low_columns_exactly() {
        // Tiny uniform sample; the low columns still come out exact because
        // the strata are enumerated.
        let plan = SamplePlan::sampled_count(10_000, 3);
        let census = reachability_study(4, &plan).unwrap();
        assert_eq!(census.column(0).basis, ColumnBasis::StratumEnumerated);
        assert_eq!(census.column(0).total, 32);
        assert_eq!(census.column(1).total, 512);
        assert_eq!(census.column(2).total, 3840);
        assert_eq!(census.column(3).total, 17920);
        assert_eq!(census.column(4).basis, ColumnBasis::UniformSample);
        // Exact low-column counts match the exhaustive census.
        let exhaustive = reachability_study(4, &SamplePlan::exhaustive()).unwrap();
        for nl in 0..=3 {
            for p in 0..8 {
                let p = SuccessPattern::from_index(p);
                assert_eq!(census.count(p, nl), exhaustive.count(p, nl), "nl {nl}");
            }
        }
    }

    #[test]
    fn unstratified_sample_is_the_literal_uniform_draw() {
        let plan = SamplePlan::sampled_count(5_000, 9);
        let options = ReachabilityOptions {
            stratify_low_nl: false,
            ..ReachabilityOptions::default()
        };
        let census = reachability_study_with(4, &plan, options).unwrap();
        assert_eq!(census.uniform_discarded, 0);
        let tallied: u64 = (0..=census.max_nl())
            .map(|nl| census.column(nl).total)
            .sum();
        assert_eq!(tallied, 5_000);
        // Reproducible under the same seed.
        let again = reachability_study_with(4, &plan, options).unwrap();
        assert_eq!(
            census.count(pattern(false, true, false), 5),
            again.count(pattern(false, true, false), 5)
        );
    }
}
