//! Spectrum-delta consistency: does a mutation operator, applied at a fixed
//! position, shift the Walsh-Hadamard spectrum by the same vector no matter
//! which function it is applied to?
//!
//! Operators that drive bits to a known value (set/reset, single or
//! two-bit) are consistent — their delta depends only on the position — and
//! the study recovers the closed-form delta table empirically. The
//! flip/rotation family is not: its effect depends on the bits it finds.
//! Ineffective applications (no-op marker) are excluded; a "delta" of an
//! operator that did nothing says nothing about the operator.

use super::kernels::{self, MAX_WORD_N};
use super::{streams, SamplePlan, ENUM_CHUNK, SAMPLE_CHUNK};
use crate::error::Result;
use crate::ops::{
    apply_mutation, descriptors_for, mutation_delta, MutationDescriptor, MutationKind,
    MutationPosition,
};
use crate::table::TruthTable;
use crate::walsh::{walsh_transform, DeltaVector};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Verdict for one mutation position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositionConsistency {
    pub descriptor: MutationDescriptor,
    /// Same spectrum delta across every examined function (and at least
    /// one function was examined).
    pub consistent: bool,
    pub functions_examined: u64,
    /// The common delta, when consistent.
    pub delta: Option<DeltaVector>,
    /// Whether the empirical delta equals the operator's closed form;
    /// `None` when no closed form exists or nothing was measured.
    pub matches_closed_form: Option<bool>,
}

/// Study outcome for one operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub operator: MutationKind,
    pub n: u32,
    pub exhaustive: bool,
    pub positions: Vec<PositionConsistency>,
    pub all_consistent: bool,
}

/// Per-descriptor accumulation state; merging is commutative, so chunked
/// parallel runs are thread-count invariant.
#[derive(Debug, Clone)]
struct DescState {
    examined: u64,
    consistent: bool,
    reference: Option<Vec<i32>>,
}

impl DescState {
    fn new() -> Self {
        Self {
            examined: 0,
            consistent: true,
            reference: None,
        }
    }

    fn observe(&mut self, delta: &[i32]) {
        self.examined += 1;
        if !self.consistent {
            return;
        }
        match &self.reference {
            None => self.reference = Some(delta.to_vec()),
            Some(r) if r == delta => {}
            Some(_) => {
                self.consistent = false;
                self.reference = None;
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.examined += other.examined;
        if !self.consistent || !other.consistent {
            self.consistent = false;
            self.reference = None;
            return self;
        }
        match (&self.reference, other.reference) {
            (None, r) => self.reference = r,
            (Some(_), None) => {}
            (Some(a), Some(b)) => {
                if *a != b {
                    self.consistent = false;
                    self.reference = None;
                }
            }
        }
        self
    }
}

fn merge_states(a: Vec<DescState>, b: Vec<DescState>) -> Vec<DescState> {
    a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()
}

/// Applies one descriptor to a packed word; `None` when ineffective.
fn mutate_word(m: &MutationDescriptor, word: u64, len: usize) -> Option<u64> {
    match (m.kind(), m.position()) {
        (MutationKind::BitFlip, MutationPosition::Single(i)) => Some(word ^ (1u64 << i)),
        (MutationKind::BitSet, MutationPosition::Single(i)) => {
            (word >> i & 1 == 0).then(|| word | (1u64 << i))
        }
        (MutationKind::BitReset, MutationPosition::Single(i)) => {
            (word >> i & 1 == 1).then(|| word & !(1u64 << i))
        }
        (MutationKind::TwoBitFlip, MutationPosition::Pair(i, j)) => {
            Some(word ^ (1u64 << i) ^ (1u64 << j))
        }
        (MutationKind::TwoBitFlipIfEqual, MutationPosition::Pair(i, j)) => {
            (word >> i & 1 == word >> j & 1).then(|| word ^ (1u64 << i) ^ (1u64 << j))
        }
        (MutationKind::TwoBitSet, MutationPosition::Pair(i, j)) => {
            (word >> i & 1 == 0 && word >> j & 1 == 0)
                .then(|| word | (1u64 << i) | (1u64 << j))
        }
        (MutationKind::TwoBitReset, MutationPosition::Pair(i, j)) => {
            (word >> i & 1 == 1 && word >> j & 1 == 1)
                .then(|| word & !(1u64 << i) & !(1u64 << j))
        }
        (MutationKind::Rotation, MutationPosition::Amount(r)) => {
            Some(kernels::rotate_word(len.trailing_zeros(), word, r))
        }
        _ => unreachable!("descriptor shape validated at construction"),
    }
}

fn observe_word(
    descriptors: &[MutationDescriptor],
    n: u32,
    word: u64,
    states: &mut [DescState],
) {
    let len = 1usize << n;
    let mut base = [0i32; 64];
    kernels::wht_word(n, word, &mut base);
    let mut mutated_spec = [0i32; 64];
    let mut delta = [0i32; 64];
    for (m, state) in descriptors.iter().zip(states.iter_mut()) {
        if state.examined > 0 && !state.consistent {
            continue; // verdict settled; counting further adds nothing
        }
        if let Some(mutated) = mutate_word(m, word, len) {
            kernels::wht_word(n, mutated, &mut mutated_spec);
            for a in 0..len {
                delta[a] = mutated_spec[a] - base[a];
            }
            state.observe(&delta[..len]);
        }
    }
}

fn observe_table(
    descriptors: &[MutationDescriptor],
    table: &TruthTable,
    states: &mut [DescState],
) {
    let base = walsh_transform(table);
    for (m, state) in descriptors.iter().zip(states.iter_mut()) {
        if state.examined > 0 && !state.consistent {
            continue;
        }
        if let Some(mutated) = apply_mutation(table, m)
            .expect("canonical descriptors are in range")
            .changed()
        {
            let spec = walsh_transform(&mutated);
            let delta: Vec<i32> = spec
                .coeffs()
                .iter()
                .zip(base.coeffs())
                .map(|(a, b)| a - b)
                .collect();
            state.observe(&delta);
        }
    }
}

/// Runs the consistency study for one operator.
pub fn consistency_study(
    kind: MutationKind,
    n: u32,
    plan: &SamplePlan,
) -> Result<ConsistencyReport> {
    plan.validate(n)?;
    let len = 1usize << n;
    let descriptors: Vec<MutationDescriptor> = descriptors_for(kind, len).collect();
    let fresh = || vec![DescState::new(); descriptors.len()];

    let states = if plan.is_exhaustive() {
        let words = 1u64 << (1u64 << n);
        let chunks = words.div_ceil(ENUM_CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut states = fresh();
                let start = c * ENUM_CHUNK;
                let end = (start + ENUM_CHUNK).min(words);
                for word in start..end {
                    observe_word(&descriptors, n, word, &mut states);
                }
                states
            })
            .reduce(fresh, merge_states)
    } else {
        let draws = plan.draws(n)?.expect("sampled plan");
        let chunks = draws.div_ceil(SAMPLE_CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut states = fresh();
                let mut rng = plan.chunk_rng(streams::CONSISTENCY, c);
                let in_chunk = SAMPLE_CHUNK.min(draws - c * SAMPLE_CHUNK);
                if n <= MAX_WORD_N {
                    let mask = if len == 64 { !0u64 } else { (1u64 << len) - 1 };
                    for _ in 0..in_chunk {
                        observe_word(&descriptors, n, rng.next_u64() & mask, &mut states);
                    }
                } else {
                    for _ in 0..in_chunk {
                        let t = TruthTable::random(n, &mut rng).expect("valid n");
                        observe_table(&descriptors, &t, &mut states);
                    }
                }
                states
            })
            .reduce(fresh, merge_states)
    };

    let positions: Vec<PositionConsistency> = descriptors
        .iter()
        .zip(states)
        .map(|(m, state)| {
            let consistent = state.consistent && state.examined > 0;
            let delta = if consistent {
                state
                    .reference
                    .map(|d| DeltaVector::new(n, d).expect("delta has spectrum length"))
            } else {
                None
            };
            let matches_closed_form = delta
                .as_ref()
                .and_then(|d| mutation_delta(m, n).map(|closed| closed == *d));
            PositionConsistency {
                descriptor: *m,
                consistent,
                functions_examined: state.examined,
                delta,
                matches_closed_form,
            }
        })
        .collect();
    let all_consistent = positions.iter().all(|p| p.consistent);
    Ok(ConsistencyReport {
        operator: kind,
        n,
        exhaustive: plan.is_exhaustive(),
        positions,
        all_consistent,
    })
}
