//! Distribution of nonlinearity over the function space.

use super::kernels::{self, MAX_WORD_N};
use super::{nl_cap, percent, streams, SamplePlan, ENUM_CHUNK, SAMPLE_CHUNK};
use crate::error::Result;
use crate::table::TruthTable;
use crate::walsh::walsh_transform;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Function counts per nonlinearity value, `0..=nl_cap(n)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NlCensus {
    pub n: u32,
    pub exhaustive: bool,
    /// Sample size when not exhaustive.
    pub draws: Option<u64>,
    counts: Vec<u64>,
}

impl NlCensus {
    pub fn count(&self, nl: u32) -> u64 {
        self.counts[nl as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn percentage(&self, nl: u32) -> f64 {
        percent(self.count(nl), self.total())
    }
}

fn merge(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Tallies nonlinearity over the space per the plan.
pub fn nl_census(n: u32, plan: &SamplePlan) -> Result<NlCensus> {
    plan.validate(n)?;
    let levels = nl_cap(n) as usize + 1;
    let len = 1usize << n;

    if plan.is_exhaustive() {
        let words = 1u64 << (1u64 << n);
        let chunks = words.div_ceil(ENUM_CHUNK);
        let counts = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut counts = vec![0u64; levels];
                let start = c * ENUM_CHUNK;
                let end = (start + ENUM_CHUNK).min(words);
                for word in start..end {
                    counts[kernels::nl_of_word(n, word) as usize] += 1;
                }
                counts
            })
            .reduce(|| vec![0u64; levels], merge);
        return Ok(NlCensus {
            n,
            exhaustive: true,
            draws: None,
            counts,
        });
    }

    let draws = plan.draws(n)?.expect("sampled plan");
    let chunks = draws.div_ceil(SAMPLE_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; levels];
            let mut rng = plan.chunk_rng(streams::CENSUS, c);
            let in_chunk = SAMPLE_CHUNK.min(draws - c * SAMPLE_CHUNK);
            if n <= MAX_WORD_N {
                let mask = if len == 64 { !0u64 } else { (1u64 << len) - 1 };
                for _ in 0..in_chunk {
                    counts[kernels::nl_of_word(n, rng.next_u64() & mask) as usize] += 1;
                }
            } else {
                for _ in 0..in_chunk {
                    let t = TruthTable::random(n, &mut rng).expect("valid n");
                    counts[walsh_transform(&t).nonlinearity() as usize] += 1;
                }
            }
            counts
        })
        .reduce(|| vec![0u64; levels], merge);
    Ok(NlCensus {
        n,
        exhaustive: false,
        draws: Some(draws),
        counts,
    })
}
