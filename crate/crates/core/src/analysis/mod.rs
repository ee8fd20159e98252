//! Landscape studies over the space of n-variable Boolean functions.
//!
//! Five studies, each exhaustive for small `n` and sampled above:
//!
//! * [`consistency_study`] — does a mutation operator shift the spectrum by
//!   the same delta for every function (at a fixed position)?
//! * [`transition_study`] — empirical probabilities that one mutation
//!   raises / keeps / lowers nonlinearity, by starting nonlinearity.
//! * [`reachability_study`] — for each function, which of the three search
//!   operators (rotation, bit flip, two-bit flip) can reach a strictly
//!   higher nonlinearity; tallied as an 8-pattern census.
//! * [`crossover_study`] — probability that a crossover child beats both
//!   parents, stratified by the parents' nonlinearity pair.
//! * [`nl_census`] — the distribution of nonlinearity itself.
//!
//! Every study is deterministic given its [`SamplePlan`]: work is split
//! into fixed-size chunks, each chunk owns a random stream derived from the
//! plan seed and the chunk index, and partial tallies merge commutatively,
//! so results are independent of the worker-thread count.

mod census;
mod consistency;
mod crossover;
mod kernels;
mod reachability;
mod transition;

pub use census::{nl_census, NlCensus};
pub use consistency::{consistency_study, ConsistencyReport, PositionConsistency};
pub use crossover::{crossover_study, CrossoverCell, CrossoverMatrix, CrossoverSampling};
pub use kernels::{
    bitflip_can_improve, bitflip_new_max, max_abs, nl_of_word, rotate_word,
    rotation_can_improve, twobitflip_can_improve, twobitflip_new_max, wht_word, MAX_WORD_N,
};
pub use reachability::{
    reachability_study, reachability_study_with, ColumnBasis, ReachabilityCensus,
    ReachabilityColumn, ReachabilityOptions, SuccessPattern,
};
pub use transition::{
    transition_study, CollapseCheck, TransitionCounts, TransitionRow, TransitionTable,
};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::walsh::covering_radius_bound;
use serde::{Deserialize, Serialize};

/// Whether a study enumerates the whole space or draws from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Exhaustive,
    Sampled,
}

/// How a study covers the function space: full enumeration, or a seeded
/// sample sized by an absolute count or a fraction of the space.
///
/// Exhaustive plans are accepted for `n ≤ 4` (65,536 functions); `n = 5`
/// (2^32 functions) additionally requires the explicit
/// [`allow_large_exhaustive`](Self::with_large_exhaustive) override, and
/// larger spaces cannot be enumerated at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub mode: SampleMode,
    /// Fraction of the whole space to draw (sampled mode).
    pub fraction: Option<f64>,
    /// Absolute number of draws (sampled mode). For crossover studies this
    /// is the number of pair evaluations per parent-nonlinearity cell.
    pub count: Option<u64>,
    pub seed: u64,
    pub allow_large_exhaustive: bool,
}

impl SamplePlan {
    pub fn exhaustive() -> Self {
        Self {
            mode: SampleMode::Exhaustive,
            fraction: None,
            count: None,
            seed: 0,
            allow_large_exhaustive: false,
        }
    }

    pub fn sampled_count(count: u64, seed: u64) -> Self {
        Self {
            mode: SampleMode::Sampled,
            fraction: None,
            count: Some(count),
            seed,
            allow_large_exhaustive: false,
        }
    }

    pub fn sampled_fraction(fraction: f64, seed: u64) -> Self {
        Self {
            mode: SampleMode::Sampled,
            fraction: Some(fraction),
            count: None,
            seed,
            allow_large_exhaustive: false,
        }
    }

    /// Permits exhaustive enumeration at `n = 5` (2^32 functions; hours of
    /// compute).
    pub fn with_large_exhaustive(mut self) -> Self {
        self.allow_large_exhaustive = true;
        self
    }

    pub fn is_exhaustive(&self) -> bool {
        self.mode == SampleMode::Exhaustive
    }

    /// Checks the plan against a concrete variable count.
    pub fn validate(&self, n: u32) -> Result<()> {
        match self.mode {
            SampleMode::Exhaustive => {
                if n > 5 {
                    return Err(Error::PlanInvalid {
                        reason: format!("exhaustive enumeration is impossible for n = {n} (2^{} functions)", 1u64 << n),
                    });
                }
                if n == 5 && !self.allow_large_exhaustive {
                    return Err(Error::PlanInvalid {
                        reason: "exhaustive n = 5 covers 2^32 functions; pass the explicit \
                                 large-exhaustive override to run it"
                            .into(),
                    });
                }
                Ok(())
            }
            SampleMode::Sampled => match (self.fraction, self.count) {
                (Some(_), Some(_)) | (None, None) => Err(Error::PlanInvalid {
                    reason: "sampled plans take exactly one of fraction or count".into(),
                }),
                (Some(f), None) if !(f > 0.0 && f <= 1.0) => Err(Error::PlanInvalid {
                    reason: format!("sample fraction {f} outside (0, 1]"),
                }),
                (None, Some(0)) => Err(Error::PlanInvalid {
                    reason: "sample count must be positive".into(),
                }),
                _ => Ok(()),
            },
        }
    }

    /// Number of draws a sampled plan resolves to over the space of
    /// `2^(2^n)` functions; `None` for exhaustive plans.
    pub fn draws(&self, n: u32) -> Result<Option<u64>> {
        self.validate(n)?;
        if self.is_exhaustive() {
            return Ok(None);
        }
        if let Some(count) = self.count {
            return Ok(Some(count));
        }
        let fraction = self.fraction.expect("validated");
        let space = (2.0f64).powi(1i32 << n.min(12));
        let draws = (fraction * space).ceil();
        if !draws.is_finite() || draws > 1e15 {
            return Err(Error::PlanInvalid {
                reason: format!(
                    "fraction {fraction} of the n = {n} space resolves to an impractical \
                     sample size"
                ),
            });
        }
        Ok(Some(draws as u64))
    }

    /// Random source for one fixed work chunk of one study; deterministic
    /// in (seed, study, chunk) and independent of thread scheduling.
    pub(crate) fn chunk_rng(&self, study: u64, chunk: u64) -> RandomSource {
        RandomSource::with_stream(self.seed, study).derive(chunk)
    }
}

/// Stream namespace per study, so studies sharing a seed draw
/// independent samples.
pub(crate) mod streams {
    pub const CONSISTENCY: u64 = 1;
    pub const TRANSITION: u64 = 2;
    pub const REACHABILITY: u64 = 3;
    pub const CROSSOVER: u64 = 4;
    pub const CENSUS: u64 = 5;
    pub const REACHABILITY_STRATA: u64 = 6;
}

/// Largest nonlinearity any n-variable function can have (the floor of the
/// covering-radius upper bound); studies size their per-nonlinearity
/// columns as `0..=nl_cap(n)`.
pub fn nl_cap(n: u32) -> u32 {
    covering_radius_bound(n).floor() as u32
}

/// Exact percentage as a float; 0 for an empty denominator.
pub fn percent(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 * 100.0 / total as f64
    }
}

/// Integer percentage truncated toward zero — the convention the table
/// views use.
pub fn floor_percent(count: u64, total: u64) -> u64 {
    if total == 0 {
        0
    } else {
        (count as u128 * 100 / total as u128) as u64
    }
}

/// Draws per fixed sampling chunk; the constant is part of the
/// reproducibility contract (changing it changes which stream draws which
/// sample).
pub(crate) const SAMPLE_CHUNK: u64 = 65_536;

/// Words per fixed enumeration chunk for exhaustive word-domain studies.
pub(crate) const ENUM_CHUNK: u64 = 4_096;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_plan_rejects_large_spaces() {
        let plan = SamplePlan::exhaustive();
        assert!(plan.validate(4).is_ok());
        assert!(plan.validate(5).is_err());
        assert!(plan.with_large_exhaustive().validate(5).is_ok());
        assert!(plan.with_large_exhaustive().validate(6).is_err());
    }

    #[test]
    fn sampled_plan_needs_exactly_one_size() {
        assert!(SamplePlan::sampled_count(10, 1).validate(5).is_ok());
        assert!(SamplePlan::sampled_fraction(0.01, 1).validate(5).is_ok());
        let mut both = SamplePlan::sampled_count(10, 1);
        both.fraction = Some(0.5);
        assert!(both.validate(5).is_err());
        let mut neither = SamplePlan::sampled_count(10, 1);
        neither.count = None;
        assert!(neither.validate(5).is_err());
        assert!(SamplePlan::sampled_fraction(1.5, 1).validate(5).is_err());
        assert!(SamplePlan::sampled_count(0, 1).validate(5).is_err());
    }

    #[test]
    fn fraction_resolves_to_ceil_of_space_share() {
        let plan = SamplePlan::sampled_fraction(0.01, 7);
        assert_eq!(plan.draws(5).unwrap(), Some(42_949_673));
        let plan = SamplePlan::sampled_fraction(0.5, 7);
        assert_eq!(plan.draws(3).unwrap(), Some(128));
        assert_eq!(SamplePlan::exhaustive().draws(4).unwrap(), None);
    }

    #[test]
    fn nl_caps_match_known_bounds() {
        assert_eq!(nl_cap(3), 2);
        assert_eq!(nl_cap(4), 6);
        assert_eq!(nl_cap(5), 13);
        assert_eq!(nl_cap(8), 120);
    }

    #[test]
    fn percent_conventions() {
        assert_eq!(floor_percent(575, 1000), 57);
        assert_eq!(floor_percent(25, 1000), 2);
        assert_eq!(floor_percent(0, 0), 0);
        assert!((percent(575, 1000) - 57.5).abs() < 1e-12);
    }

    #[test]
    fn chunk_rngs_differ_by_chunk_and_study() {
        use rand::RngCore;
        let plan = SamplePlan::sampled_count(10, 42);
        let mut a = plan.chunk_rng(streams::CENSUS, 0);
        let mut b = plan.chunk_rng(streams::CENSUS, 1);
        let mut c = plan.chunk_rng(streams::CROSSOVER, 0);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_ne!(x, y);
        assert_ne!(x, z);
        let mut a2 = plan.chunk_rng(streams::CENSUS, 0);
        assert_eq!(a2.next_u64(), x);
    }
}
