//! The two objective functions, compared exactly.
//!
//! Objective one is plain nonlinearity. Objective two adds a tie-breaking
//! refinement `(2^n − #max)/2^n`, where `#max` counts spectrum entries at
//! the maximal absolute value: among equal-nonlinearity functions it favors
//! those with fewer extremal coefficients, which are closer to shedding the
//! current maximum. The refinement never reaches 1, so integer parts always
//! order the same way as objective one.
//!
//! Values are exact rationals (an integer plus a fraction with denominator
//! `2^n`); search loops never compare floats.

use crate::table::TruthTable;
use crate::walsh::{walsh_transform, WalshSpectrum};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Which objective a search optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    /// Nonlinearity alone.
    F1,
    /// Nonlinearity plus the max-count refinement.
    F2,
}

impl Objective {
    pub fn evaluate(self, tt: &TruthTable) -> FitnessValue {
        match self {
            Objective::F1 => fitness1(tt),
            Objective::F2 => fitness2(tt),
        }
    }

    pub fn of_spectrum(self, spectrum: &WalshSpectrum) -> FitnessValue {
        match self {
            Objective::F1 => FitnessValue::plain(spectrum.nonlinearity()),
            Objective::F2 => {
                let (_, count) = spectrum.max_abs_count();
                FitnessValue::refined(
                    spectrum.nonlinearity(),
                    spectrum.len() as u64 - count as u64,
                    spectrum.len() as u64,
                )
            }
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::F1 => f.write_str("f1"),
            Objective::F2 => f.write_str("f2"),
        }
    }
}

/// An exact fitness value `nl + numerator/denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitnessValue {
    nl: u32,
    numerator: u64,
    denominator: u64,
}

impl FitnessValue {
    /// Objective-one value: refinement zero.
    pub fn plain(nl: u32) -> Self {
        Self {
            nl,
            numerator: 0,
            denominator: 1,
        }
    }

    /// Objective-two value with refinement `numerator/denominator`.
    pub fn refined(nl: u32, numerator: u64, denominator: u64) -> Self {
        debug_assert!(numerator < denominator, "refinement must stay below 1");
        Self {
            nl,
            numerator,
            denominator,
        }
    }

    /// Integer nonlinearity component.
    pub fn nl(&self) -> u32 {
        self.nl
    }

    /// Refinement as an exact `(numerator, denominator)` pair in `[0, 1)`.
    pub fn refinement(&self) -> (u64, u64) {
        (self.numerator, self.denominator)
    }

    /// Approximate scalar value for reporting only.
    pub fn to_f64(&self) -> f64 {
        self.nl as f64 + self.numerator as f64 / self.denominator as f64
    }
}

impl PartialOrd for FitnessValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FitnessValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.nl.cmp(&other.nl).then_with(|| {
            // Exact cross-multiplied fraction comparison; no floats.
            let left = self.numerator as u128 * other.denominator as u128;
            let right = other.numerator as u128 * self.denominator as u128;
            left.cmp(&right)
        })
    }
}

impl fmt::Display for FitnessValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.numerator == 0 {
            write!(f, "{}", self.nl)
        } else {
            write!(f, "{}+{}/{}", self.nl, self.numerator, self.denominator)
        }
    }
}

/// Objective one: the nonlinearity itself.
pub fn fitness1(tt: &TruthTable) -> FitnessValue {
    Objective::F1.of_spectrum(&walsh_transform(tt))
}

/// Objective two: nonlinearity plus `(2^n − #max)/2^n`.
pub fn fitness2(tt: &TruthTable) -> FitnessValue {
    Objective::F2.of_spectrum(&walsh_transform(tt))
}
