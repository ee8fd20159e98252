//! Mutation and crossover operators on truth tables.
//!
//! Eight mutations: single-bit set/reset/flip, the four two-bit variants,
//! and cyclic rotation. The set/reset families change the spectrum by a
//! function-independent delta (closed form below); the flip/rotation
//! families do not. Two crossovers come in deterministic study variants
//! (mid cut, even/odd mask) and randomized search variants (random cut,
//! per-bit coin), plus a range-shuffling "mixing" mutation used by the
//! genetic algorithm.

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::table::TruthTable;
use crate::walsh::DeltaVector;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The eight mutation operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MutationKind {
    BitSet,
    BitReset,
    BitFlip,
    TwoBitFlip,
    TwoBitFlipIfEqual,
    TwoBitSet,
    TwoBitReset,
    Rotation,
}

impl MutationKind {
    pub const ALL: [MutationKind; 8] = [
        MutationKind::BitSet,
        MutationKind::BitReset,
        MutationKind::BitFlip,
        MutationKind::TwoBitFlip,
        MutationKind::TwoBitFlipIfEqual,
        MutationKind::TwoBitSet,
        MutationKind::TwoBitReset,
        MutationKind::Rotation,
    ];

    /// Kinds addressed by a single bit index.
    pub fn takes_single(self) -> bool {
        matches!(
            self,
            MutationKind::BitSet | MutationKind::BitReset | MutationKind::BitFlip
        )
    }

    /// Kinds addressed by an unordered bit pair.
    pub fn takes_pair(self) -> bool {
        matches!(
            self,
            MutationKind::TwoBitFlip
                | MutationKind::TwoBitFlipIfEqual
                | MutationKind::TwoBitSet
                | MutationKind::TwoBitReset
        )
    }

    /// Kinds addressed by a rotation amount.
    pub fn takes_amount(self) -> bool {
        matches!(self, MutationKind::Rotation)
    }

    /// Whether the spectrum delta is function-independent (closed form).
    pub fn has_closed_form_delta(self) -> bool {
        matches!(
            self,
            MutationKind::BitSet
                | MutationKind::BitReset
                | MutationKind::TwoBitSet
                | MutationKind::TwoBitReset
        )
    }

    /// Canonical textual token.
    pub fn token(self) -> &'static str {
        match self {
            MutationKind::BitSet => "bitset",
            MutationKind::BitReset => "bitreset",
            MutationKind::BitFlip => "bitflip",
            MutationKind::TwoBitFlip => "2bitflip",
            MutationKind::TwoBitFlipIfEqual => "2bitflipeq",
            MutationKind::TwoBitSet => "2bitset",
            MutationKind::TwoBitReset => "2bitreset",
            MutationKind::Rotation => "rot",
        }
    }

    /// Short token used in operator-combination labels ("2bit/rot/bit").
    pub fn combo_token(self) -> &'static str {
        match self {
            MutationKind::BitFlip => "bit",
            MutationKind::TwoBitFlip => "2bit",
            MutationKind::Rotation => "rot",
            other => other.token(),
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for MutationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bitset" => MutationKind::BitSet,
            "bitreset" => MutationKind::BitReset,
            "bitflip" | "bit" => MutationKind::BitFlip,
            "2bitflip" | "2bit" => MutationKind::TwoBitFlip,
            "2bitflipeq" => MutationKind::TwoBitFlipIfEqual,
            "2bitset" => MutationKind::TwoBitSet,
            "2bitreset" => MutationKind::TwoBitReset,
            "rot" | "rotation" => MutationKind::Rotation,
            _ => {
                return Err(Error::ParseFailed {
                    what: "mutation kind",
                    text: s.to_owned(),
                })
            }
        })
    }
}

/// Position payload of a mutation: one index, an ordered pair, or an amount.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MutationPosition {
    Single(usize),
    Pair(usize, usize),
    Amount(usize),
}

/// A fully addressed mutation: operator plus position payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MutationDescriptor {
    kind: MutationKind,
    position: MutationPosition,
}

impl MutationDescriptor {
    /// Validates that the payload shape matches the kind and that pairs are
    /// strictly ordered (`i < j`; pairs are unordered sets in meaning).
    pub fn new(kind: MutationKind, position: MutationPosition) -> Result<Self> {
        let shape_ok = match position {
            MutationPosition::Single(_) => kind.takes_single(),
            MutationPosition::Pair(i, j) => {
                if i >= j {
                    return Err(Error::ParseFailed {
                        what: "mutation pair (requires i < j)",
                        text: format!("{i},{j}"),
                    });
                }
                kind.takes_pair()
            }
            MutationPosition::Amount(r) => {
                if r == 0 {
                    return Err(Error::ParseFailed {
                        what: "rotation amount (requires r ≥ 1)",
                        text: r.to_string(),
                    });
                }
                kind.takes_amount()
            }
        };
        if !shape_ok {
            return Err(Error::ParseFailed {
                what: "mutation descriptor (payload shape mismatch)",
                text: format!("{kind} with {position:?}"),
            });
        }
        Ok(Self { kind, position })
    }

    pub fn single(kind: MutationKind, index: usize) -> Result<Self> {
        Self::new(kind, MutationPosition::Single(index))
    }

    pub fn pair(kind: MutationKind, i: usize, j: usize) -> Result<Self> {
        Self::new(kind, MutationPosition::Pair(i, j))
    }

    pub fn rotation(amount: usize) -> Result<Self> {
        Self::new(MutationKind::Rotation, MutationPosition::Amount(amount))
    }

    pub fn kind(&self) -> MutationKind {
        self.kind
    }

    pub fn position(&self) -> MutationPosition {
        self.position
    }
}

impl fmt::Display for MutationDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            MutationPosition::Single(i) => write!(f, "{}:{}", self.kind.token(), i),
            MutationPosition::Pair(i, j) => write!(f, "{}:{},{}", self.kind.token(), i, j),
            MutationPosition::Amount(r) => write!(f, "{}:{}", self.kind.token(), r),
        }
    }
}

impl FromStr for MutationDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = || Error::ParseFailed {
            what: "mutation descriptor",
            text: s.to_owned(),
        };
        let (kind_text, payload) = s.split_once(':').ok_or_else(parse_err)?;
        let kind: MutationKind = kind_text.parse()?;
        if kind.takes_pair() {
            let (i, j) = payload.split_once(',').ok_or_else(parse_err)?;
            let i = i.trim().parse().map_err(|_| parse_err())?;
            let j = j.trim().parse().map_err(|_| parse_err())?;
            Self::pair(kind, i, j)
        } else {
            let value = payload.trim().parse().map_err(|_| parse_err())?;
            match kind {
                MutationKind::Rotation => Self::rotation(value),
                _ => Self::single(kind, value),
            }
        }
    }
}

/// Result of applying a mutation: a fresh table, or a marker that the
/// mutation has no effect at this position (e.g. setting an already-set
/// bit). The marker is distinct from "changed to an equal table" so callers
/// can skip ineffective mutations without spending an evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutationOutcome {
    Changed(TruthTable),
    NoOp,
}

impl MutationOutcome {
    pub fn is_noop(&self) -> bool {
        matches!(self, MutationOutcome::NoOp)
    }

    pub fn changed(self) -> Option<TruthTable> {
        match self {
            MutationOutcome::Changed(t) => Some(t),
            MutationOutcome::NoOp => None,
        }
    }
}

fn check_position(index: usize, len: usize) -> Result<()> {
    if index >= len {
        Err(Error::PositionOutOfRange {
            position: index,
            len,
        })
    } else {
        Ok(())
    }
}

/// Applies a mutation, never modifying the input.
///
/// Semantics per operator: flip inverts; set drives to 1 (no-op if already
/// 1); reset drives to 0 (no-op if already 0); the two-bit set/reset
/// variants require BOTH bits to change, else no-op; two-bit-flip-if-equal
/// flips both bits only when they agree; rotation cyclically shifts the
/// table left by the amount (entry at index k moves to (k − r) mod 2^n) and
/// is always a change, never a marker.
pub fn apply_mutation(tt: &TruthTable, m: &MutationDescriptor) -> Result<MutationOutcome> {
    let len = tt.len();
    Ok(match (m.kind, m.position) {
        (MutationKind::BitFlip, MutationPosition::Single(i)) => {
            check_position(i, len)?;
            let mut out = tt.clone();
            out.flip(i);
            MutationOutcome::Changed(out)
        }
        (MutationKind::BitSet, MutationPosition::Single(i)) => {
            check_position(i, len)?;
            if tt.get(i) {
                MutationOutcome::NoOp
            } else {
                let mut out = tt.clone();
                out.set(i, true);
                MutationOutcome::Changed(out)
            }
        }
        (MutationKind::BitReset, MutationPosition::Single(i)) => {
            check_position(i, len)?;
            if !tt.get(i) {
                MutationOutcome::NoOp
            } else {
                let mut out = tt.clone();
                out.set(i, false);
                MutationOutcome::Changed(out)
            }
        }
        (MutationKind::TwoBitFlip, MutationPosition::Pair(i, j)) => {
            check_position(i, len)?;
            check_position(j, len)?;
            let mut out = tt.clone();
            out.flip(i);
            out.flip(j);
            MutationOutcome::Changed(out)
        }
        (MutationKind::TwoBitFlipIfEqual, MutationPosition::Pair(i, j)) => {
            check_position(i, len)?;
            check_position(j, len)?;
            if tt.get(i) != tt.get(j) {
                MutationOutcome::NoOp
            } else {
                let mut out = tt.clone();
                out.flip(i);
                out.flip(j);
                MutationOutcome::Changed(out)
            }
        }
        (MutationKind::TwoBitSet, MutationPosition::Pair(i, j)) => {
            check_position(i, len)?;
            check_position(j, len)?;
            if tt.get(i) || tt.get(j) {
                MutationOutcome::NoOp
            } else {
                let mut out = tt.clone();
                out.set(i, true);
                out.set(j, true);
                MutationOutcome::Changed(out)
            }
        }
        (MutationKind::TwoBitReset, MutationPosition::Pair(i, j)) => {
            check_position(i, len)?;
            check_position(j, len)?;
            if !tt.get(i) || !tt.get(j) {
                MutationOutcome::NoOp
            } else {
                let mut out = tt.clone();
                out.set(i, false);
                out.set(j, false);
                MutationOutcome::Changed(out)
            }
        }
        (MutationKind::Rotation, MutationPosition::Amount(r)) => {
            check_position(r, len)?; // amounts live in [1, 2^n)
            MutationOutcome::Changed(tt.rotate_left(r))
        }
        // Descriptor construction enforces shape; this is unreachable.
        _ => unreachable!("descriptor shape validated at construction"),
    })
}

/// Every effective mutation of one kind, in canonical deterministic order:
/// single positions ascending, pairs lexicographic with `i < j`, rotation
/// amounts ascending `1..2^n`. No-op results are skipped.
pub fn neighborhood<'a>(
    tt: &'a TruthTable,
    kind: MutationKind,
) -> Box<dyn Iterator<Item = (MutationDescriptor, TruthTable)> + 'a> {
    let descriptors = descriptors_for(kind, tt.len());
    Box::new(descriptors.filter_map(move |m| {
        apply_mutation(tt, &m)
            .expect("canonical descriptors are in range")
            .changed()
            .map(|out| (m, out))
    }))
}

/// Canonical descriptor enumeration for a kind over a table of length `len`.
pub fn descriptors_for(
    kind: MutationKind,
    len: usize,
) -> Box<dyn Iterator<Item = MutationDescriptor>> {
    if kind.takes_single() {
        Box::new((0..len).map(move |i| MutationDescriptor::single(kind, i).unwrap()))
    } else if kind.takes_pair() {
        Box::new(
            (0..len).flat_map(move |i| {
                (i + 1..len).map(move |j| MutationDescriptor::pair(kind, i, j).unwrap())
            }),
        )
    } else {
        Box::new((1..len).map(|r| MutationDescriptor::rotation(r).unwrap()))
    }
}

/// The function-independent spectrum delta of a set/reset mutation, or
/// `None` for the flip/rotation families whose effect depends on current
/// bit values.
///
/// Setting bit `i` (0 → 1) adds `−2·(−1)^(a·i)` at every spectrum index
/// `a`; resetting negates that; the two-bit variants add both single-bit
/// patterns.
pub fn mutation_delta(m: &MutationDescriptor, n: u32) -> Option<DeltaVector> {
    let len = 1usize << n;
    let single = |index: usize, sign: i32| {
        assert!(index < len, "position {index} out of range for length {len}");
        let deltas = (0..len)
            .map(|a| {
                let parity = (a & index).count_ones() & 1;
                let chi = if parity == 0 { 1 } else { -1 };
                -2 * sign * chi
            })
            .collect();
        DeltaVector::new(n, deltas).expect("length matches by construction")
    };
    match (m.kind, m.position) {
        (MutationKind::BitSet, MutationPosition::Single(i)) => Some(single(i, 1)),
        (MutationKind::BitReset, MutationPosition::Single(i)) => Some(single(i, -1)),
        (MutationKind::TwoBitSet, MutationPosition::Pair(i, j)) => {
            Some(single(i, 1).sum(&single(j, 1)).unwrap())
        }
        (MutationKind::TwoBitReset, MutationPosition::Pair(i, j)) => {
            Some(single(i, -1).sum(&single(j, -1)).unwrap())
        }
        _ => None,
    }
}

/// The four crossover operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrossoverKind {
    /// Deterministic: first half from parent 1, second half from parent 2.
    SinglePointMid,
    /// Deterministic: even indices from parent 1, odd from parent 2.
    UniformEvenOdd,
    /// Cut point drawn uniformly from `[1, 2^n − 1]`.
    SinglePointRandom,
    /// Every bit from either parent with probability 1/2.
    UniformRandom,
}

impl CrossoverKind {
    pub fn is_deterministic(self) -> bool {
        matches!(
            self,
            CrossoverKind::SinglePointMid | CrossoverKind::UniformEvenOdd
        )
    }

    pub fn token(self) -> &'static str {
        match self {
            CrossoverKind::SinglePointMid => "single-mid",
            CrossoverKind::UniformEvenOdd => "uniform-evenodd",
            CrossoverKind::SinglePointRandom => "single-random",
            CrossoverKind::UniformRandom => "uniform-random",
        }
    }
}

impl fmt::Display for CrossoverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for CrossoverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "single-mid" => CrossoverKind::SinglePointMid,
            "uniform-evenodd" => CrossoverKind::UniformEvenOdd,
            "single-random" => CrossoverKind::SinglePointRandom,
            "uniform-random" => CrossoverKind::UniformRandom,
            _ => {
                return Err(Error::ParseFailed {
                    what: "crossover kind",
                    text: s.to_owned(),
                })
            }
        })
    }
}

/// Recombines two parents of equal variable count into one child. The
/// deterministic kinds ignore the random source.
pub fn crossover(
    p1: &TruthTable,
    p2: &TruthTable,
    kind: CrossoverKind,
    rng: &mut RandomSource,
) -> Result<TruthTable> {
    if p1.n() != p2.n() {
        return Err(Error::DimensionMismatch {
            left: p1.n(),
            right: p2.n(),
        });
    }
    let len = p1.len();
    let cut = match kind {
        CrossoverKind::SinglePointMid => Some(len / 2),
        CrossoverKind::SinglePointRandom => Some(rng.random_range(1..len)),
        _ => None,
    };
    let child = match kind {
        CrossoverKind::SinglePointMid | CrossoverKind::SinglePointRandom => {
            let cut = cut.unwrap();
            TruthTable::from_fn(p1.n(), |i| if i < cut { p1.get(i) } else { p2.get(i) })
        }
        CrossoverKind::UniformEvenOdd => TruthTable::from_fn(p1.n(), |i| {
            if i % 2 == 0 {
                p1.get(i)
            } else {
                p2.get(i)
            }
        }),
        CrossoverKind::UniformRandom => TruthTable::from_fn(p1.n(), |i| {
            if rng.random_bool(0.5) {
                p1.get(i)
            } else {
                p2.get(i)
            }
        }),
    };
    child
}

/// Shuffles the bits between two randomly chosen positions.
///
/// Draws distinct positions `a < b` uniformly, then applies a Fisher-Yates
/// permutation to the inclusive range `[a, b]`; the bit multiset inside the
/// range (hence the table's weight) is preserved.
pub fn mixing_mutation(tt: &TruthTable, rng: &mut RandomSource) -> TruthTable {
    let len = tt.len();
    let first = rng.random_range(0..len);
    let second = loop {
        let p = rng.random_range(0..len);
        if p != first {
            break p;
        }
    };
    let (a, b) = (first.min(second), first.max(second));
    let mut window: Vec<bool> = (a..=b).map(|i| tt.get(i)).collect();
    for k in (1..window.len()).rev() {
        window.swap(k, rng.random_range(0..=k));
    }
    let mut out = tt.clone();
    for (offset, bit) in window.into_iter().enumerate() {
        out.set(a + offset, bit);
    }
    out
}

/// Parses an operator-combination label like `"2bit/rot/bit"`.
pub fn parse_operator_combo(text: &str) -> Result<Vec<MutationKind>> {
    let ops: Vec<MutationKind> = text
        .split('/')
        .map(|token| token.trim().parse())
        .collect::<Result<_>>()?;
    if ops.is_empty() {
        return Err(Error::ParseFailed {
            what: "operator combination",
            text: text.to_owned(),
        });
    }
    Ok(ops)
}

/// Formats an operator combination with the short figure-label tokens.
pub fn format_operator_combo(ops: &[MutationKind]) -> String {
    ops.iter()
        .map(|k| k.combo_token())
        .collect::<Vec<_>>()
        .join("/")
}
