//! Walsh-Hadamard transform, inverse, nonlinearity, and spectrum deltas.
//!
//! The spectrum entry at index `a` is `W(a) = Σ_x (−1)^(f(x) ⊕ a·x)` with
//! `a·x` the inner product of the bit decompositions of the two indices. It
//! measures the (signed) correlation between `f` and the linear function
//! `a·x`; nonlinearity is the Hamming distance to the nearest affine
//! function, `2^(n−1) − max_a |W(a)| / 2`.

use crate::error::{Error, Result};
use crate::table::TruthTable;
use serde::{Deserialize, Serialize};

/// The full spectrum of a Boolean function: `2^n` signed even integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalshSpectrum {
    n: u32,
    coeffs: Vec<i32>,
}

impl WalshSpectrum {
    /// Wraps raw coefficients; the length must be a power of two.
    pub fn from_coeffs(coeffs: Vec<i32>) -> Result<Self> {
        let len = coeffs.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::LengthMismatch {
                expected: len.next_power_of_two().max(2),
                actual: len,
            });
        }
        Ok(Self {
            n: len.trailing_zeros(),
            coeffs,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[i32] {
        &self.coeffs
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> u32 {
        self.coeffs.iter().map(|c| c.unsigned_abs()).max().unwrap()
    }

    /// Largest absolute coefficient and how many entries attain it.
    pub fn max_abs_count(&self) -> (u32, u32) {
        let max = self.max_abs();
        let count = self
            .coeffs
            .iter()
            .filter(|c| c.unsigned_abs() == max)
            .count() as u32;
        (max, count)
    }

    /// Nonlinearity `2^(n−1) − max|W|/2` of the underlying function.
    pub fn nonlinearity(&self) -> u32 {
        (1u32 << (self.n - 1)) - self.max_abs() / 2
    }

    /// Left-hand side of Parseval's relation, `Σ W(a)²` (must equal `2^2n`).
    pub fn parseval_sum(&self) -> u64 {
        self.coeffs.iter().map(|&c| (c as i64 * c as i64) as u64).sum()
    }

    /// Whether `Σ W(a)² = 2^(2n)` holds.
    pub fn parseval_holds(&self) -> bool {
        self.parseval_sum() == 1u64 << (2 * self.n)
    }
}

/// In-place Walsh-Hadamard butterfly over a ±1 value vector.
///
/// Standard size-doubling passes: `h = 1, 2, 4, …` with each pair
/// `(v[j], v[j+h])` replaced by `(v[j]+v[j+h], v[j]−v[j+h])`; `O(n·2^n)`.
pub fn butterfly(values: &mut [i32]) {
    let len = values.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        let mut base = 0;
        while base < len {
            for j in base..base + h {
                let (a, b) = (values[j], values[j + h]);
                values[j] = a + b;
                values[j + h] = a - b;
            }
            base += h * 2;
        }
        h *= 2;
    }
}

/// Fast transform via the in-place butterfly.
pub fn walsh_transform(tt: &TruthTable) -> WalshSpectrum {
    let mut values: Vec<i32> = tt.bits().map(|b| if b { -1 } else { 1 }).collect();
    butterfly(&mut values);
    WalshSpectrum {
        n: tt.n(),
        coeffs: values,
    }
}

/// Reference evaluator straight from the definition, `O(2^(2n))`.
///
/// Exists solely so the butterfly has an independent witness in tests.
pub fn walsh_transform_naive(tt: &TruthTable) -> WalshSpectrum {
    let len = tt.len();
    let coeffs = (0..len)
        .map(|a| {
            let mut sum = 0i32;
            for x in 0..len {
                let parity = ((a & x).count_ones() & 1) as i32;
                let f = tt.get(x) as i32;
                sum += 1 - 2 * ((f + parity) & 1);
            }
            sum
        })
        .collect();
    WalshSpectrum {
        n: tt.n(),
        coeffs,
    }
}

/// Inverts the transform: butterfly again, normalize by `2^n`, map
/// `+1 → 0`, `−1 → 1`.
///
/// Fails with [`Error::NotABooleanSpectrum`] when any normalized value is
/// not ±1 — the input then describes a pseudo-Boolean function with no
/// truth-table preimage.
pub fn inverse_walsh(spectrum: &WalshSpectrum) -> Result<TruthTable> {
    let len = spectrum.len();
    let mut values = spectrum.coeffs.clone();
    butterfly(&mut values);
    let mut tt = TruthTable::zeros(spectrum.n)?;
    for (x, &v) in values.iter().enumerate() {
        let denominator = len as i64;
        if v as i64 % denominator != 0 {
            return Err(Error::NotABooleanSpectrum {
                index: x,
                numerator: v as i64,
                denominator,
            });
        }
        match v as i64 / denominator {
            1 => {}
            -1 => tt.set(x, true),
            _ => {
                return Err(Error::NotABooleanSpectrum {
                    index: x,
                    numerator: v as i64,
                    denominator,
                })
            }
        }
    }
    Ok(tt)
}

/// Nonlinearity of a spectrum (free-function form of
/// [`WalshSpectrum::nonlinearity`]).
pub fn nonlinearity(spectrum: &WalshSpectrum) -> u32 {
    spectrum.nonlinearity()
}

/// The upper limit `2^(n−1) − 2^(n/2−1)` on nonlinearity, kept exact.
///
/// For even `n` the value is an integer (attained by bent functions); for
/// odd `n` it is irrational and exposed as `(2^n − m·√2)/2` with
/// `m = 2^((n−1)/2)`. Callers needing an integer ceiling must floor
/// explicitly via [`CoveringRadiusBound::floor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoveringRadiusBound {
    n: u32,
}

/// Computes the covering-radius bound for `n ≥ 1` variables.
pub fn covering_radius_bound(n: u32) -> CoveringRadiusBound {
    assert!(n >= 1, "variable count must be positive");
    CoveringRadiusBound { n }
}

impl CoveringRadiusBound {
    /// The exact value as `(whole − sqrt2_units·√2) / 2`.
    pub fn exact_parts(&self) -> (u64, u64) {
        let whole = 1u64 << self.n;
        if self.n % 2 == 0 {
            (whole - (1u64 << (self.n / 2)), 0)
        } else {
            (whole, 1u64 << ((self.n - 1) / 2))
        }
    }

    /// The exact integer value, when one exists (even `n`).
    pub fn as_integer(&self) -> Option<u64> {
        (self.n % 2 == 0).then(|| {
            let (whole, _) = self.exact_parts();
            whole / 2
        })
    }

    /// Largest integer not exceeding the bound, computed without floats.
    pub fn floor(&self) -> u64 {
        match self.as_integer() {
            Some(v) => v,
            None => {
                let (whole, m) = self.exact_parts();
                // floor(m·√2) = isqrt(2m²); √2 is irrational so the square
                // root is never exact and the usual floor chain applies.
                let whole_floor = whole - (2 * m * m).isqrt() - 1;
                whole_floor / 2
            }
        }
    }

    /// Floating-point approximation for display.
    pub fn value_f64(&self) -> f64 {
        let (whole, m) = self.exact_parts();
        (whole as f64 - m as f64 * std::f64::consts::SQRT_2) / 2.0
    }
}

/// A function-independent spectrum change: the element-wise difference the
/// set/reset mutation families add to any spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaVector {
    n: u32,
    deltas: Vec<i32>,
}

impl DeltaVector {
    pub fn new(n: u32, deltas: Vec<i32>) -> Result<Self> {
        if deltas.len() != 1usize << n {
            return Err(Error::LengthMismatch {
                expected: 1usize << n,
                actual: deltas.len(),
            });
        }
        Ok(Self { n, deltas })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn deltas(&self) -> &[i32] {
        &self.deltas
    }

    /// Element-wise negation (turns a set delta into the reset delta).
    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            deltas: self.deltas.iter().map(|d| -d).collect(),
        }
    }

    /// Element-wise sum of two deltas of equal length.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            deltas: self
                .deltas
                .iter()
                .zip(&other.deltas)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// Element-wise sum of a spectrum and a delta.
pub fn apply_spectrum_delta(
    spectrum: &WalshSpectrum,
    delta: &DeltaVector,
) -> Result<WalshSpectrum> {
    if spectrum.n != delta.n {
        return Err(Error::DimensionMismatch {
            left: spectrum.n,
            right: delta.n,
        });
    }
    Ok(WalshSpectrum {
        n: spectrum.n,
        coeffs: spectrum
            .coeffs
            .iter()
            .zip(&delta.deltas)
            .map(|(c, d)| c + d)
            .collect(),
    })
}
