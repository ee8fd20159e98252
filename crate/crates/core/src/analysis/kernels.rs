//! Allocation-free fast paths for studies over small function spaces.
//!
//! For `n ≤ 6` a truth table fits one machine word, the spectrum fits a
//! stack array, and the effect of a single- or two-bit flip on the
//! spectrum is a ±2/±4 shift per coefficient. The study loops run on these
//! kernels; their equivalence to the general-purpose table/spectrum/operator
//! code is pinned by the tests at the bottom, so the kernels carry the same
//! semantics at a fraction of the cost.

use crate::walsh;

/// Largest variable count whose truth table fits a single `u64`.
pub const MAX_WORD_N: u32 = 6;

/// Walsh-Hadamard spectrum of the function packed in `word` (bit `i` =
/// f(i)), written into `out[..2^n]`.
#[inline]
pub fn wht_word(n: u32, word: u64, out: &mut [i32; 64]) {
    debug_assert!(n <= MAX_WORD_N);
    let len = 1usize << n;
    for (i, slot) in out[..len].iter_mut().enumerate() {
        *slot = 1 - 2 * ((word >> i) & 1) as i32;
    }
    walsh::butterfly(&mut out[..len]);
}

/// Largest absolute spectrum value.
#[inline]
pub fn max_abs(spec: &[i32]) -> i32 {
    spec.iter().map(|v| v.abs()).max().unwrap_or(0)
}

/// Nonlinearity of a packed function.
#[inline]
pub fn nl_of_word(n: u32, word: u64) -> u32 {
    let mut buf = [0i32; 64];
    wht_word(n, word, &mut buf);
    let len = 1usize << n;
    nl_from_max(n, max_abs(&buf[..len]))
}

#[inline]
pub(crate) fn nl_from_max(n: u32, max: i32) -> u32 {
    (1u32 << (n - 1)) - (max as u32) / 2
}

/// (−1)^f(i) for the packed function.
#[inline]
fn sigma(word: u64, i: usize) -> i32 {
    1 - 2 * ((word >> i) & 1) as i32
}

/// (−1)^(a·i), the linear character at spectrum index `a`.
#[inline]
fn chi(a: usize, i: usize) -> i32 {
    1 - 2 * (((a & i).count_ones() & 1) as i32)
}

/// Table rotate-left by `r` (entry at index k moves to (k − r) mod 2^n),
/// which on the packed word is a rotate-right within the low `2^n` bits.
#[inline]
pub fn rotate_word(n: u32, word: u64, r: usize) -> u64 {
    let len = 1usize << n;
    let r = r % len;
    if r == 0 {
        return word;
    }
    let mask = if len == 64 { !0u64 } else { (1u64 << len) - 1 };
    ((word >> r) | (word << (len - r))) & mask
}

/// Exact max |W| after flipping bit `i`, from the pre-flip spectrum.
#[inline]
pub fn bitflip_new_max(n: u32, word: u64, spec: &[i32], i: usize) -> i32 {
    let s = sigma(word, i);
    let len = 1usize << n;
    let mut m = 0;
    for (a, &w) in spec[..len].iter().enumerate() {
        let v = (w - 2 * s * chi(a, i)).abs();
        if v > m {
            m = v;
        }
    }
    m
}

/// Exact max |W| after flipping bits `i` and `j`.
#[inline]
pub fn twobitflip_new_max(n: u32, word: u64, spec: &[i32], i: usize, j: usize) -> i32 {
    let si = sigma(word, i);
    let sj = sigma(word, j);
    let len = 1usize << n;
    let mut m = 0;
    for (a, &w) in spec[..len].iter().enumerate() {
        let v = (w - 2 * (si * chi(a, i) + sj * chi(a, j))).abs();
        if v > m {
            m = v;
        }
    }
    m
}

/// Spectrum indices that could reach or exceed the current max under a
/// coefficient shift of at most `reach`; all other indices stay strictly
/// below it and need no checking.
#[inline]
fn candidates(spec: &[i32], max: i32, reach: i32, out: &mut [u8; 64]) -> usize {
    let mut c = 0;
    for (a, &w) in spec.iter().enumerate() {
        if w.abs() >= max - reach {
            out[c] = a as u8;
            c += 1;
        }
    }
    c
}

/// Whether some single-bit flip strictly raises nonlinearity (lowers
/// max |W|). A position improves iff every near-max coefficient drops
/// below the current max.
pub fn bitflip_can_improve(n: u32, word: u64, spec: &[i32], max: i32) -> bool {
    let len = 1usize << n;
    let mut cand = [0u8; 64];
    let c = candidates(&spec[..len], max, 2, &mut cand);
    'position: for i in 0..len {
        let s = sigma(word, i);
        for &a in &cand[..c] {
            let a = a as usize;
            if (spec[a] - 2 * s * chi(a, i)).abs() >= max {
                continue 'position;
            }
        }
        return true;
    }
    false
}

/// Whether some two-bit flip strictly raises nonlinearity.
pub fn twobitflip_can_improve(n: u32, word: u64, spec: &[i32], max: i32) -> bool {
    let len = 1usize << n;
    let mut cand = [0u8; 64];
    let c = candidates(&spec[..len], max, 4, &mut cand);
    for i in 0..len {
        let si = sigma(word, i);
        'pair: for j in i + 1..len {
            let sj = sigma(word, j);
            for &a in &cand[..c] {
                let a = a as usize;
                if (spec[a] - 2 * (si * chi(a, i) + sj * chi(a, j))).abs() >= max {
                    continue 'pair;
                }
            }
            return true;
        }
    }
    false
}

/// Whether some cyclic rotation (any amount `1..2^n`) strictly raises
/// nonlinearity. Rotation has no incremental spectrum form, so each amount
/// takes a fresh transform.
pub fn rotation_can_improve(n: u32, word: u64, max: i32) -> bool {
    let len = 1usize << n;
    let mut buf = [0i32; 64];
    'amount: for r in 1..len {
        wht_word(n, rotate_word(n, word, r), &mut buf);
        for &w in &buf[..len] {
            if w.abs() >= max {
                continue 'amount;
            }
        }
        return true;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{neighborhood, MutationKind};
    use crate::rng::RandomSource;
    use crate::table::TruthTable;
    use crate::walsh::walsh_transform;

    fn spec_of(n: u32, word: u64) -> ([i32; 64], usize) {
        let mut buf = [0i32; 64];
        wht_word(n, word, &mut buf);
        (buf, 1usize << n)
    }

    #[test]
    fn word_transform_equals_table_transform() {
        for word in 0..256u64 {
            let t = TruthTable::from_word(3, word).unwrap();
            let (buf, len) = spec_of(3, word);
            assert_eq!(&buf[..len], walsh_transform(&t).coeffs());
        }
        let mut rng = RandomSource::new(5);
        for _ in 0..200 {
            let t = TruthTable::random(6, &mut rng).unwrap();
            let word = t.as_word().unwrap();
            let (buf, len) = spec_of(6, word);
            assert_eq!(&buf[..len], walsh_transform(&t).coeffs());
        }
    }

    #[test]
    fn word_rotation_equals_table_rotation() {
        let mut rng = RandomSource::new(6);
        for n in [3u32, 4, 5, 6] {
            for _ in 0..50 {
                let t = TruthTable::random(n, &mut rng).unwrap();
                let word = t.as_word().unwrap();
                for r in 1..t.len() {
                    assert_eq!(
                        rotate_word(n, word, r),
                        t.rotate_left(r).as_word().unwrap(),
                        "n={n} r={r}"
                    );
                }
            }
        }
    }

    #[test]
    fn incremental_maxima_match_full_transforms() {
        let mut rng = RandomSource::new(7);
        for _ in 0..300 {
            let t = TruthTable::random(4, &mut rng).unwrap();
            let word = t.as_word().unwrap();
            let (buf, len) = spec_of(4, word);
            for (m, mutated) in neighborhood(&t, MutationKind::BitFlip) {
                let i = match m.position() {
                    crate::ops::MutationPosition::Single(i) => i,
                    _ => unreachable!(),
                };
                assert_eq!(
                    bitflip_new_max(4, word, &buf[..len], i) as u32,
                    walsh_transform(&mutated).max_abs()
                );
            }
            for (m, mutated) in neighborhood(&t, MutationKind::TwoBitFlip) {
                let (i, j) = match m.position() {
                    crate::ops::MutationPosition::Pair(i, j) => (i, j),
                    _ => unreachable!(),
                };
                assert_eq!(
                    twobitflip_new_max(4, word, &buf[..len], i, j) as u32,
                    walsh_transform(&mutated).max_abs()
                );
            }
        }
    }

    /// Brute-force improvement flags via the public operator/transform
    /// path, as the reference for the early-abort kernels.
    fn reference_flags(t: &TruthTable) -> (bool, bool, bool) {
        let nl = walsh_transform(t).nonlinearity();
        let better = |kind| {
            neighborhood(t, kind).any(|(_, out)| walsh_transform(&out).nonlinearity() > nl)
        };
        (
            better(MutationKind::Rotation),
            better(MutationKind::BitFlip),
            better(MutationKind::TwoBitFlip),
        )
    }

    #[test]
    fn improvement_probes_match_brute_force() {
        let mut rng = RandomSource::new(8);
        for n in [3u32, 4, 5] {
            for _ in 0..120 {
                let t = TruthTable::random(n, &mut rng).unwrap();
                let word = t.as_word().unwrap();
                let (buf, len) = spec_of(n, word);
                let max = max_abs(&buf[..len]);
                let (rot, bit, two) = reference_flags(&t);
                assert_eq!(rotation_can_improve(n, word, max), rot, "rot n={n}");
                assert_eq!(
                    bitflip_can_improve(n, word, &buf[..len], max),
                    bit,
                    "bit n={n}"
                );
                assert_eq!(
                    twobitflip_can_improve(n, word, &buf[..len], max),
                    two,
                    "two n={n}"
                );
            }
        }
    }

    #[test]
    fn nl_of_word_agrees_with_spectrum() {
        for word in 0..256u64 {
            let t = TruthTable::from_word(3, word).unwrap();
            assert_eq!(nl_of_word(3, word), walsh_transform(&t).nonlinearity());
        }
    }
}
