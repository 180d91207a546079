//! Color-set algebra: k-sized subsets of a palette `[q] = {1, ..., q}`,
//! legal-pair testing, and enumeration of the full family of k-subsets.
//!
//! Colors are 1-based in all inputs and renderings (matching the palette
//! notation `[q]`) and 0-based bit positions internally; the constructor and
//! the `Display` impl are the only places that translate.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported palette: one machine word of colors.
pub const MAX_PALETTE: u32 = 64;

/// Family sizes beyond this are refused rather than allocated.
const MAX_FAMILY_LEN: u128 = 1 << 24;

/// A k-sized subset of the palette `[q]`, stored as a bit mask
/// (bit `c` set ⇔ color `c+1` is in the set).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorSet {
    bits: u64,
    q: u32,
}

impl ColorSet {
    /// Builds a set from 1-based colors. Every color must lie in `1..=q`.
    pub fn from_colors(colors: impl IntoIterator<Item = u32>, q: u32) -> Result<Self> {
        if u64::from(q) > u64::from(MAX_PALETTE) {
            return Err(Error::UnsupportedPalette(u64::from(q)));
        }
        let mut bits = 0u64;
        for c in colors {
            if c == 0 || c > q {
                return Err(Error::domain(format!(
                    "color {c} is outside the palette [1..{q}]"
                )));
            }
            bits |= 1u64 << (c - 1);
        }
        Ok(ColorSet { bits, q })
    }

    pub(crate) fn from_bits(bits: u64, q: u32) -> Self {
        debug_assert!(q <= MAX_PALETTE);
        debug_assert!(q == 64 || bits < (1u64 << q));
        ColorSet { bits, q }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Palette size q.
    pub fn palette(&self) -> u32 {
        self.q
    }

    /// Cardinality k of the set.
    pub fn len(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// 1-based colors in ascending order.
    pub fn colors(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.q).filter(|c| self.bits & (1u64 << c) != 0).map(|c| c + 1)
    }

    pub fn contains(&self, color: u32) -> bool {
        color >= 1 && color <= self.q && self.bits & (1u64 << (color - 1)) != 0
    }

    /// Size of the intersection with another set over the same palette.
    pub fn intersection_size(&self, other: &ColorSet) -> u32 {
        (self.bits & other.bits).count_ones()
    }

    /// The complement `[q] \ C`; its cardinality is `q - k`.
    pub fn complement(&self) -> ColorSet {
        let mask = if self.q == 64 { u64::MAX } else { (1u64 << self.q) - 1 };
        ColorSet {
            bits: mask & !self.bits,
            q: self.q,
        }
    }
}

impl fmt::Display for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (idx, c) in self.colors().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Tests whether `(a, b)` is a legal pair for tolerance `i`, i.e. whether the
/// two sets have at most `i` colors in common. Errors if the sets live over
/// different palettes.
pub fn is_legal_pair(a: &ColorSet, b: &ColorSet, i: u32) -> Result<bool> {
    if a.palette() != b.palette() {
        return Err(Error::domain(format!(
            "legal-pair check over mismatched palettes ({} vs {})",
            a.palette(),
            b.palette()
        )));
    }
    Ok(a.intersection_size(b) <= i)
}

/// The family of all k-sized subsets of `[q]`, in colexicographic order.
///
/// Colexicographic order on k-subsets coincides with numeric order of the
/// bit masks, so the family is produced by ascending mask enumeration and
/// membership lookups are binary searches.
#[derive(Clone, PartialEq, Eq)]
pub struct SetFamily {
    q: u32,
    k: u32,
    masks: Vec<u64>,
}

impl SetFamily {
    /// Enumerates all `binom(q, k)` subsets. Empty when `k > q`.
    pub fn enumerate(q: u32, k: u32) -> Result<Self> {
        if u64::from(q) > u64::from(MAX_PALETTE) {
            return Err(Error::UnsupportedPalette(u64::from(q)));
        }
        let expected = binomial(u64::from(q), u64::from(k));
        if expected > MAX_FAMILY_LEN {
            return Err(Error::resource(format!(
                "family of {expected} color sets (q={q}, k={k}) is too large to enumerate"
            )));
        }
        let mut masks = Vec::with_capacity(expected as usize);
        if k <= q {
            if k == 0 {
                masks.push(0);
            } else {
                let limit = if q == 64 { u64::MAX } else { (1u64 << q) - 1 };
                let mut mask = (1u64 << k) - 1;
                loop {
                    masks.push(mask);
                    if mask == mask_last(q, k) {
                        break;
                    }
                    // Gosper's hack: next k-subset mask in ascending order.
                    let low = mask & mask.wrapping_neg();
                    let ripple = mask + low;
                    mask = ripple | (((mask ^ ripple) / low) >> 2);
                    debug_assert!(mask <= limit);
                }
            }
        }
        debug_assert_eq!(masks.len() as u128, expected);
        Ok(SetFamily { q, k, masks })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn get(&self, index: usize) -> ColorSet {
        ColorSet::from_bits(self.masks[index], self.q)
    }

    /// Index of a set in the family, if it has the right cardinality.
    pub fn index_of(&self, set: &ColorSet) -> Option<usize> {
        if set.palette() != self.q {
            return None;
        }
        self.masks.binary_search(&set.bits()).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = ColorSet> + '_ {
        self.masks.iter().map(|&m| ColorSet::from_bits(m, self.q))
    }

    #[cfg(test)]
    pub(crate) fn masks(&self) -> &[u64] {
        &self.masks
    }
}

fn mask_last(q: u32, k: u32) -> u64 {
    // Highest k-subset mask: the top k bits of [q].
    if k == 0 {
        0
    } else {
        let ones = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        ones << (q - k)
    }
}

/// `binom(n, k)` without overflow (saturating far above any realistic family
/// size; callers compare against [`MAX_FAMILY_LEN`]-scale limits).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.saturating_mul((n - j) as u128) / (j + 1) as u128;
    }
    acc
}
