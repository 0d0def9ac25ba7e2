//! Binary Hamming codes and their coset partition of `{0,1}^N`.
//!
//! The parity-check matrix of `Ham(2, w)` has the binary expansions of
//! `1..=N` (`N = 2^w - 1`) as its columns, in ascending order. The syndrome of
//! a vector, read as an integer, is therefore the position whose flip lands
//! the vector in the code, and `V_i` is exactly the set of vectors with
//! syndrome `i`.
//!
//! Vectors are bit masks: bit `i-1` holds coordinate `y_i`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HammingError {
    #[error("Hamming parameter w must be between 1 and {max}, got {0}", max = CosetPartition::MAX_W)]
    BadOrder(usize),
    #[error("expected a vector of length {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("entry {0} is not a bit")]
    NotBinary(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetPartition {
    w: usize,
    len: usize,
    /// `sets[i]` is `V_i`, ascending.
    sets: Vec<Vec<u64>>,
}

impl CosetPartition {
    /// Enumerating `2^N` vectors caps the practical order.
    pub const MAX_W: usize = 4;

    pub fn build(w: usize) -> Result<Self, HammingError> {
        if w == 0 || w > Self::MAX_W {
            return Err(HammingError::BadOrder(w));
        }
        let len = (1usize << w) - 1;
        let code: Vec<u64> = (0..1u64 << len).filter(|&y| syndrome(y) == 0).collect();
        let mut sets = vec![code.clone()];
        for i in 1..=len {
            let mut coset: Vec<u64> = code.iter().map(|&y| y ^ (1 << (i - 1))).collect();
            coset.sort_unstable();
            sets.push(coset);
        }
        Ok(Self { w, len, sets })
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// Code length `N = 2^w - 1`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `V_i` for `i` in `0..=N`.
    pub fn coset(&self, i: usize) -> &[u64] {
        &self.sets[i]
    }

    pub fn cosets(&self) -> &[Vec<u64>] {
        &self.sets
    }

    /// Index of the coset holding `y`, given as one 0/1 entry per coordinate.
    pub fn classify(&self, y: &[u8]) -> Result<usize, HammingError> {
        if y.len() != self.len {
            return Err(HammingError::Length {
                expected: self.len,
                got: y.len(),
            });
        }
        let mut mask = 0u64;
        for (i, &bit) in y.iter().enumerate() {
            match bit {
                0 => {}
                1 => mask |= 1 << i,
                other => return Err(HammingError::NotBinary(other)),
            }
        }
        Ok(syndrome(mask))
    }

    /// [`CosetPartition::classify`] on a bit mask.
    #[inline]
    pub fn classify_mask(&self, mask: u64) -> usize {
        syndrome(mask)
    }
}

/// Coset index of a mask: XOR of the 1-based positions of its set bits.
#[inline]
pub fn syndrome(mut mask: u64) -> usize {
    let mut s = 0usize;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        s ^= i + 1;
        mask &= mask - 1;
    }
    s
}
