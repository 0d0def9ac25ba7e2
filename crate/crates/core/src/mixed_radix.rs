//! Coordinate calculus for array-code symbols.
//!
//! A node stores `ℓ = s · base^n` symbols. Symbol `τ` is addressed by the pair
//! `(a, b)` with `τ = b · base^n + a`, and `a` is read as `n` base-`base`
//! digits, least significant first. Digit positions are 1-based so that digit
//! `i` belongs to node `i`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RadixError {
    #[error("base must be at least 1")]
    ZeroBase,
    #[error("block count must be at least 1")]
    ZeroBlocks,
    #[error("{base}^{n} blocks of {blocks} overflow the address space")]
    Overflow { base: usize, n: usize, blocks: usize },
    #[error("integer {value} out of range [0, {bound})")]
    OutOfRange { value: usize, bound: usize },
    #[error("digit position {pos} outside [1, {n}]")]
    BadPosition { pos: usize, n: usize },
    #[error("digit {digit} outside [0, {base})")]
    BadDigit { digit: usize, base: usize },
    #[error("{positions} positions but {values} values")]
    LengthMismatch { positions: usize, values: usize },
}

/// `a` as `n` base-`base` digits, least significant first.
pub fn digits(a: usize, base: usize, n: usize) -> Result<Vec<usize>, RadixError> {
    Radix::new(base, n, 1)?.digits(a)
}

/// Cyclic digit addition `x ⊕ y = (x + y) mod base`.
pub fn cyc_add(x: usize, y: usize, base: usize) -> Result<usize, RadixError> {
    for digit in [x, y] {
        if digit >= base {
            return Err(RadixError::BadDigit { digit, base });
        }
    }
    Ok((x + y) % base)
}

/// A symbol address `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coordinate {
    pub a: usize,
    pub b: usize,
}

/// Uniform-base digit layout shared by every code family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radix {
    base: usize,
    n: usize,
    blocks: usize,
    /// `powers[i] = base^i` for `i` in `0..=n`.
    powers: Vec<usize>,
}

impl Radix {
    pub fn new(base: usize, n: usize, blocks: usize) -> Result<Self, RadixError> {
        if base == 0 {
            return Err(RadixError::ZeroBase);
        }
        if blocks == 0 {
            return Err(RadixError::ZeroBlocks);
        }
        let overflow = RadixError::Overflow { base, n, blocks };
        let mut powers = Vec::with_capacity(n + 1);
        let mut acc = 1usize;
        powers.push(acc);
        for _ in 0..n {
            acc = acc.checked_mul(base).ok_or_else(|| overflow.clone())?;
            powers.push(acc);
        }
        acc.checked_mul(blocks).ok_or(overflow)?;
        Ok(Self {
            base,
            n,
            blocks,
            powers,
        })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn digit_count(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// `base^n`, the number of distinct `a` values.
    pub fn width(&self) -> usize {
        self.powers[self.n]
    }

    /// `ℓ = blocks · base^n`.
    pub fn len(&self) -> usize {
        self.width() * self.blocks
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check_a(&self, a: usize) -> Result<(), RadixError> {
        if a >= self.width() {
            return Err(RadixError::OutOfRange {
                value: a,
                bound: self.width(),
            });
        }
        Ok(())
    }

    fn check_pos(&self, pos: usize) -> Result<(), RadixError> {
        if pos == 0 || pos > self.n {
            return Err(RadixError::BadPosition { pos, n: self.n });
        }
        Ok(())
    }

    /// Digit `pos` (1-based) of `a`. Unchecked hot path.
    #[inline]
    pub fn digit(&self, a: usize, pos: usize) -> usize {
        (a / self.powers[pos - 1]) % self.base
    }

    /// `a(pos, v)`: `a` with digit `pos` replaced by `v`. Unchecked hot path.
    #[inline]
    pub fn with_digit(&self, a: usize, pos: usize, v: usize) -> usize {
        let w = self.powers[pos - 1];
        a - self.digit(a, pos) * w + v * w
    }

    pub fn digits(&self, a: usize) -> Result<Vec<usize>, RadixError> {
        self.check_a(a)?;
        Ok((1..=self.n).map(|pos| self.digit(a, pos)).collect())
    }

    /// Inverse of [`Radix::digits`].
    pub fn from_digits(&self, digits: &[usize]) -> Result<usize, RadixError> {
        if digits.len() != self.n {
            return Err(RadixError::LengthMismatch {
                positions: self.n,
                values: digits.len(),
            });
        }
        let mut a = 0;
        for (i, &digit) in digits.iter().enumerate() {
            if digit >= self.base {
                return Err(RadixError::BadDigit {
                    digit,
                    base: self.base,
                });
            }
            a += digit * self.powers[i];
        }
        Ok(a)
    }

    /// `a(X, v)`: digits at `positions` set to `values`, all others kept.
    pub fn substitute(
        &self,
        a: usize,
        positions: &[usize],
        values: &[usize],
    ) -> Result<usize, RadixError> {
        self.check_a(a)?;
        if positions.len() != values.len() {
            return Err(RadixError::LengthMismatch {
                positions: positions.len(),
                values: values.len(),
            });
        }
        let mut out = a;
        for (&pos, &digit) in positions.iter().zip(values) {
            self.check_pos(pos)?;
            if digit >= self.base {
                return Err(RadixError::BadDigit {
                    digit,
                    base: self.base,
                });
            }
            out = self.with_digit(out, pos, digit);
        }
        Ok(out)
    }

    /// `a(X, a|_X ⊕ v·1)`: every digit in `positions` advanced by `v` mod base.
    /// Unchecked hot path.
    #[inline]
    pub fn shift(&self, a: usize, positions: &[usize], v: usize) -> usize {
        let mut out = a;
        for &pos in positions {
            let d = self.digit(a, pos);
            out = self.with_digit(out, pos, (d + v) % self.base);
        }
        out
    }

    pub fn cyc_add(&self, x: usize, y: usize) -> Result<usize, RadixError> {
        cyc_add(x, y, self.base)
    }

    /// `τ = b · base^n + a`.
    pub fn pack(&self, a: usize, b: usize) -> Result<usize, RadixError> {
        self.check_a(a)?;
        if b >= self.blocks {
            return Err(RadixError::OutOfRange {
                value: b,
                bound: self.blocks,
            });
        }
        Ok(self.pack_unchecked(a, b))
    }

    #[inline]
    pub fn pack_unchecked(&self, a: usize, b: usize) -> usize {
        b * self.width() + a
    }

    pub fn unpack(&self, tau: usize) -> Result<Coordinate, RadixError> {
        if tau >= self.len() {
            return Err(RadixError::OutOfRange {
                value: tau,
                bound: self.len(),
            });
        }
        Ok(Coordinate {
            a: tau % self.width(),
            b: tau / self.width(),
        })
    }
}
