//! Generalized Reed–Solomon words defined by Vandermonde parity checks.
//!
//! A word `(c_0, …, c_{N-1})` over evaluation points `(x_0, …, x_{N-1})`
//! belongs to the code when `Σ_i x_i^t · c_i = 0` for `t = 0, …, r-1`.
//! Everything here works in that parity-check (dual) form; no generator
//! matrix is ever built. Positions in this module are 0-based slice indices.

use thiserror::Error;

use crate::field::PrimeField;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrsError {
    #[error("word has {erased} erasures but only {r} parity checks")]
    TooManyErasures { erased: usize, r: usize },
    #[error("evaluation points are not distinct (position {0} repeats an earlier point)")]
    RepeatedPoint(usize),
    #[error("{points} points but {values} values")]
    LengthMismatch { points: usize, values: usize },
    #[error("syndromes need a fully known word; position {0} is erased")]
    Erased(usize),
    #[error("known symbols violate the parity checks (residual in check {check})")]
    Inconsistent { check: usize },
    #[error("data position {0} is out of range or repeated")]
    BadPosition(usize),
    #[error("{data} data symbols for a word of length {len} with {r} checks")]
    BadDimension { data: usize, len: usize, r: usize },
}

/// A GRS word with possibly erased entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrsWord {
    pub points: Vec<u64>,
    pub values: Vec<Option<u64>>,
    pub r: usize,
}

impl GrsWord {
    pub fn known(points: Vec<u64>, values: Vec<u64>, r: usize) -> Self {
        Self {
            points,
            values: values.into_iter().map(Some).collect(),
            r,
        }
    }

    pub fn erasures(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.is_none().then_some(i))
    }

    /// The values, if none is erased.
    pub fn complete(&self) -> Option<Vec<u64>> {
        self.values.iter().copied().collect()
    }

    fn check_shape(&self, field: &PrimeField) -> Result<(), GrsError> {
        if self.points.len() != self.values.len() {
            return Err(GrsError::LengthMismatch {
                points: self.points.len(),
                values: self.values.len(),
            });
        }
        check_distinct(field, &self.points)
    }
}

pub(crate) fn check_distinct(field: &PrimeField, points: &[u64]) -> Result<(), GrsError> {
    for (i, &x) in points.iter().enumerate() {
        let x = field.reduce(x);
        if points[..i].iter().any(|&y| field.reduce(y) == x) {
            return Err(GrsError::RepeatedPoint(i));
        }
    }
    Ok(())
}

/// The `r` syndromes `Σ_i x_i^t c_i`, `t = 0..r`.
pub fn syndromes(field: &PrimeField, word: &GrsWord) -> Result<Vec<u64>, GrsError> {
    word.check_shape(field)?;
    if let Some(i) = word.erasures().next() {
        return Err(GrsError::Erased(i));
    }
    let values: Vec<u64> = word.values.iter().map(|v| v.unwrap_or(0)).collect();
    Ok(raw_syndromes(field, &word.points, &values, word.r))
}

pub(crate) fn raw_syndromes(field: &PrimeField, points: &[u64], values: &[u64], r: usize) -> Vec<u64> {
    let mut syn = vec![0u64; r];
    for (&x, &c) in points.iter().zip(values) {
        let mut term = field.reduce(c);
        for s in syn.iter_mut() {
            *s = field.add(*s, term);
            term = field.mul(term, x);
        }
    }
    syn
}

/// Fill `values[erased]` so that all `r` syndromes vanish.
///
/// The caller guarantees distinct points. Entries at erased positions are
/// overwritten. With fewer than `r` erasures the spare checks must hold,
/// otherwise the known part is inconsistent.
pub(crate) fn solve_erasures(
    field: &PrimeField,
    points: &[u64],
    values: &mut [u64],
    erased: &[usize],
    r: usize,
) -> Result<(), GrsError> {
    let e = erased.len();
    if e > r {
        return Err(GrsError::TooManyErasures { erased: e, r });
    }
    for &i in erased {
        values[i] = 0;
    }
    let syn = raw_syndromes(field, points, values, r);
    if e == 0 {
        return match syn.iter().position(|&s| s != 0) {
            Some(check) => Err(GrsError::Inconsistent { check }),
            None => Ok(()),
        };
    }

    // Augmented r × (e+1) system: Σ_c x_{E_c}^t y_c = -syn_t.
    let cols = e + 1;
    let mut m = vec![0u64; r * cols];
    for (c, &i) in erased.iter().enumerate() {
        let x = points[i];
        let mut pw = 1 % field.modulus();
        for t in 0..r {
            m[t * cols + c] = pw;
            pw = field.mul(pw, x);
        }
    }
    for t in 0..r {
        m[t * cols + e] = field.neg(syn[t]);
    }

    for c in 0..e {
        let pivot = (c..r)
            .find(|&row| m[row * cols + c] != 0)
            .ok_or(GrsError::RepeatedPoint(erased[c]))?;
        if pivot != c {
            for j in 0..cols {
                m.swap(pivot * cols + j, c * cols + j);
            }
        }
        let inv = field
            .inv(m[c * cols + c])
            .expect("pivot is nonzero by selection");
        for j in c..cols {
            m[c * cols + j] = field.mul(m[c * cols + j], inv);
        }
        for row in 0..r {
            let factor = m[row * cols + c];
            if row == c || factor == 0 {
                continue;
            }
            for j in c..cols {
                let sub = field.mul(factor, m[c * cols + j]);
                m[row * cols + j] = field.sub(m[row * cols + j], sub);
            }
        }
    }
    if let Some(check) = (e..r).find(|&row| m[row * cols + e] != 0) {
        return Err(GrsError::Inconsistent { check });
    }
    for (c, &i) in erased.iter().enumerate() {
        values[i] = m[c * cols + e];
    }
    Ok(())
}

/// Systematic encoding: place `data` at `data_positions` and solve for the
/// remaining `points.len() - data.len()` entries.
pub fn systematic_extend(
    field: &PrimeField,
    data: &[u64],
    points: &[u64],
    data_positions: &[usize],
) -> Result<GrsWord, GrsError> {
    let len = points.len();
    if data.len() != data_positions.len() || data.len() > len {
        return Err(GrsError::BadDimension {
            data: data.len(),
            len,
            r: len.saturating_sub(data.len()),
        });
    }
    check_distinct(field, points)?;
    let mut values = vec![0u64; len];
    let mut is_data = vec![false; len];
    for (&pos, &v) in data_positions.iter().zip(data) {
        if pos >= len || is_data[pos] {
            return Err(GrsError::BadPosition(pos));
        }
        is_data[pos] = true;
        values[pos] = field.reduce(v);
    }
    let erased: Vec<usize> = (0..len).filter(|&i| !is_data[i]).collect();
    let r = erased.len();
    solve_erasures(field, points, &mut values, &erased, r)?;
    Ok(GrsWord::known(points.to_vec(), values, r))
}

/// Fill every erased entry so that all parity checks hold. Known entries are
/// never altered; a nonzero residual on spare checks is reported as
/// [`GrsError::Inconsistent`].
pub fn erasure_decode(field: &PrimeField, word: &GrsWord) -> Result<GrsWord, GrsError> {
    word.check_shape(field)?;
    let erased: Vec<usize> = word.erasures().collect();
    let mut values: Vec<u64> = word
        .values
        .iter()
        .map(|v| v.map_or(0, |x| field.reduce(x)))
        .collect();
    solve_erasures(field, &word.points, &mut values, &erased, word.r)?;
    Ok(GrsWord::known(word.points.clone(), values, word.r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::index::sample, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn syndrome_examples() {
        let f = gf(7);
        let w = GrsWord::known(vec![1, 2, 3, 4], vec![1, 0, 4, 2], 2);
        assert_eq!(syndromes(&f, &w).unwrap(), vec![0, 0]);
        let z = GrsWord::known(vec![1, 2, 3, 4], vec![0; 4], 2);
        assert_eq!(syndromes(&f, &z).unwrap(), vec![0, 0]);
        let w = GrsWord::known(vec![1, 2], vec![1, 1], 1);
        assert_eq!(syndromes(&f, &w).unwrap(), vec![2]);
        let mut e = w.clone();
        e.values[1] = None;
        assert_eq!(syndromes(&f, &e), Err(GrsError::Erased(1)));
    }

    #[test]
    fn systematic_extend_examples() {
        let w = systematic_extend(&gf(7), &[1, 0], &[1, 2, 3, 4], &[0, 1]).unwrap();
        assert_eq!(w.complete().unwrap(), vec![1, 0, 4, 2]);
        let w = systematic_extend(&gf(7), &[0, 0], &[1, 2, 3, 4], &[0, 1]).unwrap();
        assert_eq!(w.complete().unwrap(), vec![0; 4]);
        let w = systematic_extend(&gf(11), &[1, 0], &[1, 3, 5, 7], &[0, 1]).unwrap();
        assert_eq!(w.complete().unwrap(), vec![1, 0, 8, 2]);
        assert_eq!(syndromes(&gf(11), &w).unwrap(), vec![0, 0]);
    }

    #[test]
    fn erasure_decode_examples() {
        let w = GrsWord {
            points: vec![1, 2, 3, 4],
            values: vec![Some(1), Some(0), None, None],
            r: 2,
        };
        assert_eq!(erasure_decode(&gf(7), &w).unwrap().complete().unwrap(), vec![1, 0, 4, 2]);
        let full = GrsWord::known(vec![1, 2, 3, 4], vec![1, 0, 4, 2], 2);
        assert_eq!(erasure_decode(&gf(7), &full).unwrap(), full);
        let w = GrsWord {
            points: vec![1, 3, 5, 7],
            values: vec![None, None, Some(8), Some(2)],
            r: 2,
        };
        assert_eq!(erasure_decode(&gf(11), &w).unwrap().complete().unwrap(), vec![1, 0, 8, 2]);
    }

    #[test]
    fn decode_errors() {
        let f = gf(7);
        let w = GrsWord {
            points: vec![1, 2, 3, 4],
            values: vec![Some(1), None, None, None],
            r: 2,
        };
        assert_eq!(erasure_decode(&f, &w), Err(GrsError::TooManyErasures { erased: 3, r: 2 }));
        let bad = GrsWord {
            points: vec![1, 2, 3, 4],
            values: vec![Some(1), Some(0), Some(4), None],
            r: 2,
        };
        // a corrupted known symbol leaves a residual on the spare check
        let corrupted = GrsWord {
            values: vec![Some(1), Some(1), Some(4), None],
            ..bad.clone()
        };
        assert!(erasure_decode(&f, &bad).is_ok());
        assert!(matches!(erasure_decode(&f, &corrupted), Err(GrsError::Inconsistent { .. })));
        let dup = GrsWord::known(vec![1, 8, 3, 4], vec![0; 4], 2);
        assert_eq!(erasure_decode(&f, &dup), Err(GrsError::RepeatedPoint(1)));
    }

    /// Brute force over GF(5)^4: every codeword, every erasure pattern of
    /// size at most two, compared against exhaustive completion.
    #[test]
    fn brute_force_oracle_gf5() {
        let f = gf(5);
        let points = [1u64, 2, 3, 4];
        let mut all = Vec::new();
        for idx in 0..625u64 {
            let v: Vec<u64> = (0..4).map(|i| (idx / 5u64.pow(i)) % 5).collect();
            let s1 = v.iter().sum::<u64>() % 5;
            let s2 = v.iter().zip(points).map(|(c, x)| c * x).sum::<u64>() % 5;
            if s1 == 0 && s2 == 0 {
                all.push(v);
            }
        }
        assert_eq!(all.len(), 25);
        for cw in &all {
            for mask in 0u32..16 {
                if mask.count_ones() > 2 {
                    continue;
                }
                let erased = |i: usize| mask & (1 << i) != 0;
                let matches: Vec<&Vec<u64>> = all
                    .iter()
                    .filter(|c| (0..4).all(|i| erased(i) || c[i] == cw[i]))
                    .collect();
                assert_eq!(matches.len(), 1);
                let word = GrsWord {
                    points: points.to_vec(),
                    values: (0..4).map(|i| (!erased(i)).then_some(cw[i])).collect(),
                    r: 2,
                };
                assert_eq!(&erasure_decode(&f, &word).unwrap().complete().unwrap(), matches[0]);
            }
        }
    }

    #[test]
    fn random_round_trips() {
        let f = gf(257);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let len = rng.gen_range(2..12);
            let r = rng.gen_range(1..len);
            let points: Vec<u64> = sample(&mut rng, 256, len).into_iter().map(|x| x as u64 + 1).collect();
            let data: Vec<u64> = (0..len - r).map(|_| rng.gen_range(0..257)).collect();
            let positions: Vec<usize> = sample(&mut rng, len, len - r).into_vec();
            let word = systematic_extend(&f, &data, &points, &positions).unwrap();
            assert!(syndromes(&f, &word).unwrap().iter().all(|&s| s == 0));
            let e = rng.gen_range(0..=r);
            let mut damaged = word.clone();
            for i in sample(&mut rng, len, e) {
                damaged.values[i] = None;
            }
            assert_eq!(erasure_decode(&f, &damaged).unwrap(), word);
        }
    }

    #[test]
    fn square_vandermonde_systems_have_no_residual() {
        let f = gf(31);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for r in 1..=8 {
            let points: Vec<u64> = sample(&mut rng, 30, 2 * r).into_iter().map(|x| x as u64 + 1).collect();
            let data: Vec<u64> = (0..r).map(|_| rng.gen_range(0..31)).collect();
            let positions: Vec<usize> = (0..r).collect();
            let word = systematic_extend(&f, &data, &points, &positions).unwrap();
            assert_eq!(syndromes(&f, &word).unwrap(), vec![0; r]);
        }
    }
}
