//! Systematic (n, k) Reed-Solomon pre-code used for each file part.
//!
//! The generator is a Vandermonde matrix on the evaluation points
//! `g^0, .., g^(n-1)` (g a field generator), right-multiplied by the inverse of
//! its top k x k block so that the first k codeword symbols are the message.
//! Any k rows of a Vandermonde matrix on distinct points are invertible, and the
//! change of basis preserves that, so the code is MDS. Decoding is erasure-only:
//! pick k received positions and invert the matching generator rows.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::field::{Elem, Field, FieldError, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RsError {
    #[error("invalid RS parameters: {0}")]
    InvalidParams(String),
    #[error("expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("need {need} distinct positions to decode, have {have}")]
    InsufficientSymbols { have: usize, need: usize },
    #[error("position {0} is outside the codeword")]
    PositionOutOfRange(usize),
    #[error("received symbols are not consistent with any codeword")]
    DecodeFailure,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// An (n, k) systematic MDS code over GF(2^p).
#[derive(Clone, Debug)]
pub struct RsCode {
    n: usize,
    k: usize,
    field: Field,
    generator: Matrix,
}

impl RsCode {
    pub fn new(field: Field, n: usize, k: usize) -> Result<Self, RsError> {
        if k == 0 || k > n {
            return Err(RsError::InvalidParams(format!("need 1 <= k <= n, got n={n} k={k}")));
        }
        if n > field.order() - 1 {
            return Err(RsError::InvalidParams(format!(
                "n={n} exceeds q-1={} for GF(2^{})",
                field.order() - 1,
                field.bits()
            )));
        }
        let mut vandermonde = Matrix::zeros(n, k);
        for j in 0..n {
            let point = field.exp(j as u64);
            for c in 0..k {
                vandermonde[(j, c)] = field.pow(point, c as u64);
            }
        }
        let top = vandermonde.select_rows(&(0..k).collect::<Vec<_>>());
        let generator = vandermonde.mul(&field, &top.inverse(&field)?)?;
        Ok(RsCode {
            n,
            k,
            field,
            generator,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// n x k generator; codeword position j is `generator.row(j) . message`.
    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn encode(&self, message: &[Elem]) -> Result<Vec<Elem>, RsError> {
        if message.len() != self.k {
            return Err(RsError::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        Ok(self.generator.transpose().left_mul_vec(&self.field, message)?)
    }

    /// Encodes k equal-length blocks position-wise into n blocks.
    pub fn encode_blocks<B: AsRef<[Elem]>>(&self, message: &[B]) -> Result<Vec<Vec<Elem>>, RsError> {
        if message.len() != self.k {
            return Err(RsError::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        let len = block_len(message)?;
        let mut out: Vec<Vec<Elem>> = message.iter().map(|b| b.as_ref().to_vec()).collect();
        for j in self.k..self.n {
            let mut block = vec![Elem::ZERO; len];
            for (c, m) in message.iter().enumerate() {
                self.field.mul_add_slice(self.generator[(j, c)], m.as_ref(), &mut block);
            }
            out.push(block);
        }
        Ok(out)
    }

    /// Inverse of the generator rows at `positions` (exactly k distinct).
    pub fn decoding_matrix(&self, positions: &[usize]) -> Result<Matrix, RsError> {
        if positions.len() != self.k {
            return Err(RsError::InsufficientSymbols {
                have: positions.len(),
                need: self.k,
            });
        }
        if let Some(&p) = positions.iter().find(|&&p| p >= self.n) {
            return Err(RsError::PositionOutOfRange(p));
        }
        Ok(self.generator.select_rows(positions).inverse(&self.field)?)
    }

    pub fn decode(&self, symbols: &[(usize, Elem)]) -> Result<Vec<Elem>, RsError> {
        let blocks: Vec<(usize, [Elem; 1])> = symbols.iter().map(|&(p, s)| (p, [s])).collect();
        Ok(self.decode_blocks(&blocks)?.into_iter().map(|b| b[0]).collect())
    }

    /// Recovers the k message blocks from at least k (position, block) pairs.
    ///
    /// Extra positions beyond the first k distinct ones are checked against the
    /// re-encoded codeword; a mismatch is reported as [`RsError::DecodeFailure`].
    pub fn decode_blocks<B: AsRef<[Elem]>>(
        &self,
        symbols: &[(usize, B)],
    ) -> Result<Vec<Vec<Elem>>, RsError> {
        let mut by_pos: BTreeMap<usize, &[Elem]> = BTreeMap::new();
        for (p, b) in symbols {
            if *p >= self.n {
                return Err(RsError::PositionOutOfRange(*p));
            }
            match by_pos.get(p) {
                Some(prev) if *prev != b.as_ref() => return Err(RsError::DecodeFailure),
                _ => {
                    by_pos.insert(*p, b.as_ref());
                }
            }
        }
        if by_pos.len() < self.k {
            return Err(RsError::InsufficientSymbols {
                have: by_pos.len(),
                need: self.k,
            });
        }
        let blocks: Vec<&[Elem]> = by_pos.values().copied().collect();
        let len = block_len(&blocks)?;
        let chosen: Vec<usize> = by_pos.keys().take(self.k).copied().collect();
        let inv = self.decoding_matrix(&chosen)?;

        let mut message = vec![vec![Elem::ZERO; len]; self.k];
        for (c, out) in message.iter_mut().enumerate() {
            for (i, p) in chosen.iter().enumerate() {
                self.field.mul_add_slice(inv[(c, i)], by_pos[p], out);
            }
        }

        for (&p, received) in by_pos.iter().skip(self.k) {
            let mut expect = vec![Elem::ZERO; len];
            for (c, m) in message.iter().enumerate() {
                self.field.mul_add_slice(self.generator[(p, c)], m, &mut expect);
            }
            if expect != *received {
                return Err(RsError::DecodeFailure);
            }
        }
        Ok(message)
    }

    /// Checks that every k x k row-submatrix of the generator is invertible.
    ///
    /// Exhaustive when there are at most `budget` k-subsets, otherwise checks
    /// `budget` random subsets. Returns the first failing subset, if any.
    pub fn check_mds<R: Rng>(&self, budget: usize, rng: &mut R) -> Option<Vec<usize>> {
        let singular = |rows: &[usize]| self.generator.select_rows(rows).rank(&self.field) < self.k;
        if binomial(self.n, self.k) <= budget as u128 {
            let mut found = None;
            for_each_subset(self.n, self.k, |s| {
                if found.is_none() && singular(s) {
                    found = Some(s.to_vec());
                }
            });
            found
        } else {
            (0..budget).find_map(|_| {
                let mut s = sample(rng, self.n, self.k).into_vec();
                s.sort_unstable();
                singular(&s).then_some(s)
            })
        }
    }
}

fn block_len<B: AsRef<[Elem]>>(blocks: &[B]) -> Result<usize, RsError> {
    let len = blocks.first().map_or(0, |b| b.as_ref().len());
    match blocks.iter().find(|b| b.as_ref().len() != len) {
        Some(b) => Err(RsError::LengthMismatch {
            expected: len,
            got: b.as_ref().len(),
        }),
        None => Ok(len),
    }
}

/// C(n, k), saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i + 1) as u128,
            None => return u128::MAX,
        }
    }
    acc
}

/// Calls `f` on every k-subset of 0..n in lexicographic order.
pub fn for_each_subset<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn code(n: usize, k: usize) -> RsCode {
        RsCode::new(Field::default(), n, k).unwrap()
    }

    fn random_message(f: &Field, rng: &mut ChaCha8Rng, k: usize) -> Vec<Elem> {
        (0..k).map(|_| f.random(rng)).collect()
    }

    #[test]
    fn generator_is_systematic() {
        let c = code(6, 4);
        let top = c.generator().select_rows(&[0, 1, 2, 3]);
        assert_eq!(top, Matrix::identity(4));
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let c = code(6, 4);
        assert_eq!(c.encode(&[Elem::ZERO; 4]).unwrap(), vec![Elem::ZERO; 6]);
    }

    #[test]
    fn systematic_prefix() {
        let c = code(9, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_message(c.field(), &mut rng, 5);
        assert_eq!(&c.encode(&m).unwrap()[..5], &m[..]);
    }

    #[test]
    fn every_four_of_six_positions_decode() {
        let c = code(6, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = random_message(c.field(), &mut rng, 4);
            let y = c.encode(&m).unwrap();
            let mut count = 0;
            for_each_subset(6, 4, |s| {
                let symbols: Vec<(usize, Elem)> = s.iter().map(|&p| (p, y[p])).collect();
                assert_eq!(c.decode(&symbols).unwrap(), m, "positions {s:?}");
                count += 1;
            });
            assert_eq!(count, 15);
        }
    }

    #[test]
    fn systematic_positions_decode_verbatim() {
        let c = code(6, 4);
        let m = vec![Elem(1), Elem(2), Elem(3), Elem(4)];
        let symbols: Vec<(usize, Elem)> = (0..4).map(|p| (p, m[p])).collect();
        assert_eq!(c.decode(&symbols).unwrap(), m);
    }

    #[test]
    fn too_few_positions() {
        let c = code(6, 4);
        let y = c.encode(&[Elem(1); 4]).unwrap();
        let symbols: Vec<(usize, Elem)> = [0, 2, 5].iter().map(|&p| (p, y[p])).collect();
        assert_eq!(
            c.decode(&symbols),
            Err(RsError::InsufficientSymbols { have: 3, need: 4 })
        );
        // Repeating a position does not count twice.
        let dup = vec![(0, y[0]), (0, y[0]), (2, y[2]), (5, y[5])];
        assert!(matches!(c.decode(&dup), Err(RsError::InsufficientSymbols { .. })));
    }

    #[test]
    fn corrupted_extra_symbol_is_a_decode_failure() {
        let c = code(6, 4);
        let y = c.encode(&[Elem(9), Elem(8), Elem(7), Elem(6)]).unwrap();
        let mut symbols: Vec<(usize, Elem)> = (0..6).map(|p| (p, y[p])).collect();
        symbols[5].1 = c.field().add(symbols[5].1, Elem(1));
        assert_eq!(c.decode(&symbols), Err(RsError::DecodeFailure));
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(RsCode::new(Field::default(), 256, 4).is_err());
        assert!(RsCode::new(Field::default(), 4, 5).is_err());
        assert!(RsCode::new(Field::with_bits(4).unwrap(), 15, 3).is_ok());
        let c = code(6, 4);
        assert!(matches!(c.encode(&[Elem(1); 3]), Err(RsError::LengthMismatch { .. })));
        assert!(matches!(c.decode(&[(6, Elem(1))]), Err(RsError::PositionOutOfRange(6))));
    }

    #[test]
    fn mds_exhaustive_small_and_sampled_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (n, k) in [(6, 4), (9, 4), (12, 7), (15, 1), (15, 15)] {
            assert_eq!(code(n, k).check_mds(10_000, &mut rng), None, "({n},{k})");
        }
        assert_eq!(code(255, 200).check_mds(20, &mut rng), None);
        let small = RsCode::new(Field::with_bits(3).unwrap(), 7, 3).unwrap();
        assert_eq!(small.check_mds(1000, &mut rng), None);
    }

    #[test]
    fn block_encode_matches_scalar() {
        let c = code(8, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let blocks: Vec<Vec<Elem>> = (0..3).map(|_| random_message(c.field(), &mut rng, 10)).collect();
        let coded = c.encode_blocks(&blocks).unwrap();
        for pos in 0..10 {
            let msg: Vec<Elem> = blocks.iter().map(|b| b[pos]).collect();
            let y = c.encode(&msg).unwrap();
            for j in 0..8 {
                assert_eq!(coded[j][pos], y[j]);
            }
        }
        let picked: Vec<(usize, &[Elem])> = [1, 5, 7].iter().map(|&j| (j, coded[j].as_slice())).collect();
        assert_eq!(c.decode_blocks(&picked).unwrap(), blocks);
    }

    #[test]
    fn subsets_enumerate_in_order() {
        let mut all = Vec::new();
        for_each_subset(4, 2, |s| all.push(s.to_vec()));
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(binomial(6, 4), 15);
        let mut empty = 0;
        for_each_subset(3, 0, |_| empty += 1);
        assert_eq!(empty, 1);
    }

    proptest! {
        #[test]
        fn encode_is_linear(seed in any::<u64>(), a in 0u16..256) {
            let c = code(7, 3);
            let f = c.field().clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m1 = random_message(&f, &mut rng, 3);
            let m2 = random_message(&f, &mut rng, 3);
            let combo: Vec<Elem> = m1.iter().zip(&m2).map(|(&x, &y)| f.add(f.mul(Elem(a), x), y)).collect();
            let lhs = c.encode(&combo).unwrap();
            let y1 = c.encode(&m1).unwrap();
            let y2 = c.encode(&m2).unwrap();
            let rhs: Vec<Elem> = y1.iter().zip(&y2).map(|(&x, &y)| f.add(f.mul(Elem(a), x), y)).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn k_minus_one_positions_leave_ambiguity(seed in any::<u64>()) {
            // With k-1 known positions there is a nonzero message vanishing on all of
            // them, so m and m + that message agree there.
            let c = code(6, 4);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = sample(&mut rng, 6, 3).into_vec();
            s.sort_unstable();
            let f = c.field().clone();
            let rows = c.generator().select_rows(&s);
            let v = (0..4).find_map(|t| {
                let others: Vec<usize> = (0..4).filter(|&j| j != t).collect();
                let x = rows.select_columns(&others).solve_any(&f, &rows.select_columns(&[t])).ok()?;
                let mut v = vec![Elem::ONE; 4];
                for (i, &j) in others.iter().enumerate() {
                    v[j] = x[(i, 0)];
                }
                Some(v)
            });
            prop_assert!(v.is_some());
            let v = v.unwrap();
            let m = random_message(&f, &mut rng, 4);
            let m2: Vec<Elem> = m.iter().zip(&v).map(|(&a, &b)| f.add(a, b)).collect();
            let (y, y2) = (c.encode(&m).unwrap(), c.encode(&m2).unwrap());
            prop_assert_ne!(&m, &m2);
            for &p in &s {
                prop_assert_eq!(y[p], y2[p]);
            }
        }
    }
}
