//! Base-p digit arithmetic on the Vilenkin group.
//!
//! Three index spaces meet here:
//!
//! * Paley indices `m = Σ m_k p^k` label characters; digit `m_k` is the
//!   exponent of the k-th generalized Rademacher function.
//! * Chaos terms `(ks, ls)` are the sparse view of a Paley index with exactly
//!   `d` nonzero digits.
//! * Cells of level `L` partition `[0, 1)` into `p^L` intervals. A cell's
//!   integer index is read most-significant digit first: digit `c_1` is the
//!   first fractional base-p digit of every point in the cell, and
//!   `index = Σ_{j=1}^{L} c_j p^{L-j}`.
//!
//! The k-th Rademacher function depends on digit `c_{k+1}` only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported base.
pub const MAX_BASE: usize = 16;
/// Default cap on `p^L`.
pub const MAX_CELLS: usize = 1 << 24;

pub fn check_base(p: usize) -> Result<()> {
    if (2..=MAX_BASE).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidBase(p))
    }
}

/// `p^level`, rejecting sizes above [`MAX_CELLS`].
pub fn cell_count(p: usize, level: usize) -> Result<usize> {
    cell_count_with_limit(p, level, MAX_CELLS)
}

pub fn cell_count_with_limit(p: usize, level: usize, limit: usize) -> Result<usize> {
    check_base(p)?;
    let mut n: usize = 1;
    for _ in 0..level {
        n = match n.checked_mul(p) {
            Some(v) if v <= limit => v,
            _ => return Err(Error::TooManyCells { p, level, limit }),
        };
    }
    Ok(n)
}

/// Least-significant-first base-p digits of `n`, zero padded to `length`.
pub fn to_digits(n: usize, p: usize, length: usize) -> Result<Vec<usize>> {
    check_base(p)?;
    let mut digits = Vec::with_capacity(length);
    let mut rest = n;
    for _ in 0..length {
        digits.push(rest % p);
        rest /= p;
    }
    if rest != 0 {
        return Err(Error::MalformedIndex(format!(
            "{n} needs more than {length} base-{p} digits"
        )));
    }
    Ok(digits)
}

/// Inverse of [`to_digits`].
pub fn from_digits(digits: &[usize], p: usize) -> usize {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Number of nonzero base-p digits of `n`: the chaos order of character `n`.
pub fn nonzero_digits(mut n: usize, p: usize) -> usize {
    let mut count = 0;
    while n > 0 {
        if !n.is_multiple_of(p) {
            count += 1;
        }
        n /= p;
    }
    count
}

/// A natural number with its base-p expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PaleyIndex {
    value: usize,
    p: usize,
    digits: Vec<usize>,
}

impl PaleyIndex {
    pub fn new(value: usize, p: usize) -> Result<Self> {
        check_base(p)?;
        let mut digits = Vec::new();
        let mut rest = value;
        while rest > 0 {
            digits.push(rest % p);
            rest /= p;
        }
        Ok(Self { value, p, digits })
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn base(&self) -> usize {
        self.p
    }

    /// Digits, least significant first, without trailing zeros.
    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// Digit at position `k`, zero beyond the expansion.
    pub fn digit(&self, k: usize) -> usize {
        self.digits.get(k).copied().unwrap_or(0)
    }
}

/// A product `R_{k_1}^{l_1} ⋯ R_{k_d}^{l_d}` with strictly increasing positions.
///
/// The derived ordering compares `ks` first, then `ls`, which is the
/// enumeration order used everywhere coefficients are listed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChaosTerm {
    ks: Vec<usize>,
    ls: Vec<usize>,
}

impl ChaosTerm {
    pub fn new(ks: Vec<usize>, ls: Vec<usize>, p: usize) -> Result<Self> {
        check_base(p)?;
        if ks.is_empty() {
            return Err(Error::MalformedIndex("chaos term of order 0".into()));
        }
        if ks.len() != ls.len() {
            return Err(Error::MalformedIndex(format!(
                "{} positions but {} exponents",
                ks.len(),
                ls.len()
            )));
        }
        if ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedIndex(format!(
                "positions {ks:?} are not strictly increasing"
            )));
        }
        if let Some((i, &l)) = ls.iter().enumerate().find(|(_, &l)| l == 0 || l >= p) {
            return Err(Error::ExponentOutOfRange { index: i, value: l });
        }
        Ok(Self { ks, ls })
    }

    pub fn positions(&self) -> &[usize] {
        &self.ks
    }

    pub fn exponents(&self) -> &[usize] {
        &self.ls
    }

    pub fn order(&self) -> usize {
        self.ks.len()
    }

    pub fn max_position(&self) -> usize {
        *self.ks.last().expect("terms are never empty")
    }

    /// The Paley index `Σ l_i p^{k_i}`.
    pub fn paley_value(&self, p: usize) -> usize {
        self.ks
            .iter()
            .zip(&self.ls)
            .map(|(&k, &l)| l * p.pow(k as u32))
            .sum()
    }

    /// True when every exponent agrees with `exponents[k]` at its position.
    pub fn matches(&self, exponents: &[usize]) -> bool {
        self.ks
            .iter()
            .zip(&self.ls)
            .all(|(&k, &l)| exponents.get(k) == Some(&l))
    }
}

pub fn paley_encode(term: &ChaosTerm, p: usize) -> Result<PaleyIndex> {
    PaleyIndex::new(term.paley_value(p), p)
}

/// Recovers the unique term whose exponents are the nonzero digits of `n`.
pub fn paley_decode(n: usize, p: usize) -> Result<ChaosTerm> {
    check_base(p)?;
    if n == 0 {
        return Err(Error::NotAChaosIndex(0));
    }
    let index = PaleyIndex::new(n, p)?;
    let (ks, ls) = index
        .digits()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l != 0)
        .map(|(k, &l)| (k, l))
        .unzip();
    Ok(ChaosTerm { ks, ls })
}

/// One of the `p^level` intervals `[Σ c_j p^{-j}, Σ c_j p^{-j} + p^{-level})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub p: usize,
    pub level: usize,
    pub index: usize,
}

impl CellIndex {
    pub fn new(p: usize, level: usize, index: usize) -> Result<Self> {
        let n = cell_count(p, level)?;
        if index >= n {
            return Err(Error::MalformedIndex(format!(
                "cell {index} out of range for {p}^{level}"
            )));
        }
        Ok(Self { p, level, index })
    }

    /// Builds a cell from its fractional digits `(c_1, …, c_L)`.
    pub fn from_digits(p: usize, digits: &[usize]) -> Result<Self> {
        check_base(p)?;
        if let Some(&c) = digits.iter().find(|&&c| c >= p) {
            return Err(Error::MalformedIndex(format!("digit {c} >= base {p}")));
        }
        let index = digits.iter().fold(0, |acc, &c| acc * p + c);
        Self::new(p, digits.len(), index)
    }

    /// Fractional digit `c_j`, `1 <= j <= level`.
    pub fn digit(&self, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.level);
        (self.index / self.p.pow((self.level - j) as u32)) % self.p
    }

    /// `(c_1, …, c_L)`.
    pub fn digits(&self) -> Vec<usize> {
        (1..=self.level).map(|j| self.digit(j)).collect()
    }

    /// Left endpoint of the interval.
    pub fn left(&self) -> f64 {
        self.index as f64 / (self.p as f64).powi(self.level as i32)
    }

    pub fn zero(p: usize, level: usize) -> Self {
        Self { p, level, index: 0 }
    }

    fn check_same(&self, other: &CellIndex) -> Result<()> {
        if self.p != other.p || self.level != other.level {
            return Err(Error::LevelMismatch {
                left: (self.p, self.level),
                right: (other.p, other.level),
            });
        }
        Ok(())
    }

    fn digitwise(&self, other: &CellIndex, op: impl Fn(usize, usize) -> usize) -> Result<Self> {
        self.check_same(other)?;
        let p = self.p;
        let (mut a, mut b) = (self.index, other.index);
        let mut out = 0;
        let mut scale = 1;
        for _ in 0..self.level {
            out += op(a % p, b % p) * scale;
            a /= p;
            b /= p;
            scale *= p;
        }
        Ok(Self {
            p,
            level: self.level,
            index: out,
        })
    }
}

/// `x ⊖ z`: digitwise subtraction mod p.
pub fn group_sub(x: &CellIndex, z: &CellIndex) -> Result<CellIndex> {
    let p = x.p;
    x.digitwise(z, |a, b| (a + p - b) % p)
}

/// `x ⊕ z`: digitwise addition mod p.
pub fn group_add(x: &CellIndex, z: &CellIndex) -> Result<CellIndex> {
    let p = x.p;
    x.digitwise(z, |a, b| (a + b) % p)
}

/// Digitwise `x ⊖ z` on raw cell indices; both must be below `p^level`.
pub(crate) fn sub_indices(x: usize, z: usize, p: usize, level: usize) -> usize {
    let (mut a, mut b) = (x, z);
    let mut out = 0;
    let mut scale = 1;
    for _ in 0..level {
        out += ((a % p + p - b % p) % p) * scale;
        a /= p;
        b /= p;
        scale *= p;
    }
    out
}

/// `C(n, k)` with u128 arithmetic.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All order-`d` terms with positions in `0..=n_max`, lexicographic in `(ks, ls)`.
pub fn enumerate_nd(p: usize, d: usize, n_max: usize) -> Result<Vec<ChaosTerm>> {
    check_base(p)?;
    if d == 0 {
        return Err(Error::InvalidOrder("chaos order must be at least 1".into()));
    }
    if d > n_max + 1 {
        return Err(Error::EmptyIndexSet { d, n_max });
    }
    let count = binomial(n_max + 1, d) * ((p - 1) as u128).pow(d as u32);
    let mut out = Vec::with_capacity(count.min(1 << 24) as usize);

    let mut ks: Vec<usize> = (0..d).collect();
    loop {
        let mut ls = vec![1usize; d];
        loop {
            out.push(ChaosTerm {
                ks: ks.clone(),
                ls: ls.clone(),
            });
            // odometer, last exponent fastest
            let mut i = d;
            while i > 0 && ls[i - 1] == p - 1 {
                ls[i - 1] = 1;
                i -= 1;
            }
            if i == 0 {
                break;
            }
            ls[i - 1] += 1;
        }
        // next combination in lexicographic order
        let mut i = d;
        while i > 0 && ks[i - 1] == n_max + 1 - d + (i - 1) {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        ks[i - 1] += 1;
        for t in i..d {
            ks[t] = ks[t - 1] + 1;
        }
    }
    Ok(out)
}

/// Every exponent sequence in `{1, …, p-1}^len`, lexicographic.
pub fn exponent_sequences(p: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (p - 1).checked_pow(len as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut i| {
        let mut seq = vec![1; len];
        for slot in seq.iter_mut().rev() {
            *slot = 1 + i % (p - 1);
            i /= p - 1;
        }
        seq
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn digits_examples() {
        assert_eq!(to_digits(5, 2, 4).unwrap(), vec![1, 0, 1, 0]);
        assert_eq!(to_digits(0, 3, 2).unwrap(), vec![0, 0]);
        assert_eq!(to_digits(7, 3, 3).unwrap(), vec![1, 2, 0]);
        assert!(matches!(to_digits(9, 3, 2), Err(Error::MalformedIndex(_))));
        assert!(matches!(to_digits(1, 1, 2), Err(Error::InvalidBase(1))));
    }

    #[test]
    fn paley_examples() {
        let t = ChaosTerm::new(vec![0, 1], vec![1, 1], 2).unwrap();
        assert_eq!(paley_encode(&t, 2).unwrap().value(), 3);
        let t = ChaosTerm::new(vec![0, 1], vec![2, 1], 3).unwrap();
        assert_eq!(paley_encode(&t, 3).unwrap().value(), 5);
        let t = paley_decode(6, 3).unwrap();
        assert_eq!(t.positions(), &[1]);
        assert_eq!(t.exponents(), &[2]);
        assert_eq!(paley_decode(0, 3), Err(Error::NotAChaosIndex(0)));
    }

    #[test]
    fn term_validation() {
        assert!(ChaosTerm::new(vec![1, 1], vec![1, 1], 3).is_err());
        assert!(ChaosTerm::new(vec![2, 1], vec![1, 1], 3).is_err());
        assert!(ChaosTerm::new(vec![0], vec![3], 3).is_err());
        assert!(ChaosTerm::new(vec![0], vec![0], 3).is_err());
        assert!(ChaosTerm::new(vec![], vec![], 3).is_err());
        assert!(ChaosTerm::new(vec![0, 1], vec![1], 3).is_err());
    }

    #[test]
    fn group_examples() {
        let x = CellIndex::from_digits(3, &[2, 1]).unwrap();
        let z = CellIndex::from_digits(3, &[1, 2]).unwrap();
        assert_eq!(group_sub(&x, &z).unwrap().digits(), vec![1, 2]);
        assert_eq!(group_sub(&x, &CellIndex::zero(3, 2)).unwrap(), x);
        let y = CellIndex::from_digits(2, &[1, 1, 0]).unwrap();
        assert_eq!(group_sub(&y, &y).unwrap().digits(), vec![0, 0, 0]);
        let w = CellIndex::from_digits(3, &[1, 1, 1]).unwrap();
        assert!(matches!(
            group_sub(&x, &w),
            Err(Error::LevelMismatch { .. })
        ));
    }

    #[test]
    fn cell_digits_are_most_significant_first() {
        let c = CellIndex::new(3, 2, 5).unwrap();
        assert_eq!(c.digits(), vec![1, 2]);
        assert!((c.left() - 5.0 / 9.0).abs() < 1e-15);
    }

    fn paley_set(p: usize, d: usize, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = enumerate_nd(p, d, n)
            .unwrap()
            .iter()
            .map(|t| t.paley_value(p))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(paley_set(2, 1, 1), vec![1, 2]);
        assert_eq!(paley_set(3, 1, 1), vec![1, 2, 3, 6]);
        assert_eq!(paley_set(2, 2, 1), vec![3]);
        assert_eq!(
            enumerate_nd(2, 3, 1),
            Err(Error::EmptyIndexSet { d: 3, n_max: 1 })
        );
    }

    #[test]
    fn enumeration_is_sorted_and_complete() {
        for p in 2..=5 {
            for n in 0..5 {
                for d in 1..=n + 1 {
                    let terms = enumerate_nd(p, d, n).unwrap();
                    assert_eq!(
                        terms.len() as u128,
                        binomial(n + 1, d) * ((p - 1) as u128).pow(d as u32)
                    );
                    assert!(terms.windows(2).all(|w| w[0] < w[1]));
                    // brute force: indices below p^{n+1} with exactly d nonzero digits
                    let brute = (1..p.pow(n as u32 + 1))
                        .filter(|&m| nonzero_digits(m, p) == d)
                        .count();
                    assert_eq!(terms.len(), brute);
                }
            }
        }
    }

    #[test]
    fn exponent_sequences_count() {
        let all: Vec<_> = exponent_sequences(3, 3).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], vec![1, 1, 1]);
        assert_eq!(all[7], vec![2, 2, 2]);
        assert_eq!(exponent_sequences(2, 4).count(), 1);
    }

    proptest! {
        #[test]
        fn paley_round_trip(p in 2usize..8, mask in 1u32..(1 << 8), seed in any::<u64>()) {
            let ks: Vec<usize> = (0..8).filter(|k| mask & (1 << k) != 0).collect();
            let ls: Vec<usize> = ks
                .iter()
                .enumerate()
                .map(|(i, _)| 1 + ((seed >> (4 * i)) as usize) % (p - 1))
                .collect();
            let t = ChaosTerm::new(ks, ls, p).unwrap();
            let n = paley_encode(&t, p).unwrap();
            prop_assert_eq!(nonzero_digits(n.value(), p), t.order());
            prop_assert_eq!(paley_decode(n.value(), p).unwrap(), t);
        }

        #[test]
        fn group_laws(p in 2usize..7, level in 1usize..6, a in any::<usize>(), b in any::<usize>()) {
            let n = p.pow(level as u32);
            let x = CellIndex::new(p, level, a % n).unwrap();
            let y = CellIndex::new(p, level, b % n).unwrap();
            let zero = CellIndex::zero(p, level);
            prop_assert_eq!(group_sub(&x, &zero).unwrap(), x);
            prop_assert_eq!(group_sub(&x, &x).unwrap(), zero);
            prop_assert_eq!(group_sub(&group_add(&x, &y).unwrap(), &y).unwrap(), x);
            prop_assert_eq!(sub_indices(x.index, y.index, p, level), group_sub(&x, &y).unwrap().index);
        }

        #[test]
        fn digits_round_trip(p in 2usize..17, n in 0usize..100_000) {
            let d = to_digits(n, p, 20).unwrap();
            prop_assert!(d.iter().all(|&x| x < p));
            prop_assert_eq!(from_digits(&d, p), n);
        }
    }
}
