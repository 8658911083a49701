//! Permutations and the structural operations used by every construction:
//! inversion, direct sum, substitution (inflation) and box product.
//!
//! Values and indices are one-based. A [`Permutation`] is immutable once
//! built; every operation returns a fresh value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A bijection on `[n]`, stored as its one-line notation `σ(1) … σ(n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    values: Vec<u64>,
}

impl Permutation {
    /// Builds a permutation from one-based values, checking that they form a bijection on `[n]`.
    pub fn from_values(values: Vec<u64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty value list".into()));
        }
        let mut seen = vec![false; n];
        for (i, &v) in values.iter().enumerate() {
            if v == 0 || v > n as u64 {
                return Err(Error::InvalidPermutation(format!(
                    "value {v} at index {} is outside 1..={n}",
                    i + 1
                )));
            }
            let slot = &mut seen[(v - 1) as usize];
            if *slot {
                return Err(Error::InvalidPermutation(format!("duplicate value {v}")));
            }
            *slot = true;
        }
        Ok(Permutation { values })
    }

    pub(crate) fn from_values_unchecked(values: Vec<u64>) -> Self {
        debug_assert!(Permutation::from_values(values.clone()).is_ok());
        Permutation { values }
    }

    /// The increasing permutation `1 2 … n`.
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutations have length at least 1");
        Permutation {
            values: (1..=n as u64).collect(),
        }
    }

    /// The decreasing permutation `n … 2 1`.
    pub fn decreasing(n: usize) -> Self {
        assert!(n >= 1, "permutations have length at least 1");
        Permutation {
            values: (1..=n as u64).rev().collect(),
        }
    }

    /// Order-isomorphic standardization of a sequence of distinct values.
    pub fn standardize<T: Ord>(values: &[T]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPermutation("empty value list".into()));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].cmp(&values[b]));
        if order.windows(2).any(|w| values[w[0]] == values[w[1]]) {
            return Err(Error::InvalidPermutation(
                "sequence has repeated values".into(),
            ));
        }
        let mut out = vec![0u64; values.len()];
        for (rank, &idx) in order.iter().enumerate() {
            out[idx] = rank as u64 + 1;
        }
        Ok(Permutation { values: out })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a permutation has length at least one.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u64> {
        self.values
    }

    /// `σ(i)` for one-based `i`.
    pub fn at(&self, i: usize) -> u64 {
        self.values[i - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.values
            .iter()
            .enumerate()
            .all(|(i, &v)| v == i as u64 + 1)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u64; self.len()];
        for (i, &v) in self.values.iter().enumerate() {
            inv[(v - 1) as usize] = i as u64 + 1;
        }
        Permutation { values: inv }
    }

    /// `σ ⊕ τ`: `σ` followed by a copy of `τ` shifted above it.
    pub fn direct_sum(&self, other: &Permutation) -> Self {
        let k = self.len() as u64;
        let mut values = Vec::with_capacity(self.len() + other.len());
        values.extend_from_slice(&self.values);
        values.extend(other.values.iter().map(|&v| v + k));
        Permutation { values }
    }

    /// `⊕^c σ`, the direct sum of `c` copies.
    pub fn direct_sum_power(&self, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::invalid_argument(
                "direct sum power needs at least one copy",
            ));
        }
        let k = self.len() as u64;
        let mut values = Vec::with_capacity(self.len() * copies);
        for c in 0..copies as u64 {
            values.extend(self.values.iter().map(|&v| v + c * k));
        }
        Ok(Permutation { values })
    }

    /// `σ[τ]`: every point of `σ` is replaced by a small copy of `τ`.
    ///
    /// Block `i` occupies indices `(i-1)|τ|+1 ..= i|τ|` and the value band
    /// `(σ(i)-1)|τ|+1 ..= σ(i)|τ|`.
    pub fn substitute(&self, inner: &Permutation) -> Self {
        let l = inner.len() as u64;
        let mut values = Vec::with_capacity(self.len() * inner.len());
        for &outer in &self.values {
            let base = (outer - 1) * l;
            values.extend(inner.values.iter().map(|&v| base + v));
        }
        Permutation { values }
    }

    /// `σ ⊡ τ` with `σ ∈ S_k`, `τ ∈ S_ℓ`: the length-`kℓ` permutation made of
    /// `ℓ` juxtaposed copies of `σ` whose inverse is `k` copies of `τ⁻¹`.
    pub fn box_product(&self, other: &Permutation) -> Self {
        let k = self.len();
        let l = other.len() as u64;
        let mut values = Vec::with_capacity(k * other.len());
        for &t in &other.values {
            values.extend(self.values.iter().map(|&s| l * (s - 1) + t));
        }
        Permutation { values }
    }

    /// The pattern `σ(K)` induced on the index subset `K`.
    pub fn pattern_of(&self, subset: &IndexSubset) -> Result<Permutation> {
        if subset.last() > self.len() {
            return Err(Error::InvalidSubset(format!(
                "index {} exceeds permutation length {}",
                subset.last(),
                self.len()
            )));
        }
        let image: Vec<u64> = subset
            .indices()
            .iter()
            .map(|&i| self.values[i - 1])
            .collect();
        Permutation::standardize(&image)
    }

    /// Copy of the values at one-based positions `start ..= end`, standardized.
    pub fn window(&self, start: usize, end: usize) -> Result<Permutation> {
        if start == 0 || start > end || end > self.len() {
            return Err(Error::InvalidSubset(format!(
                "window {start}..={end} not inside 1..={}",
                self.len()
            )));
        }
        Permutation::standardize(&self.values[start - 1..end])
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.values {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts comma- and/or whitespace-separated values (`"3 5 1 4 2"`,
    /// `"3,5,1,4,2"`). A single separator-free token of digits `1`–`9` with
    /// at least two characters is read one digit per value (`"35142"`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let tokens: Vec<&str> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        let values: Vec<u64> = if tokens.len() == 1
            && tokens[0].len() >= 2
            && tokens[0].bytes().all(|b| (b'1'..=b'9').contains(&b))
        {
            tokens[0].bytes().map(|b| (b - b'0') as u64).collect()
        } else {
            tokens
                .iter()
                .map(|t| {
                    t.parse::<u64>()
                        .map_err(|_| Error::Parse(format!("not a permutation value: {t:?}")))
                })
                .collect::<Result<_>>()?
        };
        Permutation::from_values(values)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Values(Vec<u64>),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Values(v) => Permutation::from_values(v),
            Repr::Text(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// A strictly increasing set of one-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSubset {
    indices: Vec<usize>,
}

impl IndexSubset {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSubset("empty subset".into()));
        }
        if indices[0] == 0 {
            return Err(Error::InvalidSubset("indices are one-based".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(
                "indices must be strictly increasing".into(),
            ));
        }
        Ok(IndexSubset { indices })
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(IndexSubset::new(indices.clone()).is_ok());
        IndexSubset { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> usize {
        self.indices[0]
    }

    pub fn last(&self) -> usize {
        *self.indices.last().unwrap()
    }

    /// `last − first + 1`.
    pub fn width(&self) -> usize {
        self.last() - self.first() + 1
    }
}
