//! Lexicographic indexing of `S_k`, used to histogram sampled patterns.

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Largest pattern length for which `S_k` is indexed; `12!` fits comfortably in `usize`.
pub const MAX_INDEXED_LEN: usize = 12;

pub fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// Lexicographic rank, within `S_k`, of the pattern of `values` (distinct).
pub fn rank_of_values<T: PartialOrd>(values: &[T]) -> usize {
    let k = values.len();
    let mut rank = 0usize;
    for i in 0..k {
        let smaller_after = values[i + 1..].iter().filter(|v| **v < values[i]).count();
        rank = rank * (k - i) + smaller_after;
    }
    rank
}

pub fn rank(pattern: &Permutation) -> usize {
    rank_of_values(pattern.values())
}

/// Inverse of [`rank`].
pub fn unrank(k: usize, mut rank: usize) -> Result<Permutation> {
    if k == 0 || k > MAX_INDEXED_LEN {
        return Err(Error::invalid_argument(format!(
            "pattern length {k} outside 1..={MAX_INDEXED_LEN}"
        )));
    }
    if rank >= factorial(k) {
        return Err(Error::invalid_argument(format!(
            "rank {rank} out of range for S_{k}"
        )));
    }
    let mut digits = vec![0usize; k];
    for i in (0..k).rev() {
        let base = k - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<u64> = (1..=k as u64).collect();
    let values = digits.into_iter().map(|d| pool.remove(d)).collect();
    Ok(Permutation::from_values_unchecked(values))
}

/// All of `S_k` in lexicographic order.
pub fn all_of_length(k: usize) -> Result<Vec<Permutation>> {
    if k == 0 || k > 9 {
        return Err(Error::invalid_argument(format!(
            "refusing to enumerate S_{k}; supported lengths are 1..=9"
        )));
    }
    (0..factorial(k)).map(|r| unrank(k, r)).collect()
}

pub fn is_monotone(pattern: &Permutation) -> bool {
    let v = pattern.values();
    v.windows(2).all(|w| w[0] < w[1]) || v.windows(2).all(|w| w[0] > w[1])
}
