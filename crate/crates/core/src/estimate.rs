//! Density estimates, truncated density vectors, and the Monte Carlo
//! estimators for `ρ_f(π, σ)` built on uniform sampling of width-bounded
//! index subsets.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern;
use crate::perm::{IndexSubset, Permutation};
use crate::seed::{chunked_histogram, SeedStream};

/// A density value, exact or sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    /// Number of sampled subsets, or the number of subsets counted for an exact value.
    pub samples: u64,
    /// Hoeffding half-width at `confidence`; zero when exact.
    pub half_width: f64,
    pub confidence: f64,
    pub exact: bool,
}

impl DensityEstimate {
    pub fn exact(value: f64, subsets: u64) -> Self {
        DensityEstimate {
            value,
            samples: subsets,
            half_width: 0.0,
            confidence: 1.0,
            exact: true,
        }
    }

    pub fn sampled(hits: u64, samples: u64, confidence: f64) -> Self {
        DensityEstimate {
            value: hits as f64 / samples as f64,
            samples,
            half_width: hoeffding_half_width(samples, confidence),
            confidence,
            exact: false,
        }
    }

    /// True when `other` lies inside this estimate's confidence interval.
    pub fn covers(&self, other: f64) -> bool {
        (self.value - other).abs() <= self.half_width
    }
}

/// Two-sided Hoeffding bound for a mean of `samples` values in `[0, 1]`:
/// `sqrt(ln(2/δ) / 2N)` with `δ = 1 − confidence`.
pub fn hoeffding_half_width(samples: u64, confidence: f64) -> f64 {
    let delta = 1.0 - confidence;
    ((2.0 / delta).ln() / (2.0 * samples as f64)).sqrt()
}

pub(crate) fn check_confidence(confidence: f64) -> Result<()> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid_argument(format!(
            "confidence {confidence} not in (0, 1)"
        )))
    }
}

/// A truncated scale limit: pattern densities for patterns up to `max_len`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DensityVector {
    entries: BTreeMap<Permutation, f64>,
}

impl DensityVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pattern: Permutation, value: f64) {
        self.entries.insert(pattern, value);
    }

    pub fn get(&self, pattern: &Permutation) -> Option<f64> {
        self.entries.get(pattern).copied()
    }

    pub fn max_len(&self) -> usize {
        self.entries.keys().map(Permutation::len).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, f64)> {
        self.entries.iter().map(|(p, &v)| (p, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of the entries over patterns of length `k`.
    pub fn sum_for_length(&self, k: usize) -> f64 {
        self.entries
            .iter()
            .filter(|(p, _)| p.len() == k)
            .map(|(_, v)| v)
            .sum()
    }

    /// Largest entrywise difference; patterns missing from one side count as zero.
    pub fn max_abs_diff(&self, other: &DensityVector) -> f64 {
        let keys = self.entries.keys().chain(other.entries.keys());
        keys.map(|p| (self.get(p).unwrap_or(0.0) - other.get(p).unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: DensityVector) {
        self.entries.extend(other.entries);
    }
}

/// Uniform sampler over the `k`-subsets of `[n]` of width at most `⌊f⌋`.
///
/// Draws the width `w` with probability proportional to `(n−w+1)·C(w−2,k−2)`,
/// then the leftmost index uniformly on `1..=n−w+1`, then `k−2` interior
/// offsets without replacement from the `w−2` interior slots.
#[derive(Debug, Clone)]
pub struct WidthBoundedSampler {
    n: usize,
    k: usize,
    min_width: usize,
    widths: Option<WeightedIndex<f64>>,
}

impl WidthBoundedSampler {
    pub fn new(n: usize, k: usize, f: f64) -> Result<Self> {
        let max_width = crate::count::effective_width(n, k, f)?;
        if k <= 1 {
            return Ok(WidthBoundedSampler {
                n,
                k,
                min_width: 1,
                widths: None,
            });
        }
        let mut weights = Vec::with_capacity(max_width - k + 1);
        // C(w−2, k−2), advanced in floating point
        let mut binom = 1.0f64;
        for w in k..=max_width {
            if w > k {
                binom *= (w - 2) as f64 / (w - k) as f64;
            }
            weights.push((n - w + 1) as f64 * binom);
        }
        let widths = WeightedIndex::new(weights)
            .map_err(|e| Error::invalid_argument(format!("width distribution: {e}")))?;
        Ok(WidthBoundedSampler {
            n,
            k,
            min_width: k,
            widths: Some(widths),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Writes a sampled subset (one-based, increasing) into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        let w = match &self.widths {
            Some(dist) => self.min_width + dist.sample(rng),
            None => 1,
        };
        let first = rng.gen_range(1..=self.n - w + 1);
        out.push(first);
        if self.k >= 2 {
            if self.k > 2 {
                let start = out.len();
                out.extend(
                    rand::seq::index::sample(rng, w - 2, self.k - 2)
                        .into_iter()
                        .map(|o| first + 1 + o),
                );
                out[start..].sort_unstable();
            }
            out.push(first + w - 1);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> IndexSubset {
        let mut out = Vec::with_capacity(self.k);
        self.sample_into(rng, &mut out);
        IndexSubset::from_sorted_unchecked(out)
    }
}

/// One uniform draw from the width-`≤ f` `k`-subsets of `[n]`.
pub fn sample_width_bounded_subset<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    f: f64,
    rng: &mut R,
) -> Result<IndexSubset> {
    Ok(WidthBoundedSampler::new(n, k, f)?.sample(rng))
}

/// Pattern counts over all of `S_k` from one shared sample of width-bounded subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternHistogram {
    pub k: usize,
    pub counts: Vec<u64>,
    pub samples: u64,
    pub confidence: f64,
}

impl PatternHistogram {
    pub fn estimate(&self, pattern: &Permutation) -> DensityEstimate {
        assert_eq!(
            pattern.len(),
            self.k,
            "pattern length does not match histogram"
        );
        DensityEstimate::sampled(
            self.counts[pattern::rank(pattern)],
            self.samples,
            self.confidence,
        )
    }

    pub fn to_vector(&self) -> DensityVector {
        let mut v = DensityVector::new();
        for (r, &c) in self.counts.iter().enumerate() {
            let p = pattern::unrank(self.k, r).expect("rank within S_k");
            v.insert(p, c as f64 / self.samples as f64);
        }
        v
    }
}

fn check_mc(pattern_len: usize, host: &Permutation, samples: u64, confidence: f64) -> Result<()> {
    if pattern_len > host.len() {
        return Err(Error::PatternTooLong {
            pattern: pattern_len,
            host: host.len(),
        });
    }
    if pattern_len == 0 || pattern_len > pattern::MAX_INDEXED_LEN {
        return Err(Error::invalid_argument(format!(
            "unsupported pattern length {pattern_len}"
        )));
    }
    if samples == 0 {
        return Err(Error::invalid_argument("samples must be positive"));
    }
    check_confidence(confidence)
}

/// Shared-sample Monte Carlo estimate of `ρ_f(π, σ)` for every `π ∈ S_k`.
pub fn estimate_histogram_at_scale(
    host: &Permutation,
    k: usize,
    f: f64,
    samples: u64,
    confidence: f64,
    stream: SeedStream,
) -> Result<PatternHistogram> {
    check_mc(k, host, samples, confidence)?;
    let sampler = WidthBoundedSampler::new(host.len(), k, f)?;
    let values = host.values();
    let counts = chunked_histogram(samples, stream, pattern::factorial(k), |rng| {
        let mut idx = Vec::with_capacity(k);
        sampler.sample_into(rng, &mut idx);
        let mut image = [0u64; pattern::MAX_INDEXED_LEN];
        for (slot, &i) in image.iter_mut().zip(&idx) {
            *slot = values[i - 1];
        }
        pattern::rank_of_values(&image[..k])
    });
    Ok(PatternHistogram {
        k,
        counts,
        samples,
        confidence,
    })
}

/// Monte Carlo estimate of `ρ_f(π, σ)` with a Hoeffding half-width.
pub fn estimate_density_at_scale(
    pattern: &Permutation,
    host: &Permutation,
    f: f64,
    samples: u64,
    confidence: f64,
    stream: SeedStream,
) -> Result<DensityEstimate> {
    let hist = estimate_histogram_at_scale(host, pattern.len(), f, samples, confidence, stream)?;
    Ok(hist.estimate(pattern))
}

/// Shared-sample density vector over `S_k` for each `k` in `lengths`.
pub fn estimate_vector_at_scale(
    host: &Permutation,
    lengths: &[usize],
    f: f64,
    samples: u64,
    stream: SeedStream,
) -> Result<DensityVector> {
    let mut out = DensityVector::new();
    for &k in lengths {
        let hist = estimate_histogram_at_scale(host, k, f, samples, 0.99, stream.child(k as u64))?;
        out.extend(hist.to_vector());
    }
    Ok(out)
}
