//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use permlab::permuton::{Tier, TierKind};
use permlab::{pattern, IndexSubset, Permutation};
use rand::seq::SliceRandom;
use rand::Rng;

/// All `k`-subsets of `1..=n`, one-based and increasing.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

pub fn naive_subset_count(n: usize, k: usize, f: f64) -> u64 {
    combinations(n, k)
        .iter()
        .filter(|s| (s[k - 1] - s[0] + 1) as f64 <= f + 1e-9)
        .count() as u64
}

pub fn naive_occurrences(pattern: &Permutation, host: &Permutation, f: f64) -> u64 {
    let k = pattern.len();
    combinations(host.len(), k)
        .into_iter()
        .filter(|s| (s[k - 1] - s[0] + 1) as f64 <= f.floor())
        .filter(|s| {
            host.pattern_of(&IndexSubset::new(s.clone()).unwrap())
                .unwrap()
                == *pattern
        })
        .count() as u64
}

pub fn random_perm<R: Rng>(n: usize, rng: &mut R) -> Permutation {
    let mut v: Vec<u64> = (1..=n as u64).collect();
    v.shuffle(rng);
    Permutation::from_values(v).unwrap()
}

/// Exact `ρ(π, Γ)` for a tiered permuton.
///
/// The tiers of the points taken in x-order are i.i.d. with the tier heights
/// as probabilities; given the tiers, the y-order is forced except inside
/// uniform tiers, where it is uniformly random.
pub fn tiered_density(tiers: &[Tier], pi: &Permutation) -> f64 {
    let k = pi.len();
    let d = tiers.len();
    let v = pi.values();
    let mut total = 0.0;
    let mut assignment = vec![0usize; k];
    loop {
        let consistent = (0..k).all(|a| {
            (a + 1..k).all(|b| {
                let (ta, tb) = (assignment[a], assignment[b]);
                let up = v[a] < v[b];
                if ta != tb {
                    return up == (ta < tb);
                }
                match tiers[ta].kind {
                    TierKind::Increasing => up,
                    TierKind::Decreasing => !up,
                    TierKind::Uniform => true,
                }
            })
        });
        if consistent {
            let mut p: f64 = assignment.iter().map(|&t| tiers[t].height).product();
            for (t, tier) in tiers.iter().enumerate() {
                if tier.kind == TierKind::Uniform {
                    let size = assignment.iter().filter(|&&x| x == t).count();
                    p /= pattern::factorial(size) as f64;
                }
            }
            total += p;
        }
        let mut i = 0;
        while i < k {
            assignment[i] += 1;
            if assignment[i] < d {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if i == k {
            return total;
        }
    }
}
