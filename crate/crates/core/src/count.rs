//! Exact occurrence counts and densities: `ν`, `ν_f`, `binom(n,k)_f`, `ρ`, `ρ_f`
//! and the local density `ρ_k`.

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::estimate::DensityEstimate;
use crate::numeric::floor_tol;
use crate::perm::Permutation;

/// `⌊f⌋` checked against `k ≤ f ≤ n`.
pub(crate) fn effective_width(n: usize, k: usize, f: f64) -> Result<usize> {
    if k == 0 {
        return Err(Error::invalid_argument("pattern length must be positive"));
    }
    if k > n {
        return Err(Error::PatternTooLong {
            pattern: k,
            host: n,
        });
    }
    if !f.is_finite() {
        return Err(Error::invalid_argument(format!("scale {f} is not finite")));
    }
    let width = floor_tol(f);
    if width < k as f64 {
        return Err(Error::ScaleTooSmall { scale: f, k });
    }
    if width > n as f64 {
        return Err(Error::invalid_argument(format!(
            "scale {f} exceeds host length {n}"
        )));
    }
    Ok(width as usize)
}

/// `ν(π, σ)`: the number of occurrences of `π` in `σ`.
pub fn count_occurrences(pattern: &Permutation, host: &Permutation) -> Result<u64> {
    count_occurrences_width(pattern, host, host.len() as f64)
}

/// `ν_f(π, σ)`: occurrences of width at most `⌊f⌋`.
///
/// Enumerates, for each leftmost index, the remaining `k−1` indices inside the
/// window, extending a prefix only while it stays order-isomorphic to the
/// matching prefix of the pattern.
pub fn count_occurrences_width(pattern: &Permutation, host: &Permutation, f: f64) -> Result<u64> {
    let k = pattern.len();
    if k > host.len() {
        return Err(Error::PatternTooLong {
            pattern: k,
            host: host.len(),
        });
    }
    let width = effective_width(host.len(), k, f)?;
    if k == 1 {
        return Ok(host.len() as u64);
    }
    let mut search = WindowSearch {
        pattern: pattern.values(),
        host: host.values(),
        chosen: vec![0; k],
        count: 0,
    };
    let n = host.len();
    for first in 0..=n - k {
        search.chosen[0] = first;
        let end = (first + width).min(n);
        search.extend(1, first + 1, end);
    }
    Ok(search.count)
}

struct WindowSearch<'a> {
    pattern: &'a [u64],
    host: &'a [u64],
    chosen: Vec<usize>,
    count: u64,
}

impl WindowSearch<'_> {
    // chosen[..depth] already placed; candidates are start..end (exclusive, zero-based)
    fn extend(&mut self, depth: usize, start: usize, end: usize) {
        let k = self.pattern.len();
        if depth == k {
            self.count += 1;
            return;
        }
        let remaining = k - depth;
        if end < start + remaining {
            return;
        }
        let target = self.pattern[depth];
        for i in start..=end - remaining {
            let v = self.host[i];
            let fits =
                (0..depth).all(|q| (self.host[self.chosen[q]] < v) == (self.pattern[q] < target));
            if fits {
                self.chosen[depth] = i;
                self.extend(depth + 1, i + 1, end);
            }
        }
    }
}

fn check_subset_args(n: u64, k: u64, f: f64) -> Result<u64> {
    if k < 2 {
        return Err(Error::invalid_argument(format!(
            "width-bounded subset count needs k ≥ 2, got {k}"
        )));
    }
    if k > n {
        return Err(Error::invalid_argument(format!("k = {k} exceeds n = {n}")));
    }
    if !f.is_finite() {
        return Err(Error::invalid_argument(format!("scale {f} is not finite")));
    }
    let width = floor_tol(f);
    if width < k as f64 || width > n as f64 {
        return Err(Error::invalid_argument(format!(
            "need k ≤ f ≤ n, got k = {k}, f = {f}, n = {n}"
        )));
    }
    Ok(width as u64)
}

/// `binom(n,k)_f = Σ_{w=k}^{⌊f⌋} (n−w+1)·C(w−2,k−2)`, the number of `k`-subsets
/// of `[n]` of width at most `f`.
pub fn width_bounded_subset_count(n: u64, k: u64, f: f64) -> Result<BigUint> {
    let width = check_subset_args(n, k, f)?;
    let mut total = BigUint::zero();
    let mut binom = BigUint::one(); // C(w−2, k−2) at w = k
    for w in k..=width {
        if w > k {
            binom = binom * BigUint::from(w - 2) / BigUint::from(w - k);
        }
        total += &binom * BigUint::from(n - w + 1);
    }
    Ok(total)
}

/// Closed form `(F+1−k)(nk−Fk+F)/(k(k−1))·C(F−1,k−2)` with `F = ⌊f⌋`.
pub fn width_bounded_subset_count_closed(n: u64, k: u64, f: f64) -> Result<BigUint> {
    let width = check_subset_args(n, k, f)?;
    let numerator = BigUint::from(width + 1 - k)
        * BigUint::from(n * k - width * k + width)
        * binomial(BigUint::from(width - 1), BigUint::from(k - 2));
    Ok(numerator / BigUint::from(k * (k - 1)))
}

/// Leading-order asymptotic `n·f^{k−1}/(k−1)!` of [`width_bounded_subset_count`].
pub fn asymptotic_subset_count(n: f64, k: u32, f: f64) -> f64 {
    let fact: f64 = (1..k).map(f64::from).product();
    n * f.powi(k as i32 - 1) / fact
}

fn to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Exact `ρ_f(π, σ) = ν_f / binom(n,k)_f`. Patterns of length one have density 1.
pub fn density_at_scale(
    pattern: &Permutation,
    host: &Permutation,
    f: f64,
) -> Result<DensityEstimate> {
    let k = pattern.len();
    let n = host.len();
    let width = effective_width(n, k, f)?;
    if k == 1 {
        return Ok(DensityEstimate::exact(1.0, n as u64));
    }
    let hits = count_occurrences_width(pattern, host, f)?;
    let total = width_bounded_subset_count(n as u64, k as u64, width as f64)?;
    let subsets = total.to_u64().unwrap_or(u64::MAX);
    Ok(DensityEstimate::exact(
        hits as f64 / to_f64(&total),
        subsets,
    ))
}

/// Global density `ρ(π, σ) = ν / C(n, k)`.
pub fn density(pattern: &Permutation, host: &Permutation) -> Result<DensityEstimate> {
    density_at_scale(pattern, host, host.len() as f64)
}

/// Local density `ρ_k(π, σ) = ν_k / (n − k + 1)`, over consecutive windows.
pub fn density_local(pattern: &Permutation, host: &Permutation) -> Result<DensityEstimate> {
    density_at_scale(pattern, host, pattern.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn occurrence_examples() {
        assert_eq!(count_occurrences(&p("132"), &p("35142")).unwrap(), 2);
        assert_eq!(count_occurrences(&p("1"), &p("35142")).unwrap(), 5);
        assert_eq!(count_occurrences(&p("12"), &p("321")).unwrap(), 0);
        assert!(matches!(
            count_occurrences(&p("1234"), &p("321")),
            Err(Error::PatternTooLong { .. })
        ));
    }

    #[test]
    fn width_bounded_examples() {
        assert_eq!(
            count_occurrences_width(&p("132"), &p("35142"), 4.0).unwrap(),
            2
        );
        assert_eq!(
            count_occurrences_width(&p("132"), &p("35142"), 3.0).unwrap(),
            1
        );
        assert_eq!(
            count_occurrences_width(&p("21"), &p("2143"), 2.0).unwrap(),
            2
        );
        assert!(matches!(
            count_occurrences_width(&p("132"), &p("35142"), 2.5),
            Err(Error::ScaleTooSmall { .. })
        ));
    }

    #[test]
    fn subset_count_examples() {
        assert_eq!(
            width_bounded_subset_count(5, 2, 3.0).unwrap(),
            BigUint::from(7u32)
        );
        assert_eq!(
            width_bounded_subset_count(6, 3, 4.0).unwrap(),
            BigUint::from(10u32)
        );
        assert_eq!(
            width_bounded_subset_count_closed(6, 3, 4.0).unwrap(),
            BigUint::from(10u32)
        );
        assert_eq!(
            width_bounded_subset_count(10, 4, 10.0).unwrap(),
            BigUint::from(210u32)
        );
        assert_eq!(
            width_bounded_subset_count(5, 2, 3.7).unwrap(),
            BigUint::from(7u32)
        );
        assert!(width_bounded_subset_count(5, 1, 3.0).is_err());
        assert!(width_bounded_subset_count(5, 3, 2.0).is_err());
        assert!(width_bounded_subset_count(5, 3, 6.0).is_err());
    }

    #[test]
    fn density_examples() {
        let d = density_at_scale(&p("132"), &p("35142"), 5.0).unwrap();
        assert_eq!(d.value, 0.2);
        assert!(d.exact);
        assert_eq!(d.half_width, 0.0);
        let d = density_at_scale(&p("21"), &p("2143"), 2.0).unwrap();
        assert!((d.value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            density_at_scale(&p("12"), &Permutation::identity(30), 7.3)
                .unwrap()
                .value,
            1.0
        );
        assert_eq!(density_local(&p("21"), &p("321")).unwrap().value, 1.0);
        assert!((density_local(&p("12"), &p("2143")).unwrap().value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(density_local(&p("123"), &p("123456")).unwrap().value, 1.0);
        assert_eq!(
            density_at_scale(&p("1"), &p("2143"), 1.0).unwrap().value,
            1.0
        );
    }

    #[test]
    fn asymptotic_formula() {
        assert_eq!(asymptotic_subset_count(100.0, 2, 7.0), 700.0);
        assert!(asymptotic_subset_count(100.0, 3, 7.0) < asymptotic_subset_count(100.0, 3, 8.0));
        let n = 1_000_000u64;
        let f = (n as f64).sqrt();
        let exact = to_f64(&width_bounded_subset_count(n, 3, f).unwrap());
        let ratio = asymptotic_subset_count(n as f64, 3, f) / exact;
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    }
}
