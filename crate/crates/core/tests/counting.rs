mod common;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use permlab::count::{
    asymptotic_subset_count, count_occurrences, count_occurrences_width, density_at_scale,
    width_bounded_subset_count, width_bounded_subset_count_closed,
};
use permlab::estimate::{
    estimate_density_at_scale, estimate_histogram_at_scale, WidthBoundedSampler,
};
use permlab::{pattern, Error, Permutation, SeedStream};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn perm(len: usize) -> impl Strategy<Value = Permutation> {
    Just((1..=len as u64).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_values(v).unwrap())
}

proptest! {
    #[test]
    fn sum_and_closed_forms_agree(n in 2u64..3000, k in 2u64..9, frac in 0.0f64..1.0, t in 0.0f64..1.0) {
        prop_assume!(k <= n);
        let f = k as f64 + t * (n - k) as f64 + frac * 0.99;
        let f = f.min(n as f64);
        prop_assert_eq!(
            width_bounded_subset_count(n, k, f).unwrap(),
            width_bounded_subset_count_closed(n, k, f).unwrap()
        );
    }

    #[test]
    fn windowed_counts_match_the_naive_scan(
        (host, pat, f) in (3usize..11).prop_flat_map(|n| (perm(n), (1usize..=3.min(n)).prop_flat_map(perm), Just(n)))
            .prop_flat_map(|(h, p, n)| { let k = p.len(); (Just(h), Just(p), (k as f64)..=(n as f64)) })
    ) {
        prop_assert_eq!(count_occurrences_width(&pat, &host, f).unwrap(), common::naive_occurrences(&pat, &host, f));
    }

    #[test]
    fn densities_over_s_k_sum_to_one(host in perm(9), k in 2usize..4, w in 0usize..7) {
        let f = (k + w).min(host.len()) as f64;
        let total: f64 = pattern::all_of_length(k).unwrap().iter()
            .map(|p| density_at_scale(p, &host, f).unwrap().value).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn full_width_counts_are_binomials() {
    for n in 2..=20u64 {
        for k in 2..=n.min(7) {
            let expect = num_integer::binomial(BigUint::from(n), BigUint::from(k));
            assert_eq!(width_bounded_subset_count(n, k, n as f64).unwrap(), expect);
        }
    }
}

#[test]
fn asymptotic_ratio_tends_to_one() {
    let ratio = |n: u64| {
        let f = (n as f64).powf(0.5);
        asymptotic_subset_count(n as f64, 4, f)
            / width_bounded_subset_count(n, 4, f)
                .unwrap()
                .to_f64()
                .unwrap()
    };
    let (a, b) = (ratio(10_000), ratio(10_000_000));
    assert!((b - 1.0).abs() < (a - 1.0).abs());
    assert!((b - 1.0).abs() < 0.01, "{b}");
}

#[test]
fn sampler_is_uniform_over_width_bounded_subsets() {
    let (n, k, f) = (9usize, 3usize, 5.0);
    let subsets: Vec<Vec<usize>> = common::combinations(n, k)
        .into_iter()
        .filter(|s| (s[k - 1] - s[0] + 1) as f64 <= f)
        .collect();
    let sampler = WidthBoundedSampler::new(n, k, f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draws = 200_000;
    let mut freq = std::collections::HashMap::new();
    for _ in 0..draws {
        *freq
            .entry(sampler.sample(&mut rng).indices().to_vec())
            .or_insert(0u32) += 1;
    }
    assert_eq!(freq.len(), subsets.len());
    let expect = draws as f64 / subsets.len() as f64;
    // chi-square against uniform, generous bound for 34 degrees of freedom
    let chi: f64 = subsets
        .iter()
        .map(|s| (freq[s] as f64 - expect).powi(2) / expect)
        .sum();
    assert!(chi < 80.0, "chi-square {chi}");
}

#[test]
fn monte_carlo_brackets_exact_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..10 {
        let host = common::random_perm(50, &mut rng);
        let pi: Permutation = ["132", "21", "2413", "123"][trial % 4].parse().unwrap();
        let f = 20.0;
        let exact = density_at_scale(&pi, &host, f).unwrap().value;
        let est =
            estimate_density_at_scale(&pi, &host, f, 20_000, 0.999, SeedStream::new(trial as u64))
                .unwrap();
        assert!(est.covers(exact), "{pi} {exact} {est:?}");
    }
}

#[test]
fn estimator_is_deterministic_per_seed() {
    let host = Permutation::identity(500).box_product(&"21".parse().unwrap());
    let a = estimate_histogram_at_scale(&host, 3, 40.0, 30_000, 0.99, SeedStream::new(1)).unwrap();
    let b = estimate_histogram_at_scale(&host, 3, 40.0, 30_000, 0.99, SeedStream::new(1)).unwrap();
    let c = estimate_histogram_at_scale(&host, 3, 40.0, 30_000, 0.99, SeedStream::new(2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.counts, c.counts);
}

#[test]
fn error_kinds() {
    let host: Permutation = "35142".parse().unwrap();
    assert!(matches!(
        count_occurrences(&"123456".parse().unwrap(), &host),
        Err(Error::PatternTooLong { .. })
    ));
    assert!(matches!(
        density_at_scale(&"132".parse().unwrap(), &host, 2.0),
        Err(Error::ScaleTooSmall { .. })
    ));
    assert!(density_at_scale(&"132".parse().unwrap(), &host, 6.0).is_err());
    assert!(estimate_density_at_scale(
        &"12".parse().unwrap(),
        &host,
        3.0,
        0,
        0.9,
        SeedStream::new(0)
    )
    .is_err());
    assert!(estimate_density_at_scale(
        &"12".parse().unwrap(),
        &host,
        3.0,
        10,
        1.0,
        SeedStream::new(0)
    )
    .is_err());
}
