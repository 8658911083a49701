mod common;

use permlab::pattern;
use permlab::permuton::{GridPermuton, GridVector, Tier, TierKind, TieredPermuton};
use permlab::{Permutation, Permuton, SeedStream};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind() -> impl Strategy<Value = TierKind> {
    prop_oneof![
        Just(TierKind::Uniform),
        Just(TierKind::Increasing),
        Just(TierKind::Decreasing)
    ]
}

fn tiered() -> impl Strategy<Value = TieredPermuton> {
    prop::collection::vec((1u32..10, kind()), 1..5).prop_map(|parts| {
        let total: u32 = parts.iter().map(|p| p.0).sum();
        let mut tiers: Vec<Tier> = parts
            .iter()
            .map(|&(w, k)| Tier::new(w as f64 / total as f64, k))
            .collect();
        let rest: f64 = tiers[1..].iter().map(|t| t.height).sum();
        tiers[0].height = 1.0 - rest;
        TieredPermuton::new(tiers).unwrap()
    })
}

fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max((x - (i + 1) as f64 / n).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn marginals_are_uniform() {
    let perms = [
        Permuton::V,
        Permuton::Tiered(GridVector::new(vec![1, -1, -1, 1]).unwrap().tiered()),
        Permuton::Tiered(
            TieredPermuton::new(vec![
                Tier::new(0.3, TierKind::Uniform),
                Tier::new(0.7, TierKind::Decreasing),
            ])
            .unwrap(),
        ),
        Permuton::Grid(
            GridPermuton::new(vec![
                vec![1.0 / 6.0, 1.0 / 6.0, 0.0],
                vec![0.0, 1.0 / 6.0, 1.0 / 6.0],
                vec![1.0 / 6.0, 0.0, 1.0 / 6.0],
            ])
            .unwrap(),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for p in &perms {
        let pts: Vec<(f64, f64)> = (0..20_000).map(|_| p.sample_point(&mut rng)).collect();
        let kx = ks_uniform(pts.iter().map(|q| q.0).collect());
        let ky = ks_uniform(pts.iter().map(|q| q.1).collect());
        // 1% critical value for n = 20000 is about 0.0115
        assert!(kx < 0.0115 && ky < 0.0115, "{p:?}: {kx} {ky}");
    }
}

#[test]
fn grid_permuton_boxes_and_sampling() {
    let d = 4;
    let mut cells = vec![vec![0.0; d]; d];
    for i in 0..d {
        cells[i][(i + 1) % d] = 0.125;
        cells[i][(i + 2) % d] = 0.125;
    }
    let g = GridPermuton::new(cells).unwrap();
    let perm = Permuton::Grid(g);
    assert!((perm.measure_box(0.25, 0.25)).abs() < 1e-15);
    assert!((perm.measure_box(0.25, 0.75) - 0.25).abs() < 1e-15);
    assert!((perm.measure_box(0.5, 0.5) - 0.125).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 40_000;
    let inside = (0..n).filter(|_| {
        let (x, y) = perm.sample_point(&mut rng);
        x <= 0.5 && y <= 0.5
    });
    let frac = inside.count() as f64 / n as f64;
    assert!((frac - 0.125).abs() < 0.01, "{frac}");
}

#[test]
fn fig_right_permuton_321_density() {
    let gamma = GridVector::new(vec![1, 1, -1]).unwrap().tiered();
    let exact = common::tiered_density(gamma.tiers(), &"321".parse().unwrap());
    assert!((exact - 4.0 / 27.0).abs() < 1e-15);
    let est = Permuton::Tiered(gamma)
        .estimate_pattern_density(&"321".parse().unwrap(), 200_000, 0.999, SeedStream::new(1))
        .unwrap();
    assert!(est.covers(exact), "{est:?}");
}

#[test]
fn alpha_is_injective_up_to_length_ten() {
    let mut seen = std::collections::HashSet::new();
    for d in 1..=10usize {
        for mask in 0u32..(1 << d) {
            let v: Vec<i8> = (0..d)
                .map(|i| if mask & (1 << i) != 0 { 1 } else { -1 })
                .collect();
            let a = GridVector::new(v).unwrap().alpha();
            assert!(a > 0.0 && a < 1.0);
            assert!(seen.insert(a.to_bits()), "collision at d = {d}");
        }
    }
    assert_eq!(seen.len(), (1 << 11) - 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_matches_sampling(t in tiered(), r in 0usize..6) {
        let pi = pattern::unrank(3, r).unwrap();
        let exact = common::tiered_density(t.tiers(), &pi);
        let est = Permuton::Tiered(t).estimate_pattern_density(&pi, 40_000, 0.9999, SeedStream::new(r as u64)).unwrap();
        prop_assert!(est.covers(exact), "{} {:?}", exact, est);
    }

    #[test]
    fn oracle_sums_to_one(t in tiered(), k in 1usize..5) {
        let total: f64 = pattern::all_of_length(k).unwrap().iter().map(|p| common::tiered_density(t.tiers(), p)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strip_restriction_keeps_tiers(t in tiered(), a in 0.0f64..0.9, w in 0.05f64..1.0) {
        let b = (a + w).min(1.0);
        let s = t.restrict_strip(a, b).unwrap();
        prop_assert!(s.approx_eq(&t, 1e-12));
        for i in 0..=10 {
            for j in 0..=10 {
                let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                prop_assert!((t.strip_measure(a, b, x, y).unwrap() - s.measure_box(x, y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampled_permutations_are_valid(t in tiered(), k in 1usize..60, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Permuton::Tiered(t).sample_permutation(k, &mut rng).unwrap();
        prop_assert_eq!(Permutation::from_values(p.values().to_vec()).unwrap().len(), k);
    }
}
