//! Statistics checked against brute-force implementations and `statrs`.

mod common;

use std::collections::BTreeMap;

use common::stats_oracle::{brute_kw, brute_mw, brute_pearson, brute_ranks, close, sample, TOL};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use trackscope::stats::{
    chi2_sf, kruskal_wallis, mann_whitney_z, pearson_r, rank_with_ties, spearman_rho, summary_ci, two_proportion_z,
};

#[test]
fn published_micro_examples() {
    let groups = BTreeMap::from([
        ("a".to_string(), vec![1.0, 2.0, 3.0]),
        ("b".to_string(), vec![4.0, 5.0, 6.0]),
        ("c".to_string(), vec![7.0, 8.0, 9.0]),
    ]);
    assert!((kruskal_wallis(&groups).unwrap().h - 7.2).abs() < 1e-9);
    for x in [0.0, 1.0, 2.0, 5.0] {
        assert!((chi2_sf(x, 2).unwrap() - (-x / 2.0).exp()).abs() < 1e-10);
    }
    assert!(chi2_sf(43.863, 3).unwrap() < 0.0005);
    assert!((chi2_sf(1.3862943611, 2).unwrap() - 0.5).abs() < 1e-10);
    assert_eq!(chi2_sf(0.0, 3).unwrap(), 1.0);

    let r = mann_whitney_z(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
    assert!((r.z.abs() - 4.5 / (63.0f64 / 12.0).sqrt()).abs() < 1e-12);
    assert!((r.z.abs() - 1.964).abs() < 1e-3);
    let same = mann_whitney_z(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!((same.z, same.p), (0.0, 1.0));

    let r = two_proportion_z(20, 100, 10, 100).unwrap();
    assert!((r.z - 0.1 / (0.15f64 * 0.85 * 0.02).sqrt()).abs() < 1e-12);
    assert!((r.z - 1.980).abs() < 1e-3);
    let eq = two_proportion_z(10, 100, 10, 100).unwrap();
    assert_eq!(eq.z, 0.0);
    assert!((eq.ci_low + eq.ci_high).abs() < 1e-15);

    let s = summary_ci(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(s.mean, 2.5);
    assert!((s.sd - 1.2910).abs() < 1e-4);
    assert!((s.se_mean - 0.6455).abs() < 1e-4);
    let z = summary_ci(&[0.0; 4]).unwrap();
    assert_eq!((z.mean, z.sd, z.ci_low, z.ci_high), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn chi2_matches_statrs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let df = rng.random_range(1..30u32);
        let x = rng.random_range(0.0..80.0);
        let want = ChiSquared::new(df as f64).unwrap().sf(x);
        let got = chi2_sf(x, df).unwrap();
        assert!((got - want).abs() < 1e-9, "x={x} df={df}: {got} vs {want}");
    }
}

#[test]
fn ranks_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..25 {
        let len = rng.random_range(1..30);
        let v = sample(&mut rng, len);
        assert_eq!(rank_with_ties(&v).unwrap(), brute_ranks(&v));
    }
}

#[test]
fn kruskal_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    while checked < 25 {
        let k = rng.random_range(2..6);
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let len = rng.random_range(1..9);
                sample(&mut rng, len)
            })
            .collect();
        let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
        if pooled.iter().all(|x| *x == pooled[0]) {
            continue;
        }
        let map: BTreeMap<String, Vec<f64>> =
            groups.iter().enumerate().map(|(i, g)| (format!("g{i}"), g.clone())).collect();
        let got = kruskal_wallis(&map).unwrap();
        let (h, p, means) = brute_kw(&groups);
        assert!(close(got.h, h, TOL), "{} vs {h}", got.h);
        assert!(close(got.p, p, TOL), "{} vs {p}", got.p);
        for (i, m) in means.iter().enumerate() {
            assert!(close(got.mean_ranks[&format!("g{i}")], *m, TOL));
        }
        assert_eq!(got.df as usize, k - 1);
        checked += 1;
    }
}

#[test]
fn mann_whitney_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 25 {
        let (la, lb) = (rng.random_range(1..12), rng.random_range(1..12));
        let (a, b) = (sample(&mut rng, la), sample(&mut rng, lb));
        if a.iter().chain(&b).all(|x| *x == a[0]) {
            continue;
        }
        let got = mann_whitney_z(&a, &b).unwrap();
        let (z, p) = brute_mw(&a, &b);
        assert!(close(got.z, z, TOL), "{} vs {z}", got.z);
        assert!(close(got.p, p, TOL), "{} vs {p}", got.p);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(close(got.estimate, mean(&a) - mean(&b), TOL));
        checked += 1;
    }
}

#[test]
fn two_proportion_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..25 {
        let (na, nb) = (rng.random_range(1..500u64), rng.random_range(1..500u64));
        let (ha, hb) = (rng.random_range(0..=na), rng.random_range(0..=nb));
        let (pa, pb) = (ha as f64 / na as f64, hb as f64 / nb as f64);
        let pooled = (ha + hb) as f64 / (na + nb) as f64;
        let got = two_proportion_z(ha, na, hb, nb).unwrap();
        let se_pooled = (pooled * (1.0 - pooled) * (1.0 / na as f64 + 1.0 / nb as f64)).sqrt();
        if se_pooled == 0.0 {
            assert!(got.degenerate);
            continue;
        }
        let z = (pa - pb) / se_pooled;
        let se = (pa * (1.0 - pa) / na as f64 + pb * (1.0 - pb) / nb as f64).sqrt();
        assert!(close(got.z, z, TOL));
        assert!(close(got.p, 2.0 * Normal::new(0.0, 1.0).unwrap().sf(z.abs()), TOL));
        assert!(close(got.ci_low, pa - pb - 1.96 * se, TOL));
        assert!(close(got.ci_high, pa - pb + 1.96 * se, TOL));
    }
    assert!(two_proportion_z(0, 0, 1, 2).is_err());
}

#[test]
fn correlations_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 25 {
        let len = rng.random_range(3..20);
        let (x, y) = (sample(&mut rng, len), sample(&mut rng, len));
        if x.iter().all(|v| *v == x[0]) || y.iter().all(|v| *v == y[0]) {
            continue;
        }
        assert!(close(pearson_r(&x, &y).unwrap().r, brute_pearson(&x, &y), TOL));
        let rho = brute_pearson(&brute_ranks(&x), &brute_ranks(&y));
        assert!(close(spearman_rho(&x, &y).unwrap().r, rho, TOL));
        checked += 1;
    }
    let x = [1.0, 2.0, 3.0, 4.0];
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
    assert!((pearson_r(&x, &y).unwrap().r - 1.0).abs() < 1e-12);
    assert!((pearson_r(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap().r + 1.0).abs() < 1e-12);
    assert!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
}

#[test]
fn summary_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..25 {
        let len = rng.random_range(2..40);
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..1.0)).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let s = summary_ci(&v).unwrap();
        assert!(close(s.mean, mean, TOL) && close(s.sd, sd, TOL));
        assert!(close(s.ci_high - s.ci_low, 2.0 * 1.96 * sd / n.sqrt(), TOL));
    }
}

fn groups_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0u8..20, 1..10), 2..5)
        .prop_map(|gs| gs.into_iter().map(|g| g.into_iter().map(f64::from).collect()).collect())
}

fn as_map(groups: &[Vec<f64>]) -> BTreeMap<String, Vec<f64>> {
    groups.iter().enumerate().map(|(i, g)| (format!("g{i}"), g.clone())).collect()
}

proptest! {
    #[test]
    fn kruskal_invariant_under_monotone_transform(groups in groups_strategy()) {
        let base = kruskal_wallis(&as_map(&groups)).unwrap();
        let moved: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|x| 3.0 * x.powi(3) + 7.0).collect()).collect();
        let other = kruskal_wallis(&as_map(&moved)).unwrap();
        prop_assert!((base.h - other.h).abs() < 1e-9);
        prop_assert_eq!(base.mean_ranks, other.mean_ranks);
    }

    #[test]
    fn kruskal_invariant_under_permutation(groups in groups_strategy(), rotate in 0usize..10) {
        let base = kruskal_wallis(&as_map(&groups)).unwrap();
        let permuted: Vec<Vec<f64>> = groups.iter().map(|g| {
            let mut g = g.clone();
            let len = g.len();
            g.rotate_left(rotate % len);
            g
        }).collect();
        let other = kruskal_wallis(&as_map(&permuted)).unwrap();
        prop_assert!((base.h - other.h).abs() < 1e-9);
        prop_assert!((base.p - other.p).abs() < 1e-12);
    }

    #[test]
    fn kruskal_p_in_unit_interval(groups in groups_strategy()) {
        let r = kruskal_wallis(&as_map(&groups)).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p));
        prop_assert!(r.h >= -1e-12);
    }

    #[test]
    fn two_group_kruskal_equals_z_squared(
        values in prop::collection::hash_set(0u32..10_000, 2..40),
        split in 1usize..39,
    ) {
        let v: Vec<f64> = values.into_iter().map(f64::from).collect();
        let cut = split.min(v.len() - 1);
        let (a, b) = v.split_at(cut);
        let kw = kruskal_wallis(&BTreeMap::from([("a".to_string(), a.to_vec()), ("b".to_string(), b.to_vec())])).unwrap();
        let mw = mann_whitney_z(a, b).unwrap();
        prop_assert!((kw.h - mw.z * mw.z).abs() < 1e-9, "H={} Z²={}", kw.h, mw.z * mw.z);
    }

    #[test]
    fn mann_whitney_antisymmetric(a in prop::collection::vec(0u8..10, 1..15), b in prop::collection::vec(0u8..10, 1..15)) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let ab = mann_whitney_z(&a, &b).unwrap();
        let ba = mann_whitney_z(&b, &a).unwrap();
        prop_assert!((ab.z + ba.z).abs() < 1e-12);
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
    }
}
