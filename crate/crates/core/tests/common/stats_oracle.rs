//! Brute-force statistics used as oracles.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

pub const TOL: f64 = 1e-9;

pub fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let below = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn tie_sum(v: &[f64]) -> f64 {
    let mut seen: Vec<f64> = Vec::new();
    let mut total = 0.0;
    for x in v {
        if seen.contains(x) {
            continue;
        }
        seen.push(*x);
        let t = v.iter().filter(|y| *y == x).count() as f64;
        total += t * t * t - t;
    }
    total
}

pub fn brute_kw(groups: &[Vec<f64>]) -> (f64, f64, Vec<f64>) {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let ranks = brute_ranks(&pooled);
    let n = pooled.len() as f64;
    let mut offset = 0;
    let mut sum = 0.0;
    let mut means = Vec::new();
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        means.push(r / g.len() as f64);
        offset += g.len();
    }
    let h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / (1.0 - tie_sum(&pooled) / (n * n * n - n));
    let p = ChiSquared::new((groups.len() - 1) as f64).unwrap().sf(h);
    (h, p, means)
}

pub fn brute_mw(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut u = 0.0;
    for x in a {
        for y in b {
            u += if x > y {
                1.0
            } else if x == y {
                0.5
            } else {
                0.0
            };
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let var = na * nb / 12.0 * ((n + 1.0) - tie_sum(&pooled) / (n * (n - 1.0)));
    let z = (u - na * nb / 2.0) / var.sqrt();
    let p = 2.0 * Normal::new(0.0, 1.0).unwrap().sf(z.abs());
    (z, p)
}

pub fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Small integer-valued samples so ties are common.
pub fn sample(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(0..12) as f64).collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}
