//! Shared test oracles, independent of the library's implementation paths.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Paired t-test fixtures with p-values frozen from a 50-digit incomplete
/// beta evaluation (integer-valued samples, n <= 12).
pub const T_TEST_FIXTURES: &[(&[f64], f64, f64, f64)] = &[
    (&[0.1, 0.2, 0.3, 0.2], 4.8989794855663562, 3.0, 0.016276603459428555),
    (
        &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, -2.0],
        3.9981984415606465,
        9.0,
        0.0031188944953802679,
    ),
    (
        &[3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, 6.0],
        1.5716824514672945,
        7.0,
        0.16001924470682475,
    ),
    (
        &[1.0, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0, 55.0, 89.0, 144.0],
        2.4398195128466011,
        11.0,
        0.032833220880444199,
    ),
    (
        &[-3.0, 7.0, -1.0, 2.0, 0.0, 4.0, -2.0, 5.0, 1.0, -6.0, 3.0, 8.0],
        1.2469858948639029,
        11.0,
        0.23830070547041547,
    ),
    (
        &[2.0, -2.0, 3.0, -3.0, 4.0, -4.0, 5.0],
        0.51940752079833278,
        6.0,
        0.62207265198678389,
    ),
    (&[10.0, 11.0, 9.0, 12.0, 10.0, 11.0], 24.522716741087974, 5.0, 2.1025883659751737e-6),
];

/// Two-sided analytic power of the paired t-test at alpha = 0.05 for normal
/// deltas with effect size d, frozen from a noncentral-t reference.
pub const ANALYTIC_POWER: &[(f64, usize, f64)] = &[
    (0.5, 5, 0.140517),
    (0.5, 10, 0.293176),
    (0.5, 20, 0.564504),
    (0.5, 30, 0.753965),
    (1.0, 5, 0.401390),
    (1.0, 10, 0.803097),
    (1.0, 20, 0.988591),
    (1.0, 30, 0.999564),
    (0.7, 15, 0.712902),
    (0.7, 20, 0.843506),
];

/// Average ranks of |values| (1-based), reimplemented for oracle use.
fn oracle_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].abs().partial_cmp(&values[b].abs()).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]].abs() == values[idx[i]].abs() {
            j += 1;
        }
        let avg = ((i + 1) + (j + 1)) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Exact Wilcoxon signed-rank statistic and two-sided p by brute-force
/// enumeration of all 2^n sign assignments (n <= ~16).
pub fn wilcoxon_enumeration_oracle(deltas: &[f64]) -> Option<(f64, f64)> {
    let nonzero: Vec<f64> = deltas.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 || n > 16 {
        return None;
    }
    let ranks = oracle_ranks(&nonzero);
    let w_obs: f64 =
        nonzero.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| *r).sum();
    let mut le = 0u64;
    let mut ge = 0u64;
    for mask in 0u32..(1u32 << n) {
        let w: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        if w <= w_obs + 1e-9 {
            le += 1;
        }
        if w >= w_obs - 1e-9 {
            ge += 1;
        }
    }
    let denom = (1u64 << n) as f64;
    let p = (2.0 * (le.min(ge) as f64) / denom).min(1.0);
    Some((w_obs, p))
}

/// Direct pair-counting Cliff's delta oracle.
pub fn cliffs_delta_oracle(deltas: &[f64]) -> f64 {
    let mut score = 0i64;
    for &d in deltas {
        if d > 0.0 {
            score += 1;
        } else if d < 0.0 {
            score -= 1;
        }
    }
    score as f64 / deltas.len() as f64
}

/// Draws `n` values from Normal(mean, 1) deterministically.
pub fn normal_sample(mean: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mean + z
        })
        .collect()
}

/// Uniform p-value list in [0, 1].
pub fn random_p_values(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0.0..=1.0)).collect()
}
