//! Random instances and reference implementations shared by the integration tests.
#![allow(dead_code)]

use netpov::model::validate_weights;
use netpov::{
    AchievementMatrix, CutoffVector, DependenceStructure, MethodologyConfig, WeightVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[allow(clippy::needless_range_loop)]
pub fn matrix_rows(rng: &mut ChaCha8Rng, d: usize, symmetric: bool) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; d]; d];
    for r in 0..d {
        m[r][r] = 1.0;
        for c in 0..d {
            if r == c || (symmetric && c < r) {
                continue;
            }
            let v = match rng.gen_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen::<f64>(),
            };
            m[r][c] = v;
            if symmetric {
                m[c][r] = v;
            }
        }
    }
    m
}

pub fn structure(rng: &mut ChaCha8Rng, d: usize, symmetric: bool) -> DependenceStructure {
    DependenceStructure::new(&matrix_rows(rng, d, symmetric)).unwrap()
}

pub fn weights(rng: &mut ChaCha8Rng, d: usize) -> WeightVector {
    let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    validate_weights(&raw.iter().map(|v| v * d as f64 / s).collect::<Vec<_>>(), d).unwrap()
}

pub fn cutoffs(rng: &mut ChaCha8Rng, d: usize) -> CutoffVector {
    CutoffVector::new((0..d).map(|_| rng.gen_range(0.5..20.0)).collect()).unwrap()
}

/// Achievements in `[0, 2z]`, with some cells exactly at the cutoff or at zero.
pub fn population(rng: &mut ChaCha8Rng, n: usize, z: &CutoffVector) -> AchievementMatrix {
    let rows = (0..n)
        .map(|_| {
            z.as_slice()
                .iter()
                .map(|&zj| match rng.gen_range(0..10) {
                    0 => zj,
                    1 => 0.0,
                    _ => rng.gen_range(0.0..2.0 * zj),
                })
                .collect()
        })
        .collect();
    AchievementMatrix::new(rows).unwrap()
}

pub fn alpha(rng: &mut ChaCha8Rng) -> f64 {
    [0.0, 0.5, 1.0, 2.0, 3.0][rng.gen_range(0..5)]
}

/// A random complete configuration with `k` drawn over the valid range.
pub fn config(
    rng: &mut ChaCha8Rng,
    d: usize,
    symmetric: bool,
    uniform: bool,
    alpha: f64,
) -> MethodologyConfig {
    let m = structure(rng, d, symmetric);
    let w = if uniform {
        WeightVector::uniform(d)
    } else {
        weights(rng, d)
    };
    let z = cutoffs(rng, d);
    MethodologyConfig::with_k_fraction(alpha, rng.gen_range(0.01..=1.0), m, w, z).unwrap()
}

pub fn gap(y: f64, z: f64, alpha: f64) -> f64 {
    if y >= z {
        0.0
    } else if alpha == 0.0 {
        1.0
    } else {
        ((z - y) / z).powf(alpha)
    }
}

/// Score via the averaged-pairs form: (1/(d-1)) Σ_{j'≠j} (M_jj r_j + M_jj' r_j').
pub fn score_pairwise(r: &[f64], m: &[Vec<f64>], j: usize) -> f64 {
    let d = r.len();
    let mut s = 0.0;
    for jp in 0..d {
        if jp != j {
            s += m[j][j] * r[j] + m[j][jp] * r[jp];
        }
    }
    s / (d - 1) as f64
}

/// Classic adjusted FGT with counting identification and uniform weights.
pub fn classic_adjusted_fgt(y: &AchievementMatrix, z: &[f64], alpha: f64, k: f64) -> f64 {
    let d = y.d();
    let mut total = 0.0;
    for i in 0..y.n() {
        let row = y.row(i);
        let count = row.iter().zip(z).filter(|(a, b)| a < b).count() as f64;
        if count >= k {
            total += row
                .iter()
                .zip(z)
                .map(|(&a, &b)| gap(a, b, alpha))
                .sum::<f64>();
        }
    }
    total / (y.n() * d) as f64
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
