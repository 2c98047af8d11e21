//! Network-adjusted FGT aggregation.
//!
//! The adjusted measure divides the censored score total by `N` times the
//! largest value a single person's weighted total can reach, so adding
//! connections to `M` cannot push it above one. The naive form divides by
//! `N·d` instead and is kept only as a diagnostic.
//!
//! Per-person totals are summed in dimension order; the population total is
//! the correctly rounded sum of those, which makes the value independent of
//! row order.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bounds::score_ceiling;
use crate::deprivation::{
    check_shapes, deprivation_counts, deprivation_matrix, DeprivationCounts, DeprivationMatrix,
};
use crate::error::{Error, Result};
use crate::identification::{identify, PovertyStatusVector};
use crate::model::{
    check_alpha, AchievementMatrix, CutoffVector, DependenceStructure, MethodologyConfig,
    WeightVector,
};

/// Tolerance for the decomposition recombination check.
pub const DECOMPOSITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FgtResult {
    pub value: f64,
    pub alpha: f64,
    pub k: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub n: usize,
    pub poor: usize,
    pub censored_matrix_hash: String,
}

/// Everything the aggregate is built from, kept for reporting and tests.
#[derive(Debug, Clone)]
pub struct CensoredScores {
    pub counts: DeprivationCounts,
    pub statuses: PovertyStatusVector,
    /// Weighted scores with the rows of non-poor persons zeroed.
    pub censored: DeprivationMatrix,
    pub row_totals: Vec<f64>,
    pub ceiling: f64,
}

/// Correctly rounded sum of `values` (Shewchuk's partials), independent of order.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }

    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Round half-even across the remaining partials.
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

fn censor(
    y: &AchievementMatrix,
    z: &CutoffVector,
    m: &DependenceStructure,
    w: &WeightVector,
    alpha: f64,
    k: f64,
) -> Result<CensoredScores> {
    check_shapes(y, z, m)?;
    check_alpha(alpha)?;
    let ceiling = score_ceiling(m, w);
    let counts = deprivation_counts(y, z, m, w)?;
    let statuses = identify(&counts, k, ceiling)?;
    let scores = deprivation_matrix(y, z, m, alpha, Some(w))?;
    let censored = zero_non_poor(scores, &statuses);
    let row_totals = censored.row_totals();
    Ok(CensoredScores {
        counts,
        statuses,
        censored,
        row_totals,
        ceiling,
    })
}

fn zero_non_poor(scores: DeprivationMatrix, statuses: &PovertyStatusVector) -> DeprivationMatrix {
    let rows: Vec<Vec<f64>> = scores
        .rows()
        .zip(statuses.as_slice())
        .map(|(row, &poor)| {
            if poor {
                row.to_vec()
            } else {
                vec![0.0; row.len()]
            }
        })
        .collect();
    DeprivationMatrix::from_rows(scores.alpha, scores.weighted, rows)
}

/// Censored weighted scores under `config`.
pub fn censored_scores(
    y: &AchievementMatrix,
    config: &MethodologyConfig,
) -> Result<CensoredScores> {
    censor(
        y,
        config.cutoffs(),
        config.structure(),
        config.weights(),
        config.alpha(),
        config.k(),
    )
}

pub(crate) fn matrix_digest(m: &DeprivationMatrix) -> String {
    let mut h = Sha256::new();
    h.update((m.n() as u64).to_le_bytes());
    h.update((m.d() as u64).to_le_bytes());
    for row in m.rows() {
        for v in row {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn finish(c: &CensoredScores, alpha: f64, k: f64, per_person_max: f64) -> FgtResult {
    let n = c.row_totals.len();
    let numerator = exact_sum(c.row_totals.iter().copied());
    let denominator = n as f64 * per_person_max;
    FgtResult {
        value: numerator / denominator,
        alpha,
        k,
        numerator,
        denominator,
        n,
        poor: c.statuses.poor_count(),
        censored_matrix_hash: matrix_digest(&c.censored),
    }
}

/// (1 / (N·ceiling)) Σ_{i,j} w_j D_ij^α ρ_k(y_i). Always in `[0, 1]`.
pub fn fgt_network_adjusted(
    y: &AchievementMatrix,
    config: &MethodologyConfig,
) -> Result<FgtResult> {
    let c = censored_scores(y, config)?;
    Ok(finish(&c, config.alpha(), config.k(), c.ceiling))
}

/// Diagnostic only: (1 / (N·d)) Σ_{i,j} D_ij^α ρ_k(y_i), unweighted.
///
/// Grows with every connection added to `M` and can exceed one.
pub fn fgt_naive(
    y: &AchievementMatrix,
    z: &CutoffVector,
    m: &DependenceStructure,
    alpha: f64,
    k: f64,
) -> Result<FgtResult> {
    let w = WeightVector::uniform(m.d());
    let c = censor(y, z, m, &w, alpha, k)?;
    Ok(finish(&c, alpha, k, m.d() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupResult {
    pub label: usize,
    pub n: usize,
    pub fgt: FgtResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub groups: Vec<GroupResult>,
    pub total: FgtResult,
    /// Σ_g (n_g / N) · FGT_g.
    pub recombined: f64,
    pub consistent: bool,
}

/// Split the population by `labels[i]` (one label per person) and check that
/// the population-share weighted group values recombine to the total.
pub fn decompose_by_group(
    y: &AchievementMatrix,
    labels: &[usize],
    config: &MethodologyConfig,
) -> Result<Decomposition> {
    if labels.len() != y.n() {
        return Err(Error::InvalidPartition(format!(
            "{} labels for {} persons",
            labels.len(),
            y.n()
        )));
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &g) in labels.iter().enumerate() {
        members.entry(g).or_default().push(i);
    }
    let total = fgt_network_adjusted(y, config)?;
    let n = y.n() as f64;
    let mut groups = Vec::with_capacity(members.len());
    for (label, persons) in members {
        let sub = y.select(&persons)?;
        let fgt = fgt_network_adjusted(&sub, config)?;
        groups.push(GroupResult {
            label,
            n: persons.len(),
            fgt,
        });
    }
    let recombined = exact_sum(groups.iter().map(|g| g.n as f64 / n * g.fgt.value));
    let consistent = (recombined - total.value).abs() <= DECOMPOSITION_TOL;
    Ok(Decomposition {
        groups,
        total,
        recombined,
        consistent,
    })
}
