//! Per-dimension coefficients of the aggregate and the weights implied by a
//! symmetric dependence structure.
//!
//! Expanding the weighted score total gives
//! `Σ_j w_j D_ij = Σ_j A_j r_ij` with
//! `A_j = w_j + (1/(d-1)) Σ_{j'≠j} M[j'][j] w_j'` (column `j` of `M`).

use serde::Serialize;

use crate::aggregation::{exact_sum, matrix_digest, FgtResult};
use crate::bounds::{score_ceiling, upper_bound, weighted_upper_bound};
use crate::deprivation::{check_shapes, deprivation_counts, gap_matrix, DeprivationMatrix};
use crate::error::{Error, Result};
use crate::identification::identify;
use crate::model::{
    check_index, validate_weights, AchievementMatrix, DependenceStructure, MethodologyConfig,
    WeightVector, VALIDATION_TOL,
};

/// A_j for every dimension, in order.
pub fn coefficients(m: &DependenceStructure, w: &WeightVector) -> Vec<f64> {
    let d = m.d();
    let ws = w.as_slice();
    let dm1 = (d - 1) as f64;
    (0..d)
        .map(|j| {
            let mut spill = 0.0;
            for (jp, &wjp) in ws.iter().enumerate() {
                if jp != j {
                    spill += m.entry(jp, j) * wjp;
                }
            }
            ws[j] + spill / dm1
        })
        .collect()
}

/// A_j for a 1-based dimension `j`.
pub fn coefficient_a(m: &DependenceStructure, w: &WeightVector, j: usize) -> Result<f64> {
    let c = check_index(j, m.d())?;
    Ok(coefficients(m, w)[c])
}

/// The aggregate rewritten as (1 / (N·ceiling)) Σ_{i,j} A_j r_ij^α ρ_k(y_i).
///
/// Same value as [`crate::aggregation::fgt_network_adjusted`] up to rounding;
/// it reaches it through the gaps instead of the scores.
pub fn fgt_via_coefficients(
    y: &AchievementMatrix,
    config: &MethodologyConfig,
) -> Result<FgtResult> {
    let (z, m, w) = (config.cutoffs(), config.structure(), config.weights());
    check_shapes(y, z, m)?;
    let ceiling = score_ceiling(m, w);
    let counts = deprivation_counts(y, z, m, w)?;
    let statuses = identify(&counts, config.k(), ceiling)?;
    let gaps = gap_matrix(y, z, config.alpha())?;
    let a = coefficients(m, w);
    let rows: Vec<Vec<f64>> = gaps
        .rows()
        .zip(statuses.as_slice())
        .map(|(row, &poor)| {
            if poor {
                row.iter().zip(&a).map(|(r, aj)| aj * r).collect()
            } else {
                vec![0.0; row.len()]
            }
        })
        .collect();
    let terms = DeprivationMatrix::from_rows(config.alpha(), true, rows);
    let numerator = exact_sum(terms.row_totals());
    let denominator = y.n() as f64 * ceiling;
    Ok(FgtResult {
        value: numerator / denominator,
        alpha: config.alpha(),
        k: config.k(),
        numerator,
        denominator,
        n: y.n(),
        poor: statuses.poor_count(),
        censored_matrix_hash: matrix_digest(&terms),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpliedWeights {
    #[serde(serialize_with = "ser_weights")]
    pub weights: WeightVector,
    pub deltas: Vec<f64>,
    pub sigma_cols: Vec<f64>,
    pub d_bar: f64,
}

fn ser_weights<S: serde::Serializer>(
    w: &WeightVector,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(w.as_slice())
}

/// w_j = d·δ_j / d̄ for a symmetric `M`.
pub fn implied_weights(m: &DependenceStructure) -> Result<ImpliedWeights> {
    if let Some((row, col)) = m.first_asymmetry() {
        return Err(Error::NotSymmetric {
            row,
            col,
            upper: m.entry(row - 1, col - 1),
            lower: m.entry(col - 1, row - 1),
        });
    }
    let d = m.d();
    let sigma_cols = m.column_sums();
    let dm1 = (d - 1) as f64;
    let deltas: Vec<f64> = sigma_cols.iter().map(|s| 1.0 + (s - 1.0) / dm1).collect();
    let d_bar = upper_bound(m);
    // Σ δ_j equals d̄; dividing by the computed sum keeps Σ w_j as close to d as rounding allows.
    let total: f64 = deltas.iter().sum();
    let raw: Vec<f64> = deltas
        .iter()
        .map(|delta| d as f64 * delta / total)
        .collect();
    let weights = validate_weights(&raw, d)?;
    Ok(ImpliedWeights {
        weights,
        deltas,
        sigma_cols,
        d_bar,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricConsistency {
    pub sum_a: f64,
    pub d_tilde: f64,
    pub equal: bool,
}

/// Σ_j A_j against d̃. Always equal for symmetric `M`.
pub fn check_symmetric_consistency(
    m: &DependenceStructure,
    w: &WeightVector,
) -> SymmetricConsistency {
    let sum_a: f64 = coefficients(m, w).iter().sum();
    let d_tilde = weighted_upper_bound(m, w);
    let equal = (sum_a - d_tilde).abs() <= VALIDATION_TOL * d_tilde.abs().max(1.0);
    SymmetricConsistency {
        sum_a,
        d_tilde,
        equal,
    }
}
