//! Range of the deprivation count D_i under a dependence structure.
//!
//! `d_bar` and `d_under` are the unweighted maximum and minimum nonzero count.
//! `d_tilde` is the closed-form weighted bound built from column sums. The
//! [`score_ceiling`] is the exact maximum of the weighted count (a fully
//! deprived person); it coincides with `d_tilde` whenever `M` is symmetric or
//! the weights are uniform, and it is the value used to normalize aggregates.

use serde::Serialize;

use crate::deprivation::weighted_row_total;
use crate::error::{Error, Result};
use crate::model::{check_index, DependenceStructure, WeightVector};
use crate::weights::coefficients;

/// Largest `d` accepted by [`attainable_scores`].
pub const MAX_ENUMERATION_D: usize = 20;

/// d̄ = d + (Σ − d)/(d − 1).
pub fn upper_bound(m: &DependenceStructure) -> f64 {
    let d = m.d() as f64;
    d + (m.total() - d) / (d - 1.0)
}

/// d̲ = 1 + (min_j Σ_j − 1)/(d − 1).
pub fn lower_bound(m: &DependenceStructure) -> f64 {
    let min_col = m.column_sums().into_iter().fold(f64::INFINITY, f64::min);
    1.0 + (min_col - 1.0) / (m.d() - 1) as f64
}

/// δ_j = 1 + (Σ_j − 1)/(d − 1), the rise in an unweighted D_i when `j` (1-based) becomes deprived.
pub fn dimension_jump(m: &DependenceStructure, j: usize) -> Result<f64> {
    let c = check_index(j, m.d())?;
    Ok(jumps(m)[c])
}

fn jumps(m: &DependenceStructure) -> Vec<f64> {
    let dm1 = (m.d() - 1) as f64;
    m.column_sums()
        .into_iter()
        .map(|s| 1.0 + (s - 1.0) / dm1)
        .collect()
}

/// d̃ = d + (Σ_j w_j Σ_j − d)/(d − 1).
pub fn weighted_upper_bound(m: &DependenceStructure, w: &WeightVector) -> f64 {
    let d = m.d() as f64;
    let ws: f64 = w
        .as_slice()
        .iter()
        .zip(m.column_sums())
        .map(|(wj, s)| wj * s)
        .sum();
    d + (ws - d) / (d - 1.0)
}

/// Exact maximum of Σ_j w_j D_ij^0, reached by a person deprived in every dimension.
///
/// Computed through the same per-row path as the deprivation counts, so a fully
/// deprived person's count equals this value bit for bit.
pub fn score_ceiling(m: &DependenceStructure, w: &WeightVector) -> f64 {
    weighted_row_total(&vec![1.0; m.d()], m, w.as_slice())
}

/// Every value D_i can take, one entry per deprivation pattern, sorted ascending.
///
/// Entry for pattern `S` is Σ_{j∈S} A_j, the coefficient of dimension `j` in
/// the weighted count; with uniform weights A_j = δ_j.
pub fn attainable_scores(m: &DependenceStructure, w: &WeightVector) -> Result<Vec<f64>> {
    let d = m.d();
    if d > MAX_ENUMERATION_D {
        return Err(Error::DimensionTooLargeForEnumeration {
            d,
            max: MAX_ENUMERATION_D,
        });
    }
    let jump = coefficients(m, w);
    let mut out = Vec::with_capacity(1 << d);
    for mask in 0u32..(1u32 << d) {
        let mut s = 0.0;
        for (j, a) in jump.iter().enumerate() {
            if mask & (1 << j) != 0 {
                s += a;
            }
        }
        out.push(s);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Smallest nonzero attainable D_i. With uniform weights this is d̲.
pub fn min_nonzero_score(m: &DependenceStructure, w: &WeightVector) -> f64 {
    coefficients(m, w).into_iter().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSummary {
    pub d: usize,
    pub d_bar: f64,
    pub d_under: f64,
    pub d_tilde: f64,
    pub score_ceiling: f64,
    /// Minimum nonzero weighted count; not a closed-form bound.
    pub weighted_floor: f64,
    pub deltas: Vec<f64>,
    pub sigma: f64,
    pub sigma_cols: Vec<f64>,
}

pub fn summarize(m: &DependenceStructure, w: &WeightVector) -> BoundsSummary {
    BoundsSummary {
        d: m.d(),
        d_bar: upper_bound(m),
        d_under: lower_bound(m),
        d_tilde: weighted_upper_bound(m, w),
        score_ceiling: score_ceiling(m, w),
        weighted_floor: min_nonzero_score(m, w),
        deltas: jumps(m),
        sigma: m.total(),
        sigma_cols: m.column_sums(),
    }
}

/// The adjacent attainable scores around `k` when `k` sits strictly between
/// them, meaning any `k` in that open interval identifies the same persons.
pub fn bracketing_scores(scores: &[f64], k: f64) -> Option<(f64, f64)> {
    let upper = scores.partition_point(|&s| s < k);
    if upper == 0 || upper == scores.len() || scores[upper] == k {
        return None;
    }
    Some((scores[upper - 1], scores[upper]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_weights;

    fn sample() -> DependenceStructure {
        DependenceStructure::new(&[
            vec![1.0, 0.5, 0.0],
            vec![0.2, 1.0, 0.4],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn upper() {
        assert_eq!(upper_bound(&DependenceStructure::identity(3).unwrap()), 3.0);
        assert_eq!(upper_bound(&DependenceStructure::all_ones(3).unwrap()), 6.0);
        assert!(close(upper_bound(&sample()), 3.55));
    }

    #[test]
    fn lower() {
        assert_eq!(lower_bound(&DependenceStructure::identity(3).unwrap()), 1.0);
        assert!(close(lower_bound(&sample()), 1.1));
        assert_eq!(lower_bound(&DependenceStructure::all_ones(3).unwrap()), 2.0);
    }

    #[test]
    fn jumps_per_dimension() {
        let id = DependenceStructure::identity(4).unwrap();
        for j in 1..=4 {
            assert_eq!(dimension_jump(&id, j).unwrap(), 1.0);
        }
        let m = DependenceStructure::new(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(dimension_jump(&m, 1).unwrap(), 1.0);
        assert_eq!(dimension_jump(&m, 2).unwrap(), 1.5);
        assert!(close(dimension_jump(&sample(), 2).unwrap(), 1.25));
        assert!(dimension_jump(&m, 3).is_err());
    }

    #[test]
    fn weighted_bound() {
        let m = sample();
        assert_eq!(
            weighted_upper_bound(&m, &WeightVector::uniform(3)),
            upper_bound(&m)
        );
        let w = validate_weights(&[1.5, 1.0, 0.5], 3).unwrap();
        assert!(close(weighted_upper_bound(&m, &w), 3.5));
        let id = DependenceStructure::identity(3).unwrap();
        assert_eq!(weighted_upper_bound(&id, &w), 3.0);
    }

    #[test]
    fn ceiling_matches_d_tilde_when_symmetric_or_uniform() {
        let m = sample();
        assert!(close(
            score_ceiling(&m, &WeightVector::uniform(3)),
            upper_bound(&m)
        ));
        let s = DependenceStructure::new(&[
            vec![1.0, 0.5, 0.5],
            vec![0.5, 1.0, 0.0],
            vec![0.5, 0.0, 1.0],
        ])
        .unwrap();
        let w = validate_weights(&[1.5, 1.0, 0.5], 3).unwrap();
        assert!(close(score_ceiling(&s, &w), weighted_upper_bound(&s, &w)));
        // Asymmetric with non-uniform weights: the row-sum ceiling differs from d̃.
        let a = DependenceStructure::new(&[vec![1.0, 0.8], vec![0.0, 1.0]]).unwrap();
        let w = validate_weights(&[1.5, 0.5], 2).unwrap();
        assert!(close(score_ceiling(&a, &w), 3.2));
        assert!(close(weighted_upper_bound(&a, &w), 2.4));
    }

    #[test]
    fn attainable() {
        let id = DependenceStructure::identity(3).unwrap();
        assert_eq!(
            attainable_scores(&id, &WeightVector::uniform(3)).unwrap(),
            vec![0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0]
        );
        let m = DependenceStructure::new(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            attainable_scores(&m, &WeightVector::uniform(2)).unwrap(),
            vec![0.0, 1.0, 1.5, 2.5]
        );
        let s = attainable_scores(&sample(), &WeightVector::uniform(3)).unwrap();
        assert!(close(*s.last().unwrap(), upper_bound(&sample())));
        assert!(close(s[1], lower_bound(&sample())));
    }

    #[test]
    fn enumeration_cap() {
        let big = DependenceStructure::identity(21).unwrap();
        assert!(matches!(
            attainable_scores(&big, &WeightVector::uniform(21)),
            Err(Error::DimensionTooLargeForEnumeration { d: 21, .. })
        ));
    }

    #[test]
    fn brackets() {
        let s = [0.0, 1.0, 1.5, 2.5];
        assert_eq!(bracketing_scores(&s, 1.2), Some((1.0, 1.5)));
        assert_eq!(bracketing_scores(&s, 1.5), None);
        assert_eq!(bracketing_scores(&s, 2.5), None);
    }

    #[test]
    fn distance_reading() {
        for d in 2..7 {
            let id = DependenceStructure::identity(d).unwrap();
            let ones = DependenceStructure::all_ones(d).unwrap();
            assert_eq!(upper_bound(&id) - d as f64, 0.0);
            assert_eq!(upper_bound(&ones) - d as f64, d as f64);
        }
    }
}
