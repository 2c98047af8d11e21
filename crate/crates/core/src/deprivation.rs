//! Normalized gaps and network-adjusted deprivation scores.
//!
//! A person's score in dimension `j` is their own gap plus the average of the
//! other gaps, each scaled by how strongly it feeds into `j`:
//!
//! ```text
//! D_ij = r_ij + (1 / (d - 1)) * Σ_{j' ≠ j} M[j][j'] * r_ij'
//! ```
//!
//! Weights multiply the finished score (`w_j * D_ij`); they never enter the
//! inner sum.

use crate::error::{Error, Result};
use crate::model::{
    check_alpha, check_index, AchievementMatrix, CutoffVector, DependenceStructure, WeightVector,
};

/// `((z - y) / z)^alpha` when `y < z`, else 0. With `alpha = 0` this is the
/// deprivation indicator `1[y < z]`; a person exactly at the cutoff scores 0.
pub fn normalized_gap(y: f64, z: f64, alpha: f64) -> Result<f64> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::NonPositiveCutoff { index: 1, value: z });
    }
    Ok(gap(y, z, alpha))
}

#[inline]
pub(crate) fn gap(y: f64, z: f64, alpha: f64) -> f64 {
    if y < z {
        if alpha == 0.0 {
            1.0
        } else {
            ((z - y) / z).powf(alpha)
        }
    } else {
        0.0
    }
}

/// Score of dimension `j0` (0-based) for one row of gaps.
#[inline]
pub(crate) fn score(gaps: &[f64], m: &DependenceStructure, j0: usize) -> f64 {
    let d = m.d();
    let row = m.row(j0);
    let mut spill = 0.0;
    for (jp, (&mjj, &r)) in row.iter().zip(gaps).enumerate() {
        if jp != j0 {
            spill += mjj * r;
        }
    }
    gaps[j0] + spill / (d - 1) as f64
}

/// Σ_j w_j · D_j for one row of gaps, summed in dimension order.
///
/// Shared by deprivation counts, the censored FGT numerator and the score
/// ceiling so identical rows give bit-identical totals on every path.
#[inline]
pub(crate) fn weighted_row_total(gaps: &[f64], m: &DependenceStructure, w: &[f64]) -> f64 {
    let mut total = 0.0;
    for (j0, &wj) in w.iter().enumerate() {
        total += wj * score(gaps, m, j0);
    }
    total
}

/// D_ij^α for one person's gap row and a 1-based dimension `j`.
pub fn deprivation_score(gaps: &[f64], m: &DependenceStructure, j: usize) -> Result<f64> {
    if gaps.len() != m.d() {
        return Err(Error::ShapeMismatch(format!(
            "{} gaps for a {}-dimensional structure",
            gaps.len(),
            m.d()
        )));
    }
    let j0 = check_index(j, m.d())?;
    Ok(score(gaps, m, j0))
}

/// N×d table of normalized gaps `r_ij^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapMatrix {
    pub alpha: f64,
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl GapMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.d)
    }
}

pub(crate) fn check_shapes(
    y: &AchievementMatrix,
    z: &CutoffVector,
    m: &DependenceStructure,
) -> Result<()> {
    if y.d() != z.len() || y.d() != m.d() {
        return Err(Error::ShapeMismatch(format!(
            "achievements have {} columns, {} cutoffs, M is {}×{}",
            y.d(),
            z.len(),
            m.d(),
            m.d()
        )));
    }
    Ok(())
}

pub fn gap_matrix(y: &AchievementMatrix, z: &CutoffVector, alpha: f64) -> Result<GapMatrix> {
    if y.d() != z.len() {
        return Err(Error::ShapeMismatch(format!(
            "achievements have {} columns but {} cutoffs",
            y.d(),
            z.len()
        )));
    }
    check_alpha(alpha)?;
    let zs = z.as_slice();
    let values = y
        .rows()
        .flat_map(|row| row.iter().zip(zs).map(|(&yv, &zv)| gap(yv, zv, alpha)))
        .collect();
    Ok(GapMatrix {
        alpha,
        n: y.n(),
        d: y.d(),
        values,
    })
}

/// N×d table of deprivation scores, optionally already multiplied by weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DeprivationMatrix {
    pub alpha: f64,
    pub weighted: bool,
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DeprivationMatrix {
    pub(crate) fn from_rows(alpha: f64, weighted: bool, rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        Self {
            alpha,
            weighted,
            n,
            d,
            values: rows.into_iter().flatten().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.d)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Per-person row totals, each summed in dimension order.
    pub fn row_totals(&self) -> Vec<f64> {
        self.rows()
            .map(|row| {
                let mut t = 0.0;
                for &v in row {
                    t += v;
                }
                t
            })
            .collect()
    }
}

/// Scores for the whole population. With `w`, entry `ij` holds `w_j · D_ij^α`.
pub fn deprivation_matrix(
    y: &AchievementMatrix,
    z: &CutoffVector,
    m: &DependenceStructure,
    alpha: f64,
    w: Option<&WeightVector>,
) -> Result<DeprivationMatrix> {
    check_shapes(y, z, m)?;
    if let Some(w) = w {
        if w.len() != m.d() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {} dimensions",
                w.len(),
                m.d()
            )));
        }
    }
    let gaps = gap_matrix(y, z, alpha)?;
    let d = m.d();
    let mut values = Vec::with_capacity(y.n() * d);
    for row in gaps.rows() {
        for j0 in 0..d {
            let s = score(row, m, j0);
            values.push(match w {
                Some(w) => w.as_slice()[j0] * s,
                None => s,
            });
        }
    }
    Ok(DeprivationMatrix {
        alpha,
        weighted: w.is_some(),
        n: y.n(),
        d,
        values,
    })
}

/// D_i = Σ_j w_j · D_ij^0 for every person.
#[derive(Debug, Clone, PartialEq)]
pub struct DeprivationCounts(pub Vec<f64>);

impl DeprivationCounts {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn deprivation_counts(
    y: &AchievementMatrix,
    z: &CutoffVector,
    m: &DependenceStructure,
    w: &WeightVector,
) -> Result<DeprivationCounts> {
    check_shapes(y, z, m)?;
    if w.len() != m.d() {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for {} dimensions",
            w.len(),
            m.d()
        )));
    }
    let gaps = gap_matrix(y, z, 0.0)?;
    Ok(DeprivationCounts(
        gaps.rows()
            .map(|row| weighted_row_total(row, m, w.as_slice()))
            .collect(),
    ))
}

/// Multiplier on θ = ∂r^α/∂η in ∂D_ij^α/∂η_ij': 1 on the diagonal, else `M[j][j'] / (d - 1)`.
pub fn gap_sensitivity(m: &DependenceStructure, j: usize, jp: usize) -> Result<f64> {
    let r = check_index(j, m.d())?;
    let c = check_index(jp, m.d())?;
    if r == c {
        Ok(1.0)
    } else {
        Ok(m.entry(r, c) / (m.d() - 1) as f64)
    }
}

/// Σ_{j' ≠ j} gap_sensitivity(M, j, j'): the share of θ that reaches `j` when
/// every other dimension improves by the same relative amount. Lies in `[0, 1]`.
pub fn total_cross_effect(m: &DependenceStructure, j: usize) -> Result<f64> {
    let r = check_index(j, m.d())?;
    let off: f64 = (0..m.d()).filter(|&c| c != r).map(|c| m.entry(r, c)).sum();
    Ok(off / (m.d() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    fn sample() -> DependenceStructure {
        DependenceStructure::new(&[
            vec![1.0, 0.5, 0.0],
            vec![0.2, 1.0, 0.4],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn gaps() {
        assert_eq!(normalized_gap(5.0, 10.0, 1.0).unwrap(), 0.5);
        for a in [0.0, 0.5, 1.0, 2.0] {
            assert_eq!(normalized_gap(10.0, 10.0, a).unwrap(), 0.0);
        }
        assert_eq!(normalized_gap(15.0, 10.0, 2.0).unwrap(), 0.0);
        assert!(close(normalized_gap(2.5, 10.0, 2.0).unwrap(), 0.5625));
        assert_eq!(normalized_gap(9.9, 10.0, 0.0).unwrap(), 1.0);
        assert!(matches!(
            normalized_gap(1.0, 0.0, 1.0),
            Err(Error::NonPositiveCutoff { .. })
        ));
    }

    #[test]
    fn scores() {
        let id = DependenceStructure::identity(3).unwrap();
        let g = [0.6, 0.25, 0.0];
        assert_eq!(deprivation_score(&g, &id, 1).unwrap(), 0.6);
        let m = sample();
        assert!(close(deprivation_score(&g, &m, 1).unwrap(), 0.6625));
        assert!(close(deprivation_score(&g, &m, 2).unwrap(), 0.31));
        assert_eq!(deprivation_score(&g, &m, 3).unwrap(), 0.0);
        assert!(matches!(
            deprivation_score(&g, &m, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn fully_connected_pair_at_alpha_zero() {
        let m = DependenceStructure::all_ones(2).unwrap();
        let y = AchievementMatrix::new(vec![vec![0.0, 0.0]]).unwrap();
        let z = CutoffVector::new(vec![1.0, 1.0]).unwrap();
        let dm = deprivation_matrix(&y, &z, &m, 0.0, None).unwrap();
        assert_eq!(dm.to_rows(), vec![vec![2.0, 2.0]]);
    }

    #[test]
    fn weighted_matrix() {
        // y chosen so the gap row is (0.6, 0.25, 0) with z = 10 and alpha = 1.
        let y = AchievementMatrix::new(vec![vec![4.0, 7.5, 10.0]]).unwrap();
        let z = CutoffVector::new(vec![10.0; 3]).unwrap();
        let w = crate::model::validate_weights(&[1.5, 1.0, 0.5], 3).unwrap();
        let dm = deprivation_matrix(&y, &z, &sample(), 1.0, Some(&w)).unwrap();
        assert!(dm.weighted);
        let row = dm.row(0);
        assert!(close(row[0], 0.99375));
        assert!(close(row[1], 0.31));
        assert_eq!(row[2], 0.0);
    }

    #[test]
    fn identity_gives_plain_gaps() {
        let y = AchievementMatrix::new(vec![vec![2.0, 12.0], vec![7.0, 1.0]]).unwrap();
        let z = CutoffVector::new(vec![10.0, 4.0]).unwrap();
        let id = DependenceStructure::identity(2).unwrap();
        let w = WeightVector::uniform(2);
        let dm = deprivation_matrix(&y, &z, &id, 1.0, Some(&w)).unwrap();
        let g = gap_matrix(&y, &z, 1.0).unwrap();
        for i in 0..2 {
            assert_eq!(dm.row(i), g.row(i));
        }
    }

    #[test]
    fn counts() {
        let z = CutoffVector::new(vec![10.0; 3]).unwrap();
        let y = AchievementMatrix::new(vec![vec![11.0, 10.0, 30.0], vec![1.0, 9.0, 10.0]]).unwrap();
        let c = deprivation_counts(&y, &z, &sample(), &WeightVector::uniform(3)).unwrap();
        assert_eq!(c.0[0], 0.0);
        assert!(close(c.0[1], 2.35));

        let id = DependenceStructure::identity(3).unwrap();
        let y = AchievementMatrix::new(vec![vec![1.0, 9.0, 10.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let c = deprivation_counts(&y, &z, &id, &WeightVector::uniform(3)).unwrap();
        assert_eq!(c.0, vec![2.0, 3.0]);
    }

    #[test]
    fn shape_mismatch() {
        let y = AchievementMatrix::new(vec![vec![1.0, 2.0]]).unwrap();
        let z = CutoffVector::new(vec![10.0; 3]).unwrap();
        assert!(matches!(
            deprivation_matrix(&y, &z, &sample(), 1.0, None),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn sensitivities() {
        let m = sample();
        for j in 1..=3 {
            assert_eq!(gap_sensitivity(&m, j, j).unwrap(), 1.0);
        }
        assert_eq!(gap_sensitivity(&m, 1, 2).unwrap(), 0.25);
        let id = DependenceStructure::identity(3).unwrap();
        assert_eq!(gap_sensitivity(&id, 1, 2).unwrap(), 0.0);
        assert_eq!(total_cross_effect(&id, 1).unwrap(), 0.0);
        assert_eq!(
            total_cross_effect(&DependenceStructure::all_ones(4).unwrap(), 2).unwrap(),
            1.0
        );
        assert!(close(total_cross_effect(&m, 2).unwrap(), 0.3));
    }
}
