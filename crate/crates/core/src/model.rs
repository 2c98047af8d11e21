//! Domain types and their validation.
//!
//! Every type here is immutable once constructed, so a validated value can be
//! shared freely between threads. Indices taken by the public query functions
//! are 1-based (`1..=d`); the raw accessors (`entry`, `get`, `row`) are 0-based.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used for the sum-to-d and unit-diagonal checks.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Entry-wise tolerance for deciding that a structure is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub(crate) fn check_index(j: usize, d: usize) -> Result<usize> {
    if j == 0 || j > d {
        return Err(Error::IndexOutOfRange { index: j, d });
    }
    Ok(j - 1)
}

/// The d×d matrix of interdimensional effects.
///
/// Row `j` is the affected dimension, column `j'` the affecting one. Entries lie
/// in `[0, 1]` and the diagonal is exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceStructure {
    d: usize,
    entries: Vec<f64>,
    symmetric: bool,
}

impl DependenceStructure {
    /// Validate a raw square matrix.
    pub fn new(raw: &[Vec<f64>]) -> Result<Self> {
        let d = raw.len();
        for (r, row) in raw.iter().enumerate() {
            if row.len() != d {
                return Err(Error::NotSquare {
                    rows: d,
                    row: r + 1,
                    cols: row.len(),
                });
            }
        }
        if d < 2 {
            return Err(Error::TooFewDimensions(d));
        }
        let mut entries = Vec::with_capacity(d * d);
        for (r, row) in raw.iter().enumerate() {
            for (c, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::EntryOutOfRange {
                        row: r + 1,
                        col: c + 1,
                        value,
                    });
                }
                if r == c {
                    if (value - 1.0).abs() > VALIDATION_TOL {
                        return Err(Error::DiagonalNotOne {
                            index: r + 1,
                            value,
                        });
                    }
                    entries.push(1.0);
                } else {
                    entries.push(value);
                }
            }
        }
        let mut out = Self {
            d,
            entries,
            symmetric: false,
        };
        out.symmetric = out.first_asymmetry().is_none();
        Ok(out)
    }

    pub fn identity(d: usize) -> Result<Self> {
        let raw: Vec<Vec<f64>> = (0..d)
            .map(|r| (0..d).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(&raw)
    }

    pub fn all_ones(d: usize) -> Result<Self> {
        Self::new(&vec![vec![1.0; d]; d])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// 0-based entry `M[row][col]`.
    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.d + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.d..(row + 1) * self.d]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.d).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// First pair `(row, col)` (1-based, `row < col`) whose mirrored entries differ.
    pub fn first_asymmetry(&self) -> Option<(usize, usize)> {
        for r in 0..self.d {
            for c in (r + 1)..self.d {
                if (self.entry(r, c) - self.entry(c, r)).abs() > SYMMETRY_TOL {
                    return Some((r + 1, c + 1));
                }
            }
        }
        None
    }

    /// Σ, the sum of every entry.
    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Σ_j for every column, in dimension order.
    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.d)
            .map(|c| (0..self.d).map(|r| self.entry(r, c)).sum())
            .collect()
    }

    /// Copy of this structure with one off-diagonal entry replaced (1-based indices).
    pub fn with_entry(&self, row: usize, col: usize, value: f64) -> Result<Self> {
        let r = check_index(row, self.d)?;
        let c = check_index(col, self.d)?;
        let mut raw = self.to_rows();
        raw[r][c] = value;
        Self::new(&raw)
    }
}

/// Validate a raw matrix as a dependence structure.
pub fn validate_dependence_structure(raw: &[Vec<f64>]) -> Result<DependenceStructure> {
    DependenceStructure::new(raw)
}

/// C_j: the dimensions `j'` with `M[j][j'] > 0`. Always contains `j`.
pub fn connections_of(m: &DependenceStructure, j: usize) -> Result<BTreeSet<usize>> {
    let r = check_index(j, m.d())?;
    Ok(m.row(r)
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(c, _)| c + 1)
        .collect())
}

/// True iff every dimension is connected only to itself, i.e. `M` is the identity.
pub fn is_disconnected(m: &DependenceStructure) -> bool {
    (0..m.d()).all(|r| (0..m.d()).all(|c| r == c || m.entry(r, c) == 0.0))
}

/// N×d table of nonnegative achievements.
#[derive(Debug, Clone, PartialEq)]
pub struct AchievementMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl AchievementMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::ShapeMismatch(
                "achievement rows have no columns".into(),
            ));
        }
        let mut values = Vec::with_capacity(n * d);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    found: row.len(),
                    expected: d,
                });
            }
            for (j, v) in row.into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteAchievement {
                        row: i + 1,
                        col: j + 1,
                    });
                }
                if v < 0.0 {
                    return Err(Error::NegativeAchievement {
                        row: i + 1,
                        col: j + 1,
                        value: v,
                    });
                }
                values.push(v);
            }
        }
        Ok(Self { n, d, values })
    }

    /// Every person at the same achievement vector.
    pub fn filled(n: usize, row: &[f64]) -> Result<Self> {
        Self::new(vec![row.to_vec(); n])
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

    /// Sub-population made of the given 0-based person indices, in that order.
    pub fn select(&self, persons: &[usize]) -> Result<Self> {
        let rows = persons
            .iter()
            .map(|&i| {
                if i >= self.n {
                    Err(Error::PersonOutOfRange {
                        index: i + 1,
                        n: self.n,
                    })
                } else {
                    Ok(self.row(i).to_vec())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// `times`-fold stacking of the whole population.
    pub fn replicate(&self, times: usize) -> Result<Self> {
        let mut rows = Vec::with_capacity(self.n * times);
        for _ in 0..times {
            rows.extend(self.rows().map(<[f64]>::to_vec));
        }
        Self::new(rows)
    }

    /// Vertical concatenation `self ⊕ other`.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if other.d != self.d {
            return Err(Error::ShapeMismatch(format!(
                "cannot stack d = {} with d = {}",
                self.d, other.d
            )));
        }
        let mut rows = self.to_rows();
        rows.extend(other.to_rows());
        Self::new(rows)
    }
}

/// Dimension cutoffs `z`, all strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CutoffVector(Vec<f64>);

impl CutoffVector {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        for (j, &v) in z.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonPositiveCutoff {
                    index: j + 1,
                    value: v,
                });
            }
        }
        Ok(Self(z))
    }

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

impl TryFrom<Vec<f64>> for CutoffVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CutoffVector> for Vec<f64> {
    fn from(z: CutoffVector) -> Self {
        z.0
    }
}

/// Dimension weights: positive, each below `d`, summing to `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn uniform(d: usize) -> Self {
        Self(vec![1.0; d])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|&w| w == 1.0)
    }
}

/// Validate raw weights against dimension count `d`.
pub fn validate_weights(raw: &[f64], d: usize) -> Result<WeightVector> {
    if raw.len() != d {
        return Err(Error::ShapeMismatch(format!(
            "{} weights for {} dimensions",
            raw.len(),
            d
        )));
    }
    let df = d as f64;
    for (j, &w) in raw.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::NonPositiveWeight {
                index: j + 1,
                value: w,
            });
        }
    }
    let sum: f64 = raw.iter().sum();
    if (sum - df).abs() > VALIDATION_TOL * df {
        return Err(Error::SumNotD { sum, d });
    }
    // Only reachable through the sum tolerance once positivity holds.
    if let Some((j, &w)) = raw.iter().enumerate().find(|(_, &w)| w >= df) {
        return Err(Error::WeightTooLarge {
            index: j + 1,
            value: w,
            d,
        });
    }
    Ok(WeightVector(raw.to_vec()))
}

/// The methodology (α, k, M, w) together with the cutoffs `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodologyConfig {
    alpha: f64,
    k: f64,
    structure: DependenceStructure,
    weights: WeightVector,
    cutoffs: CutoffVector,
}

impl MethodologyConfig {
    /// Validates shapes, `alpha >= 0` and `0 < k <= ceiling(M, w)`.
    pub fn new(
        alpha: f64,
        k: f64,
        structure: DependenceStructure,
        weights: WeightVector,
        cutoffs: CutoffVector,
    ) -> Result<Self> {
        let d = structure.d();
        if weights.len() != d || cutoffs.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "M is {d}×{d}, {} weights, {} cutoffs",
                weights.len(),
                cutoffs.len()
            )));
        }
        check_alpha(alpha)?;
        let max = crate::bounds::score_ceiling(&structure, &weights);
        check_k(k, max)?;
        Ok(Self {
            alpha,
            k,
            structure,
            weights,
            cutoffs,
        })
    }

    /// Like [`MethodologyConfig::new`] with `k = fraction · ceiling(M, w)`.
    pub fn with_k_fraction(
        alpha: f64,
        fraction: f64,
        structure: DependenceStructure,
        weights: WeightVector,
        cutoffs: CutoffVector,
    ) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::CutoffOutOfRange {
                k: fraction,
                max: 1.0,
            });
        }
        let max = crate::bounds::score_ceiling(&structure, &weights);
        let k = if fraction == 1.0 { max } else { fraction * max };
        Self::new(alpha, k, structure, weights, cutoffs)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn structure(&self) -> &DependenceStructure {
        &self.structure
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn cutoffs(&self) -> &CutoffVector {
        &self.cutoffs
    }

    pub fn d(&self) -> usize {
        self.structure.d()
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(
            alpha,
            self.k,
            self.structure.clone(),
            self.weights.clone(),
            self.cutoffs.clone(),
        )
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(
            self.alpha,
            k,
            self.structure.clone(),
            self.weights.clone(),
            self.cutoffs.clone(),
        )
    }

    pub fn with_structure(&self, structure: DependenceStructure) -> Result<Self> {
        Self::new(
            self.alpha,
            self.k,
            structure,
            self.weights.clone(),
            self.cutoffs.clone(),
        )
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

pub(crate) fn check_k(k: f64, max: f64) -> Result<()> {
    if !(k > 0.0 && k <= max) {
        return Err(Error::CutoffOutOfRange { k, max });
    }
    Ok(())
}
