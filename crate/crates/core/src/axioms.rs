//! Executable axioms.
//!
//! Each axiom pairs a transformation of the achievement matrix with the
//! relation the index must satisfy before and after it (`=`, `<=` or `<`).
//! [`run_axiom_suite`] draws random populations, applies the transformations
//! and records every violation together with its margin.
//!
//! Margins are signed so that larger means worse: `|after - before|` for
//! equalities, `after - before` for inequalities. Every trial draws from its
//! own RNG seeded from `(seed, axiom, trial)`, so a report can be reproduced
//! trial by trial.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::aggregation::{decompose_by_group, fgt_network_adjusted};
use crate::bounds::score_ceiling;
use crate::deprivation::deprivation_counts;
use crate::error::{Error, Result};
use crate::identification::{identify, PovertyStatusVector};
use crate::model::{
    check_index, validate_weights, AchievementMatrix, CutoffVector, DependenceStructure,
    MethodologyConfig, WeightVector,
};

/// Slack for recombination checks and for float noise in weak inequalities.
pub const EQUALITY_TOL: f64 = 1e-12;

/// Required strict decrease for `<` relations.
pub const STRICT_MARGIN: f64 = 1e-12;

/// Tolerance on the row and column sums of a bistochastic matrix.
pub const BISTOCHASTIC_TOL: f64 = 1e-12;

const MAX_ATTEMPTS: usize = 64;

/// How a simple increment relates to the person's status and the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct IncrementClass {
    pub among_non_poor: bool,
    pub among_non_deprived: bool,
    pub deprived_among_poor: bool,
    pub dimensional_among_poor: bool,
}

/// Transformations of an achievement matrix used by the axioms.
#[derive(Debug, Clone, PartialEq)]
pub enum Transformation {
    /// Raise one cell (0-based person and dimension).
    SimpleIncrement {
        person: usize,
        dim: usize,
        amount: f64,
    },
    /// `Y' = B·Y` for a bistochastic `B` that leaves the non-poor alone.
    BistochasticAverage { matrix: Vec<Vec<f64>> },
    /// Swap the listed dimensions (0-based) between two persons.
    Rearrangement {
        first: usize,
        second: usize,
        dims: BTreeSet<usize>,
    },
    /// Row `i` of the result is row `order[i]` of the input.
    Permutation { order: Vec<usize> },
    /// Stack `times` copies of the population.
    Replication { times: usize },
}

fn poverty_statuses(
    y: &AchievementMatrix,
    config: &MethodologyConfig,
) -> Result<PovertyStatusVector> {
    let counts = deprivation_counts(y, config.cutoffs(), config.structure(), config.weights())?;
    identify(
        &counts,
        config.k(),
        score_ceiling(config.structure(), config.weights()),
    )
}

impl Transformation {
    pub fn apply(
        &self,
        y: &AchievementMatrix,
        config: &MethodologyConfig,
    ) -> Result<AchievementMatrix> {
        match self {
            Transformation::SimpleIncrement {
                person,
                dim,
                amount,
            } => apply_simple_increment(y, person + 1, dim + 1, *amount, config).map(|(x, _)| x),
            Transformation::BistochasticAverage { matrix } => {
                let s = poverty_statuses(y, config)?;
                apply_bistochastic_average(y, matrix, &s)
            }
            Transformation::Rearrangement {
                first,
                second,
                dims,
            } => {
                let s = poverty_statuses(y, config)?;
                let dims: BTreeSet<usize> = dims.iter().map(|j| j + 1).collect();
                apply_rearrangement(y, first + 1, second + 1, &dims, &s).map(|(x, _)| x)
            }
            Transformation::Permutation { order } => {
                let mut seen = vec![false; y.n()];
                for &i in order {
                    if i >= y.n() || std::mem::replace(&mut seen[i], true) {
                        return Err(Error::InvalidPartition(format!(
                            "{order:?} is not a permutation of {} rows",
                            y.n()
                        )));
                    }
                }
                if order.len() != y.n() {
                    return Err(Error::InvalidPartition(
                        "permutation length differs from N".into(),
                    ));
                }
                y.select(order)
            }
            Transformation::Replication { times } => y.replicate(*times),
        }
    }
}

/// Raise `y[i][j]` (1-based) by `amount` and classify the increment.
pub fn apply_simple_increment(
    y: &AchievementMatrix,
    i: usize,
    j: usize,
    amount: f64,
    config: &MethodologyConfig,
) -> Result<(AchievementMatrix, IncrementClass)> {
    if !(amount > 0.0 && amount.is_finite()) {
        return Err(Error::NonPositiveAmount(amount));
    }
    if i == 0 || i > y.n() {
        return Err(Error::PersonOutOfRange { index: i, n: y.n() });
    }
    let c = check_index(j, y.d())?;
    let r = i - 1;
    let statuses = poverty_statuses(y, config)?;
    let z = config.cutoffs().as_slice()[c];
    let before = y.get(r, c);
    let after = before + amount;
    let poor = statuses.is_poor(r);
    let deprived_among_poor = poor && z > before;
    let class = IncrementClass {
        among_non_poor: !poor,
        among_non_deprived: before > z,
        deprived_among_poor,
        dimensional_among_poor: deprived_among_poor && after > z,
    };
    let mut rows = y.to_rows();
    rows[r][c] = after;
    Ok((AchievementMatrix::new(rows)?, class))
}

/// Check that `b` is bistochastic and fixes every non-poor person.
pub fn validate_bistochastic(b: &[Vec<f64>], statuses: &PovertyStatusVector) -> Result<()> {
    let n = statuses.len();
    if b.len() != n || b.iter().any(|r| r.len() != n) {
        return Err(Error::NotBistochastic(format!("expected a {n}×{n} matrix")));
    }
    for (i, row) in b.iter().enumerate() {
        if let Some(v) = row.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::NotBistochastic(format!(
                "row {} has entry {v}",
                i + 1
            )));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > BISTOCHASTIC_TOL {
            return Err(Error::NotBistochastic(format!("row {} sums to {s}", i + 1)));
        }
    }
    for c in 0..n {
        let s: f64 = b.iter().map(|r| r[c]).sum();
        if (s - 1.0).abs() > BISTOCHASTIC_TOL {
            return Err(Error::NotBistochastic(format!(
                "column {} sums to {s}",
                c + 1
            )));
        }
    }
    for (i, row) in b.iter().enumerate() {
        if !statuses.is_poor(i) && (row[i] - 1.0).abs() > BISTOCHASTIC_TOL {
            return Err(Error::NonPoorRowNotIdentity(i + 1));
        }
    }
    Ok(())
}

/// `Y' = B·Y`. Rows of non-poor persons are copied unchanged.
pub fn apply_bistochastic_average(
    y: &AchievementMatrix,
    b: &[Vec<f64>],
    statuses: &PovertyStatusVector,
) -> Result<AchievementMatrix> {
    if statuses.len() != y.n() {
        return Err(Error::ShapeMismatch(format!(
            "{} statuses for {} persons",
            statuses.len(),
            y.n()
        )));
    }
    validate_bistochastic(b, statuses)?;
    let d = y.d();
    let rows = (0..y.n())
        .map(|i| {
            if !statuses.is_poor(i) {
                return y.row(i).to_vec();
            }
            (0..d)
                .map(|j| {
                    b[i].iter()
                        .enumerate()
                        .map(|(k, &bik)| bik * y.get(k, j))
                        .sum()
                })
                .collect()
        })
        .collect();
    AchievementMatrix::new(rows)
}

/// `a >= b` componentwise.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

pub fn comparable(a: &[f64], b: &[f64]) -> bool {
    dominates(a, b) || dominates(b, a)
}

/// Exchange `swap_dims` (1-based) between poor persons `i` and `i2` (1-based).
///
/// The flag is true when the pair was comparable by vector dominance before
/// the swap and is not afterwards.
pub fn apply_rearrangement(
    y: &AchievementMatrix,
    i: usize,
    i2: usize,
    swap_dims: &BTreeSet<usize>,
    statuses: &PovertyStatusVector,
) -> Result<(AchievementMatrix, bool)> {
    for &p in &[i, i2] {
        if p == 0 || p > y.n() {
            return Err(Error::PersonOutOfRange { index: p, n: y.n() });
        }
    }
    if i == i2 {
        return Err(Error::SamePerson(i));
    }
    for &p in &[i, i2] {
        if !statuses.is_poor(p - 1) {
            return Err(Error::PersonNotPoor(p));
        }
    }
    let cols = swap_dims
        .iter()
        .map(|&j| check_index(j, y.d()))
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = (i - 1, i2 - 1);
    let mut rows = y.to_rows();
    for c in cols {
        let t = rows[a][c];
        rows[a][c] = rows[b][c];
        rows[b][c] = t;
    }
    let decreasing = comparable(y.row(a), y.row(b)) && !comparable(&rows[a], &rows[b]);
    Ok((AchievementMatrix::new(rows)?, decreasing))
}

/// Convex combination of permutation matrices acting on `poor` only.
pub fn random_bistochastic<R: Rng>(rng: &mut R, n: usize, poor: &[usize]) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n]; n];
    for (i, row) in b.iter_mut().enumerate() {
        if !poor.contains(&i) {
            row[i] = 1.0;
        }
    }
    let terms = rng.gen_range(1..=4);
    let mut lambdas: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = lambdas.iter().sum();
    lambdas.iter_mut().for_each(|l| *l /= s);
    for lambda in lambdas {
        let mut image = poor.to_vec();
        image.shuffle(rng);
        for (&from, &to) in poor.iter().zip(&image) {
            b[from][to] += lambda;
        }
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Decomposability,
    ReplicationInvariance,
    Symmetry,
    PovertyFocus,
    DeprivationFocus,
    WeakMonotonicity,
    Monotonicity,
    DimensionalMonotonicity,
    Nontriviality,
    Normalization,
    WeakTransfer,
    WeakRearrangement,
}

impl Axiom {
    pub const ALL: [Axiom; 12] = [
        Axiom::Decomposability,
        Axiom::ReplicationInvariance,
        Axiom::Symmetry,
        Axiom::PovertyFocus,
        Axiom::DeprivationFocus,
        Axiom::WeakMonotonicity,
        Axiom::Monotonicity,
        Axiom::DimensionalMonotonicity,
        Axiom::Nontriviality,
        Axiom::Normalization,
        Axiom::WeakTransfer,
        Axiom::WeakRearrangement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Decomposability => "decomposability",
            Axiom::ReplicationInvariance => "replication_invariance",
            Axiom::Symmetry => "symmetry",
            Axiom::PovertyFocus => "poverty_focus",
            Axiom::DeprivationFocus => "deprivation_focus",
            Axiom::WeakMonotonicity => "weak_monotonicity",
            Axiom::Monotonicity => "monotonicity",
            Axiom::DimensionalMonotonicity => "dimensional_monotonicity",
            Axiom::Nontriviality => "nontriviality",
            Axiom::Normalization => "normalization",
            Axiom::WeakTransfer => "weak_transfer",
            Axiom::WeakRearrangement => "weak_rearrangement",
        }
    }

    /// Whether the index is guaranteed to satisfy this axiom at `alpha`.
    pub fn covered_at(self, alpha: f64) -> bool {
        match self {
            Axiom::Monotonicity => alpha > 0.0,
            Axiom::WeakTransfer => alpha >= 1.0,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomStatus {
    Pass,
    Fail,
    NotCovered,
    /// No trial found an instance the axiom applies to.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub alpha: f64,
    pub status: AxiomStatus,
    pub trials: usize,
    pub skipped: usize,
    pub violations: usize,
    pub worst_violation: f64,
    pub seed: u64,
}

/// Where trial configurations come from.
#[derive(Debug, Clone)]
pub enum StructureSpec {
    /// Use this structure, weights, cutoffs and `k` for every trial; `alpha` is overridden.
    Fixed(MethodologyConfig),
    /// Draw a fresh structure per trial.
    Random { symmetric: bool, weighted: bool },
}

#[derive(Debug, Clone)]
pub struct GeneratorSettings {
    pub trials: usize,
    pub n_range: (usize, usize),
    pub d_range: (usize, usize),
    pub seed: u64,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        Self {
            trials: 200,
            n_range: (2, 30),
            d_range: (2, 6),
            seed: 0,
        }
    }
}

impl GeneratorSettings {
    fn validate(&self, spec: &StructureSpec) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidGeneratorSettings(m.into()));
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        let (nmin, nmax) = self.n_range;
        if nmin == 0 || nmin > nmax {
            return bad("N range must satisfy 1 <= min <= max");
        }
        if nmax < 2 {
            return bad("N range must allow at least 2 persons");
        }
        if matches!(spec, StructureSpec::Random { .. }) {
            let (dmin, dmax) = self.d_range;
            if dmin < 2 || dmin > dmax || dmax > 20 {
                return bad("d range must satisfy 2 <= min <= max <= 20");
            }
        }
        Ok(())
    }
}

/// splitmix64 finalizer.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn trial_seed(seed: u64, axiom: Axiom, trial: usize) -> u64 {
    mix(mix(mix(seed) ^ axiom as u64) ^ trial as u64)
}

/// Random structure with roughly a third of off-diagonal entries zero.
#[allow(clippy::needless_range_loop)]
pub fn random_structure<R: Rng>(rng: &mut R, d: usize, symmetric: bool) -> DependenceStructure {
    let mut raw = vec![vec![0.0; d]; d];
    for r in 0..d {
        raw[r][r] = 1.0;
        for c in 0..d {
            if r == c || (symmetric && c < r) {
                continue;
            }
            let v = if rng.gen_bool(1.0 / 3.0) {
                0.0
            } else {
                rng.gen_range(0.0..=1.0)
            };
            raw[r][c] = v;
            if symmetric {
                raw[c][r] = v;
            }
        }
    }
    DependenceStructure::new(&raw).expect("generated structure is valid")
}

pub fn random_weights<R: Rng>(rng: &mut R, d: usize) -> WeightVector {
    let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let w: Vec<f64> = raw.iter().map(|v| v * d as f64 / s).collect();
    validate_weights(&w, d).expect("generated weights are valid")
}

pub fn random_cutoffs<R: Rng>(rng: &mut R, d: usize) -> CutoffVector {
    CutoffVector::new((0..d).map(|_| rng.gen_range(1.0..10.0)).collect()).expect("positive cutoffs")
}

/// Achievements drawn from `[0, 2 z_j]`.
pub fn random_population<R: Rng>(rng: &mut R, n: usize, z: &CutoffVector) -> AchievementMatrix {
    let rows = (0..n)
        .map(|_| {
            z.as_slice()
                .iter()
                .map(|&zj| rng.gen_range(0.0..2.0 * zj))
                .collect()
        })
        .collect();
    AchievementMatrix::new(rows).expect("nonnegative achievements")
}

struct Instance {
    y: AchievementMatrix,
    config: MethodologyConfig,
}

fn draw_instance(
    rng: &mut ChaCha8Rng,
    spec: &StructureSpec,
    alpha: f64,
    settings: &GeneratorSettings,
    min_n: usize,
) -> Result<Instance> {
    let (nmin, nmax) = settings.n_range;
    let n = rng.gen_range(nmin.max(min_n)..=nmax.max(min_n));
    let config = match spec {
        StructureSpec::Fixed(c) => c.with_alpha(alpha)?,
        StructureSpec::Random {
            symmetric,
            weighted,
        } => {
            let d = rng.gen_range(settings.d_range.0..=settings.d_range.1);
            let m = random_structure(rng, d, *symmetric);
            let w = if *weighted {
                random_weights(rng, d)
            } else {
                WeightVector::uniform(d)
            };
            let z = random_cutoffs(rng, d);
            let fraction = rng.gen_range(0.1..=0.6);
            MethodologyConfig::with_k_fraction(alpha, fraction, m, w, z)?
        }
    };
    let y = random_population(rng, n, config.cutoffs());
    Ok(Instance { y, config })
}

fn fgt(y: &AchievementMatrix, c: &MethodologyConfig) -> Result<f64> {
    Ok(fgt_network_adjusted(y, c)?.value)
}

enum Outcome {
    Inapplicable,
    Checked { margin: f64, violated: bool },
}

fn equal_exact(before: f64, after: f64) -> Outcome {
    let margin = (after - before).abs();
    Outcome::Checked {
        margin,
        violated: after != before,
    }
}

fn equal_tol(before: f64, after: f64) -> Outcome {
    let margin = (after - before).abs();
    Outcome::Checked {
        margin,
        violated: margin > EQUALITY_TOL,
    }
}

fn weakly_lower(before: f64, after: f64) -> Outcome {
    let margin = after - before;
    Outcome::Checked {
        margin,
        violated: margin > EQUALITY_TOL,
    }
}

fn strictly_lower(before: f64, after: f64) -> Outcome {
    let margin = after - before;
    Outcome::Checked {
        margin,
        violated: margin >= -STRICT_MARGIN,
    }
}

fn pick<R: Rng, T: Copy>(rng: &mut R, items: &[T]) -> Option<T> {
    items.choose(rng).copied()
}

fn run_trial(axiom: Axiom, rng: &mut ChaCha8Rng, inst: &Instance) -> Result<Outcome> {
    let Instance { y, config } = inst;
    let z = config.cutoffs().as_slice();
    let (n, d) = (y.n(), y.d());
    let before = fgt(y, config)?;
    let statuses = poverty_statuses(y, config)?;
    let poor = statuses.poor_indices();
    let non_poor: Vec<usize> = (0..n).filter(|i| !statuses.is_poor(*i)).collect();

    let increment = |person: usize, dim: usize, amount: f64| -> Result<f64> {
        let x = Transformation::SimpleIncrement {
            person,
            dim,
            amount,
        }
        .apply(y, config)?;
        fgt(&x, config)
    };

    Ok(match axiom {
        Axiom::Decomposability => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let cut = rng.gen_range(1..n);
            let first = y.select(&order[..cut])?;
            let second = y.select(&order[cut..])?;
            let merged = first.stack(&second)?;
            let nf = n as f64;
            let combined = cut as f64 / nf * fgt(&first, config)?
                + (n - cut) as f64 / nf * fgt(&second, config)?;
            let whole = fgt(&merged, config)?;
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let dec = decompose_by_group(y, &labels, config)?;
            let margin = (whole - combined)
                .abs()
                .max((dec.recombined - dec.total.value).abs());
            Outcome::Checked {
                margin,
                violated: margin > EQUALITY_TOL,
            }
        }
        Axiom::ReplicationInvariance => {
            let times = rng.gen_range(2..=4);
            let x = Transformation::Replication { times }.apply(y, config)?;
            equal_tol(before, fgt(&x, config)?)
        }
        Axiom::Symmetry => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let x = Transformation::Permutation { order }.apply(y, config)?;
            equal_exact(before, fgt(&x, config)?)
        }
        Axiom::PovertyFocus => match pick(rng, &non_poor) {
            None => Outcome::Inapplicable,
            Some(i) => {
                let j = rng.gen_range(0..d);
                let amount = rng.gen_range(0.01..=1.0) * z[j];
                equal_exact(before, increment(i, j, amount)?)
            }
        },
        Axiom::DeprivationFocus => {
            let cells: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .filter(|&(i, j)| y.get(i, j) > z[j])
                .collect();
            match pick(rng, &cells) {
                None => Outcome::Inapplicable,
                Some((i, j)) => {
                    let amount = rng.gen_range(0.01..=1.0) * z[j];
                    equal_exact(before, increment(i, j, amount)?)
                }
            }
        }
        Axiom::WeakMonotonicity => {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..d));
            let amount = rng.gen_range(0.01..=1.0) * z[j];
            weakly_lower(before, increment(i, j, amount)?)
        }
        Axiom::Monotonicity | Axiom::DimensionalMonotonicity => {
            // Gaps of at least 1% keep the change well above the strict margin.
            let cells: Vec<(usize, usize)> = poor
                .iter()
                .flat_map(|&i| (0..d).map(move |j| (i, j)))
                .filter(|&(i, j)| (z[j] - y.get(i, j)) / z[j] >= 0.01)
                .collect();
            match pick(rng, &cells) {
                None => Outcome::Inapplicable,
                Some((i, j)) => {
                    let shortfall = z[j] - y.get(i, j);
                    let amount = if axiom == Axiom::Monotonicity {
                        rng.gen_range(0.2..=0.9) * shortfall
                    } else {
                        shortfall + rng.gen_range(0.05..=0.5) * z[j]
                    };
                    let (x, class) = apply_simple_increment(y, i + 1, j + 1, amount, config)?;
                    let expected = if axiom == Axiom::Monotonicity {
                        class.deprived_among_poor && !class.dimensional_among_poor
                    } else {
                        class.dimensional_among_poor
                    };
                    if !expected {
                        return Err(Error::InvalidGeneratorSettings(format!(
                            "generator produced a misclassified increment {class:?}"
                        )));
                    }
                    strictly_lower(before, fgt(&x, config)?)
                }
            }
        }
        Axiom::Normalization => {
            let zero = AchievementMatrix::filled(n, &vec![0.0; d])?;
            let at_cutoff = AchievementMatrix::filled(n, z)?;
            let top = fgt(&zero, config)?;
            let bottom = fgt(&at_cutoff, config)?;
            let margin = (top - 1.0)
                .abs()
                .max(bottom.abs())
                .max(-before)
                .max(before - 1.0);
            Outcome::Checked {
                margin,
                violated: top != 1.0 || bottom != 0.0 || !(0.0..=1.0).contains(&before),
            }
        }
        Axiom::Nontriviality => {
            let top = fgt(&AchievementMatrix::filled(n, &vec![0.0; d])?, config)?;
            let bottom = fgt(&AchievementMatrix::filled(n, z)?, config)?;
            Outcome::Checked {
                margin: -(top - bottom).abs(),
                violated: top == bottom,
            }
        }
        Axiom::WeakTransfer => {
            if poor.len() < 2 {
                Outcome::Inapplicable
            } else {
                let matrix = random_bistochastic(rng, n, &poor);
                let x = apply_bistochastic_average(y, &matrix, &statuses)?;
                weakly_lower(before, fgt(&x, config)?)
            }
        }
        Axiom::WeakRearrangement => rearrangement_trial(rng, inst)?,
    })
}

/// Plants a poor person dominated by another poor person, then swaps a
/// subset of dimensions that breaks the dominance.
fn rearrangement_trial(rng: &mut ChaCha8Rng, inst: &Instance) -> Result<Outcome> {
    let Instance { y, config } = inst;
    let (n, d) = (y.n(), y.d());
    let statuses = poverty_statuses(y, config)?;
    let candidates: Vec<usize> = statuses
        .poor_indices()
        .into_iter()
        .filter(|&i| y.row(i).iter().filter(|&&v| v > 0.0).count() >= 2)
        .collect();
    let Some(rich) = pick(rng, &candidates) else {
        return Ok(Outcome::Inapplicable);
    };
    let others: Vec<usize> = (0..n).filter(|&i| i != rich).collect();
    let Some(dominated) = pick(rng, &others) else {
        return Ok(Outcome::Inapplicable);
    };
    let mut rows = y.to_rows();
    rows[dominated] = y
        .row(rich)
        .iter()
        .map(|&v| v * rng.gen_range(0.1..0.9))
        .collect();
    let planted = AchievementMatrix::new(rows)?;
    let statuses = poverty_statuses(&planted, config)?;
    if !statuses.is_poor(dominated) {
        return Err(Error::InvalidGeneratorSettings(
            "dominated person is not poor; count is not monotone".into(),
        ));
    }

    let strict: Vec<usize> = (0..d)
        .filter(|&j| planted.get(rich, j) > planted.get(dominated, j))
        .collect();
    let mut shuffled = strict.clone();
    shuffled.shuffle(rng);
    let take = rng.gen_range(1..shuffled.len());
    let mut dims: BTreeSet<usize> = shuffled[..take].iter().map(|j| j + 1).collect();
    // Dimensions with equal entries can be swapped freely.
    for j in 0..d {
        if !strict.contains(&j) && rng.gen_bool(0.5) {
            dims.insert(j + 1);
        }
    }
    let (x, decreasing) = apply_rearrangement(&planted, rich + 1, dominated + 1, &dims, &statuses)?;
    if !decreasing {
        return Err(Error::InvalidGeneratorSettings(
            "generated rearrangement is not association decreasing".into(),
        ));
    }
    let before = fgt(&planted, config)?;
    let after = fgt(&x, config)?;
    let still_poor = poverty_statuses(&x, config)?;
    let both_poor = still_poor.is_poor(rich) && still_poor.is_poor(dominated);
    match weakly_lower(before, after) {
        Outcome::Checked { margin, violated } => Ok(Outcome::Checked {
            margin,
            violated: violated || !both_poor,
        }),
        o => Ok(o),
    }
}

/// Check every axiom at `alpha` over `settings.trials` random instances.
pub fn run_axiom_suite(
    spec: &StructureSpec,
    alpha: f64,
    settings: &GeneratorSettings,
) -> Result<Vec<AxiomReport>> {
    settings.validate(spec)?;
    crate::model::check_alpha(alpha)?;
    Axiom::ALL
        .iter()
        .map(|&axiom| run_axiom(axiom, spec, alpha, settings))
        .collect()
}

pub fn run_axiom(
    axiom: Axiom,
    spec: &StructureSpec,
    alpha: f64,
    settings: &GeneratorSettings,
) -> Result<AxiomReport> {
    settings.validate(spec)?;
    let mut report = AxiomReport {
        axiom,
        alpha,
        status: AxiomStatus::NotCovered,
        trials: 0,
        skipped: 0,
        violations: 0,
        worst_violation: f64::NEG_INFINITY,
        seed: settings.seed,
    };
    if !axiom.covered_at(alpha) {
        report.worst_violation = 0.0;
        return Ok(report);
    }
    let min_n = match axiom {
        Axiom::Decomposability | Axiom::WeakTransfer | Axiom::WeakRearrangement => 2,
        _ => 1,
    };
    for t in 0..settings.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(settings.seed, axiom, t));
        let mut done = false;
        for _ in 0..MAX_ATTEMPTS {
            let inst = draw_instance(&mut rng, spec, alpha, settings, min_n)?;
            if let Outcome::Checked { margin, violated } = run_trial(axiom, &mut rng, &inst)? {
                report.trials += 1;
                report.worst_violation = report.worst_violation.max(margin);
                if violated {
                    report.violations += 1;
                }
                done = true;
                break;
            }
        }
        if !done {
            report.skipped += 1;
        }
    }
    if report.trials == 0 {
        report.worst_violation = 0.0;
    }
    report.status = if report.violations > 0 {
        AxiomStatus::Fail
    } else if report.trials == 0 {
        AxiomStatus::Inconclusive
    } else {
        AxiomStatus::Pass
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(d: usize) -> MethodologyConfig {
        MethodologyConfig::new(
            1.0,
            1.0,
            DependenceStructure::identity(d).unwrap(),
            WeightVector::uniform(d),
            CutoffVector::new(vec![10.0; d]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn increment_classes() {
        let c = config(2);
        let y = AchievementMatrix::new(vec![vec![5.0, 12.0], vec![20.0, 20.0]]).unwrap();
        let (_, class) = apply_simple_increment(&y, 2, 1, 1.0, &c).unwrap();
        assert!(class.among_non_poor && class.among_non_deprived);
        let (x, class) = apply_simple_increment(&y, 1, 1, 2.0, &c).unwrap();
        assert!(class.deprived_among_poor && !class.dimensional_among_poor);
        assert_eq!(x.get(0, 0), 7.0);
        let (_, class) = apply_simple_increment(&y, 1, 1, 7.0, &c).unwrap();
        assert!(class.dimensional_among_poor);
        let (_, class) = apply_simple_increment(&y, 1, 2, 7.0, &c).unwrap();
        assert!(class.among_non_deprived && !class.deprived_among_poor);
        assert!(matches!(
            apply_simple_increment(&y, 1, 1, 0.0, &c),
            Err(Error::NonPositiveAmount(_))
        ));
        assert!(apply_simple_increment(&y, 3, 1, 1.0, &c).is_err());
        assert!(apply_simple_increment(&y, 1, 3, 1.0, &c).is_err());
    }

    fn statuses(bits: &[bool]) -> PovertyStatusVector {
        let counts = crate::deprivation::DeprivationCounts(
            bits.iter().map(|&b| if b { 2.0 } else { 0.0 }).collect(),
        );
        identify(&counts, 1.0, 2.0).unwrap()
    }

    #[test]
    fn bistochastic() {
        let y =
            AchievementMatrix::new(vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![9.0, 9.0]]).unwrap();
        let s = statuses(&[true, true, false]);
        let id = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_eq!(apply_bistochastic_average(&y, &id, &s).unwrap(), y);

        let l = 0.3;
        let b = vec![
            vec![1.0 - l, l, 0.0],
            vec![l, 1.0 - l, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let x = apply_bistochastic_average(&y, &b, &s).unwrap();
        assert!((x.get(0, 0) - (0.7 * 1.0 + 0.3 * 3.0)).abs() < 1e-15);
        assert!((x.get(1, 1) - (0.3 * 2.0 + 0.7 * 6.0)).abs() < 1e-15);
        assert_eq!(x.row(2), y.row(2));

        let two = AchievementMatrix::new(vec![vec![2.0, 4.0], vec![4.0, 8.0]]).unwrap();
        let half = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let x = apply_bistochastic_average(&two, &half, &statuses(&[true, true])).unwrap();
        assert_eq!(x.row(0), &[3.0, 6.0]);
        assert_eq!(x.row(1), &[3.0, 6.0]);

        let leaking = vec![
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.5],
        ];
        assert!(matches!(
            apply_bistochastic_average(&y, &leaking, &s),
            Err(Error::NonPoorRowNotIdentity(3))
        ));
        let bad = vec![
            vec![0.5, 0.0, 0.0],
            vec![0.5, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert!(matches!(
            apply_bistochastic_average(&y, &bad, &s),
            Err(Error::NotBistochastic(_))
        ));
        let neg = vec![
            vec![1.5, -0.5, 0.0],
            vec![-0.5, 1.5, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert!(matches!(
            apply_bistochastic_average(&y, &neg, &s),
            Err(Error::NotBistochastic(_))
        ));
    }

    #[test]
    fn generated_bistochastic_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = statuses(&[true, false, true, true, false]);
        for _ in 0..50 {
            let b = random_bistochastic(&mut rng, 5, &s.poor_indices());
            validate_bistochastic(&b, &s).unwrap();
        }
    }

    #[test]
    fn rearrangements() {
        let y = AchievementMatrix::new(vec![vec![8.0, 9.0], vec![2.0, 3.0]]).unwrap();
        let s = statuses(&[true, true]);
        let (x, dec) = apply_rearrangement(&y, 1, 2, &BTreeSet::new(), &s).unwrap();
        assert_eq!(x, y);
        assert!(!dec);
        let (x, dec) = apply_rearrangement(&y, 1, 2, &BTreeSet::from([1]), &s).unwrap();
        assert_eq!(x.row(0), &[2.0, 9.0]);
        assert_eq!(x.row(1), &[8.0, 3.0]);
        assert!(dec);
        let (x, dec) = apply_rearrangement(&y, 1, 2, &BTreeSet::from([1, 2]), &s).unwrap();
        assert_eq!(x.row(0), y.row(1));
        assert!(!dec);

        let s = statuses(&[true, false]);
        assert!(matches!(
            apply_rearrangement(&y, 1, 2, &BTreeSet::from([1]), &s),
            Err(Error::PersonNotPoor(2))
        ));
        let s = statuses(&[true, true]);
        assert!(matches!(
            apply_rearrangement(&y, 1, 2, &BTreeSet::from([3]), &s),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            apply_rearrangement(&y, 1, 1, &BTreeSet::from([1]), &s),
            Err(Error::SamePerson(1))
        ));
    }

    #[test]
    fn settings_validation() {
        let spec = StructureSpec::Random {
            symmetric: false,
            weighted: true,
        };
        let mut s = GeneratorSettings {
            trials: 0,
            ..Default::default()
        };
        assert!(matches!(
            run_axiom_suite(&spec, 1.0, &s),
            Err(Error::InvalidGeneratorSettings(_))
        ));
        s.trials = 5;
        s.d_range = (1, 3);
        assert!(run_axiom_suite(&spec, 1.0, &s).is_err());
        s.d_range = (2, 3);
        s.n_range = (5, 3);
        assert!(run_axiom_suite(&spec, 1.0, &s).is_err());
    }

    #[test]
    fn identity_baseline_passes() {
        let spec = StructureSpec::Fixed(config(3));
        let settings = GeneratorSettings {
            trials: 200,
            seed: 11,
            ..Default::default()
        };
        for r in run_axiom_suite(&spec, 1.0, &settings).unwrap() {
            assert_eq!(r.violations, 0, "{r:?}");
            assert_eq!(r.status, AxiomStatus::Pass, "{r:?}");
        }
    }

    #[test]
    fn weak_transfer_not_covered_below_one() {
        let spec = StructureSpec::Random {
            symmetric: true,
            weighted: false,
        };
        let settings = GeneratorSettings {
            trials: 10,
            ..Default::default()
        };
        let r = run_axiom(Axiom::WeakTransfer, &spec, 0.5, &settings).unwrap();
        assert_eq!(r.status, AxiomStatus::NotCovered);
        assert_eq!(r.trials, 0);
        let r = run_axiom(Axiom::Monotonicity, &spec, 0.0, &settings).unwrap();
        assert_eq!(r.status, AxiomStatus::NotCovered);
    }

    #[test]
    fn symmetric_weak_transfer_at_alpha_two() {
        let spec = StructureSpec::Random {
            symmetric: true,
            weighted: true,
        };
        let settings = GeneratorSettings {
            trials: 100,
            seed: 3,
            ..Default::default()
        };
        let r = run_axiom(Axiom::WeakTransfer, &spec, 2.0, &settings).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.trials, 100);
    }

    #[test]
    fn reports_are_reproducible() {
        let spec = StructureSpec::Random {
            symmetric: false,
            weighted: true,
        };
        let settings = GeneratorSettings {
            trials: 20,
            seed: 99,
            ..Default::default()
        };
        let a = run_axiom_suite(&spec, 2.0, &settings).unwrap();
        let b = run_axiom_suite(&spec, 2.0, &settings).unwrap();
        assert_eq!(a, b);
    }
}
