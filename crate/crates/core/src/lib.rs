//! Network-adjusted multidimensional poverty measurement.
//!
//! Deprivation gaps are coupled through a dependence structure `M` between
//! dimensions, persons are identified as poor with a dual cutoff on their
//! deprivation count, and the censored scores are aggregated into an FGT-type
//! index whose denominator grows with the structure so that it stays in
//! `[0, 1]`. The [`axioms`] module turns the axiomatic properties of the index
//! into randomized executable checks.

pub mod aggregation;
pub mod axioms;
pub mod bounds;
pub mod deprivation;
pub mod error;
pub mod identification;
pub mod io;
pub mod model;
pub mod weights;

pub use aggregation::{fgt_naive, fgt_network_adjusted, FgtResult};
pub use error::{Error, Result};
pub use model::{
    AchievementMatrix, CutoffVector, DependenceStructure, MethodologyConfig, WeightVector,
};
