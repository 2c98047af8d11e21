//! Dual-cutoff identification: person `i` is poor iff D_i >= k.

use crate::deprivation::DeprivationCounts;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PovertyStatusVector {
    statuses: Vec<bool>,
    pub k: f64,
}

impl PovertyStatusVector {
    pub fn is_poor(&self, i: usize) -> bool {
        self.statuses[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.statuses
    }

    pub fn len(&self) -> usize {
        self.statuses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statuses.is_empty()
    }

    pub fn poor_count(&self) -> usize {
        self.statuses.iter().filter(|&&p| p).count()
    }

    /// 0-based indices of the poor, ascending.
    pub fn poor_indices(&self) -> Vec<usize> {
        self.statuses
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| i)
            .collect()
    }

    /// 0/1 encoding.
    pub fn as_bits(&self) -> Vec<u8> {
        self.statuses.iter().map(|&p| u8::from(p)).collect()
    }
}

/// Flag everyone whose count reaches `k`. `max` is the upper end of the valid
/// range for `k` (the score ceiling of the configuration).
pub fn identify(counts: &DeprivationCounts, k: f64, max: f64) -> Result<PovertyStatusVector> {
    if !(k > 0.0 && k <= max) {
        return Err(Error::CutoffOutOfRange { k, max });
    }
    Ok(PovertyStatusVector {
        statuses: counts.as_slice().iter().map(|&c| c >= k).collect(),
        k,
    })
}

/// Share of the population identified as poor.
pub fn headcount_ratio(statuses: &PovertyStatusVector) -> f64 {
    if statuses.is_empty() {
        return 0.0;
    }
    statuses.poor_count() as f64 / statuses.len() as f64
}
