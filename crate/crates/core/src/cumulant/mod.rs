//! Moment–cumulant algebra in exact arithmetic, and cumulant estimation.

mod bell;
mod kstat;
mod partitions;

use serde::{Deserialize, Serialize};

pub use bell::{
    cumulants_from_moments, cumulants_from_moments_by_bell, cumulants_from_moments_by_partitions,
    cumulants_from_moments_recursive, moments_from_cumulants, moments_from_cumulants_recursive, partial_bell,
    touchard_moment, Scalar, ORDER_GUARD, PARTITION_SUM_LIMIT,
};
pub use kstat::{k_statistics, k_statistics_with_errors, MAX_ORDER as K_STATISTIC_MAX_ORDER};
pub use partitions::{
    bell, block_sizes, factorial_big, factorial_inequalities, factorial_u128, stirling2, SetPartitions,
    FACTORIAL_GUARD, STIRLING_GUARD,
};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    KStatistic,
}

/// Cumulants `c_1..c_K`, optionally with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantVector {
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_errors: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl CumulantVector {
    pub fn exact(values: Vec<f64>) -> Self {
        CumulantVector { values, std_errors: None, provenance: Provenance::Exact }
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn moments(&self) -> Result<Vec<f64>> {
        moments_from_cumulants(&self.values)
    }

    pub fn from_moments(m: &[f64]) -> Result<Self> {
        Ok(CumulantVector::exact(cumulants_from_moments(m)?))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cumulant vector serializes")
    }
}
