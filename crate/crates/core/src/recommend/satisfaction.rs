//! Consumer satisfaction with a recommended provider.
//!
//! Raw QoS values are min-max normalized over a reference cohort into
//! higher-is-better scores `n̂`. The consumer's expectation for a metric is its
//! weight `w` in that normalized space, so a metric scores `w (n̂ - w)`:
//! zero when the expectation is met exactly, positive when exceeded.

use serde::{Deserialize, Serialize};

use crate::domain::{QosVector, QosWeights};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Satisfaction {
    /// In metric order dt, ec, c, et.
    pub per_metric: [f64; 4],
    pub overall: f64,
}

impl Satisfaction {
    fn from_normalized(normalized: [f64; 4], weights: &QosWeights) -> Self {
        let w = weights.as_array();
        let per_metric: [f64; 4] = std::array::from_fn(|i| w[i] * (normalized[i] - w[i]));
        Self { per_metric, overall: per_metric.iter().sum::<f64>() / 4.0 }
    }
}

/// Per-metric minimum and maximum over a reference cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortRange {
    pub min: [f64; 4],
    pub max: [f64; 4],
}

impl CohortRange {
    pub fn new(cohort: &[QosVector]) -> Result<Self> {
        if cohort.is_empty() {
            return Err(Error::InvalidInput("satisfaction needs a non-empty cohort".into()));
        }
        let mut min = [f64::INFINITY; 4];
        let mut max = [f64::NEG_INFINITY; 4];
        for q in cohort {
            for (i, v) in q.as_array().into_iter().enumerate() {
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        Ok(Self { min, max })
    }

    /// Higher-is-better normalized value of each metric; 1 without spread.
    pub fn normalize(&self, pqos: &QosVector) -> [f64; 4] {
        let raw = pqos.as_array();
        std::array::from_fn(|i| {
            let span = self.max[i] - self.min[i];
            if span > 0.0 {
                (self.max[i] - raw[i]) / span
            } else {
                1.0
            }
        })
    }
}

pub fn satisfaction_in_range(pqos: &QosVector, range: &CohortRange, weights: &QosWeights) -> Satisfaction {
    Satisfaction::from_normalized(range.normalize(pqos), weights)
}

/// Satisfaction with `pqos` judged against `cohort`.
pub fn satisfaction(pqos: &QosVector, cohort: &[QosVector], weights: &QosWeights) -> Result<Satisfaction> {
    Ok(satisfaction_in_range(pqos, &CohortRange::new(cohort)?, weights))
}

/// Satisfaction when nothing is delivered: every metric at the worst end of
/// the range.
pub fn floor_satisfaction(weights: &QosWeights) -> Satisfaction {
    Satisfaction::from_normalized([0.0; 4], weights)
}

/// Expected raw value of a lower-is-better metric: `(max - min) w + min`.
pub fn expected_qos_raw(min: f64, max: f64, weight: f64) -> f64 {
    (max - min) * weight + min
}
