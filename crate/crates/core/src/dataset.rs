use crate::density::Observation;
use crate::error::{BpgcError, Result};
use crate::special::ln_factorial;

/// The complete sufficient statistic `(Σx, Σy, Σxy, Σ log y, Σ x log y)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SuffStats {
    pub sum_x: f64,
    pub sum_y: f64,
    pub sum_xy: f64,
    pub sum_log_y: f64,
    pub sum_x_log_y: f64,
}

impl SuffStats {
    /// Accumulates in observation order.
    pub fn from_observations(obs: &[Observation]) -> Self {
        let mut s = Self::default();
        for o in obs {
            let x = o.x() as f64;
            let y = o.y();
            let ln_y = y.ln();
            s.sum_x += x;
            s.sum_y += y;
            s.sum_xy += x * y;
            s.sum_log_y += ln_y;
            s.sum_x_log_y += x * ln_y;
        }
        s
    }

    pub fn to_array(&self) -> [f64; 5] {
        [
            self.sum_x,
            self.sum_y,
            self.sum_xy,
            self.sum_log_y,
            self.sum_x_log_y,
        ]
    }
}

/// Paired observations with cached sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    stats: SuffStats,
    /// `Σ log(x_i!) + Σ log y_i`, the parameter-free part of the likelihood.
    base_measure: f64,
}

impl Dataset {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(BpgcError::EmptyDataset);
        }
        let stats = SuffStats::from_observations(&observations);
        let base_measure = observations
            .iter()
            .map(|o| ln_factorial(o.x() as f64) + o.y().ln())
            .sum();
        Ok(Self {
            observations,
            stats,
            base_measure,
        })
    }

    /// Validates raw `(x, y)` pairs.
    pub fn from_pairs(pairs: &[(u64, f64)]) -> Result<Self> {
        let obs = pairs
            .iter()
            .map(|&(x, y)| Observation::new(x, y))
            .collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn suffstats(&self) -> &SuffStats {
        &self.stats
    }

    pub fn base_measure(&self) -> f64 {
        self.base_measure
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.observations
            .iter()
            .map(|o| (o.x() as f64, o.y()))
            .collect()
    }
}
