//! The five-parameter vector `m = (m10, m01, m11, m02, m12)`.
//!
//! `m10` is the log-rate intercept of the Poisson conditional, `m01` and `m02`
//! are the base rate and shape of the Gamma conditional, and `m11`, `m12`
//! couple the two variates.

use std::fmt;

use crate::error::{BpgcError, Result};

/// Parameter names in canonical order.
pub const PARAM_NAMES: [&str; 5] = ["m10", "m01", "m11", "m02", "m12"];

/// A validated parameter vector. The normalizing series is guaranteed to
/// converge for every value of this type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub(crate) m10: f64,
    pub(crate) m01: f64,
    pub(crate) m11: f64,
    pub(crate) m02: f64,
    pub(crate) m12: f64,
}

impl Params {
    /// Validates sign constraints and the series-convergence condition.
    ///
    /// The check order is fixed (finiteness, then `m10`, `m01`, `m02`
    /// positivity, then `m11`, `m12` non-negativity, then convergence), so
    /// the returned error names the first violated constraint.
    pub fn new(m10: f64, m01: f64, m11: f64, m02: f64, m12: f64) -> Result<Self> {
        let raw = [m10, m01, m11, m02, m12];
        for (name, v) in PARAM_NAMES.iter().zip(raw) {
            if !v.is_finite() {
                return Err(BpgcError::NonFiniteParameter(name));
            }
        }
        for (name, v) in [("m10", m10), ("m01", m01), ("m02", m02)] {
            if v <= 0.0 {
                return Err(BpgcError::NonPositiveParameter(name));
            }
        }
        for (name, v) in [("m11", m11), ("m12", m12)] {
            if v < 0.0 {
                return Err(BpgcError::NegativeInteraction(name));
            }
        }
        let converges = m11 > 0.0 || m12 < 1.0 || (m12 == 1.0 && m10 < m01.ln());
        if !converges {
            return Err(BpgcError::DivergentSeries);
        }
        Ok(Self { m10, m01, m11, m02, m12 })
    }

    /// Builds from an array in canonical order.
    pub fn from_array(raw: [f64; 5]) -> Result<Self> {
        Self::new(raw[0], raw[1], raw[2], raw[3], raw[4])
    }

    pub fn from_slice(raw: &[f64]) -> Result<Self> {
        let arr: [f64; 5] = raw.try_into().map_err(|_| {
            BpgcError::InvalidConfig(format!("expected 5 parameters, got {}", raw.len()))
        })?;
        Self::from_array(arr)
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.m10, self.m01, self.m11, self.m02, self.m12]
    }

    pub fn m10(&self) -> f64 {
        self.m10
    }
    pub fn m01(&self) -> f64 {
        self.m01
    }
    pub fn m11(&self) -> f64 {
        self.m11
    }
    pub fn m02(&self) -> f64 {
        self.m02
    }
    pub fn m12(&self) -> f64 {
        self.m12
    }

    /// `m11 = m12 = 0`: the two variates are independent.
    pub fn is_independent(&self) -> bool {
        self.m11 == 0.0 && self.m12 == 0.0
    }

    /// `m11 = 0, m12 = 1`: the compound Poisson special case.
    pub fn is_compound_poisson(&self) -> bool {
        self.m11 == 0.0 && self.m12 == 1.0
    }

    /// Shape of the Gamma conditional `Y | X = x`.
    #[inline]
    pub(crate) fn shape_at(&self, x: f64) -> f64 {
        self.m02 + self.m12 * x
    }

    /// Rate of the Gamma conditional `Y | X = x`.
    #[inline]
    pub(crate) fn rate_at(&self, x: f64) -> f64 {
        self.m01 + self.m11 * x
    }

    /// Log of the Poisson mean of `X | Y = y`.
    #[inline]
    pub(crate) fn log_lambda(&self, y: f64) -> f64 {
        self.m10 - self.m11 * y + self.m12 * y.ln()
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(m10={}, m01={}, m11={}, m02={}, m12={})",
            self.m10, self.m01, self.m11, self.m02, self.m12
        )
    }
}

/// The four parameter sets of the reference simulation study, in order.
pub const SIMULATION_CASES: [[f64; 5]; 4] = [
    [1.0, 1.0, 0.1, 1.0, 0.1],
    [1.0, 1.0, 1.0, 1.0, 1.0],
    [1.0, 5.0, 1.0, 5.0, 1.0],
    [5.0, 5.0, 5.0, 5.0, 5.0],
];

/// Estimates reported for the hospital admissions/cost data; used as the
/// generating model for the synthetic analogue dataset.
pub const HOSPITAL_ESTIMATES: [f64; 5] = [2.1809, 0.1880, 0.0018, 2.4806, 0.0535];
