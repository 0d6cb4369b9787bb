//! Random generation: the two-block Gibbs sampler and an exact
//! marginal-then-conditional sampler.

mod rng;
mod variates;

pub use rng::UniformStream;
pub use variates::{gamma_variate, poisson_variate};

use std::fmt;
use std::str::FromStr;

use crate::density::{CountMarginal, Observation, MIN_POSITIVE_Y};
use crate::error::{BpgcError, Result};
use crate::params::Params;

/// Which generator produced a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Generator {
    Gibbs,
    #[default]
    Exact,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Gibbs => "gibbs",
            Generator::Exact => "exact",
        })
    }
}

impl FromStr for Generator {
    type Err = BpgcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gibbs" => Ok(Generator::Gibbs),
            "exact" => Ok(Generator::Exact),
            other => Err(BpgcError::InvalidConfig(format!(
                "unknown sampler '{other}' (expected gibbs or exact)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsConfig {
    pub n: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub init_y: f64,
}

impl GibbsConfig {
    pub const DEFAULT_BURN_IN: usize = 1000;
    pub const DEFAULT_THIN: usize = 5;

    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            burn_in: Self::DEFAULT_BURN_IN,
            thin: Self::DEFAULT_THIN,
            seed,
            init_y: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(BpgcError::InvalidConfig("sample size must be at least 1".into()));
        }
        if self.thin == 0 {
            return Err(BpgcError::InvalidConfig("thinning interval must be at least 1".into()));
        }
        if !(self.init_y.is_finite() && self.init_y > 0.0) {
            return Err(BpgcError::InvalidConfig(format!(
                "initial y {} must be positive",
                self.init_y
            )));
        }
        Ok(())
    }
}

/// Draws plus the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub draws: Vec<Observation>,
    pub generator: Generator,
    pub seed: u64,
    /// Chain settings; `None` for exact draws.
    pub gibbs: Option<GibbsConfig>,
}

impl SampleBatch {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.draws.iter().map(|o| (o.x() as f64, o.y())).collect()
    }
}

#[inline]
fn gamma_conditional_draw(params: &Params, x: u64, stream: &mut UniformStream) -> Result<f64> {
    let xf = x as f64;
    let y = gamma_variate(params.shape_at(xf), params.rate_at(xf), stream)?;
    Ok(y.max(MIN_POSITIVE_Y))
}

/// Alternates `X | Y = y ~ Poisson(λ(y))` and
/// `Y | X = x ~ Gamma(m02 + m12 x, rate m01 + m11 x)` starting from
/// `y = init_y`; after `burn_in` sweeps every `thin`-th state is kept.
pub fn gibbs_sample(params: &Params, cfg: &GibbsConfig) -> Result<SampleBatch> {
    cfg.validate()?;
    let mut stream = UniformStream::new(cfg.seed);
    let mut draws = Vec::with_capacity(cfg.n);
    let mut y = cfg.init_y;
    let mut sweep = 0usize;
    while draws.len() < cfg.n {
        sweep += 1;
        let x = poisson_variate(params.log_lambda(y).exp(), &mut stream)?;
        y = gamma_conditional_draw(params, x, &mut stream)?;
        if sweep > cfg.burn_in && (sweep - cfg.burn_in).is_multiple_of(cfg.thin) {
            draws.push(Observation::new(x, y)?);
        }
    }
    Ok(SampleBatch {
        draws,
        generator: Generator::Gibbs,
        seed: cfg.seed,
        gibbs: Some(*cfg),
    })
}

/// i.i.d. draws: `x` by inversion of the count marginal, then `y` from its
/// Gamma conditional.
pub fn exact_sample(params: &Params, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(BpgcError::InvalidConfig("sample size must be at least 1".into()));
    }
    let table = CountMarginal::new(params, 1e-15)?;
    let mut stream = UniformStream::new(seed);
    let draws = (0..n)
        .map(|_| {
            let x = table.quantile(stream.next_open01());
            let y = gamma_conditional_draw(params, x, &mut stream)?;
            Observation::new(x, y)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        draws,
        generator: Generator::Exact,
        seed,
        gibbs: None,
    })
}

/// Draws `n` points with the chosen generator (Gibbs with default chain
/// settings).
pub fn sample(params: &Params, generator: Generator, n: usize, seed: u64) -> Result<SampleBatch> {
    match generator {
        Generator::Gibbs => gibbs_sample(params, &GibbsConfig::new(n, seed)),
        Generator::Exact => exact_sample(params, n, seed),
    }
}
