pub mod eval;
pub mod fit;
pub mod gof;
pub mod histogram;
pub mod make_dataset;
pub mod sample;
pub mod simstudy;

use bpgc_core::fit::StartStrategy;
use bpgc_core::{Generator, MleConfig, Params};

use crate::error::{CliError, CliResult};

pub fn params_from(values: &[f64]) -> CliResult<Params> {
    Ok(Params::from_slice(values)?)
}

pub fn parse_generator(s: &str) -> Result<Generator, String> {
    s.parse().map_err(|e: bpgc_core::BpgcError| e.to_string())
}

/// Fixed start at `init` when given, otherwise the moment-based start.
pub fn mle_config(init: Option<&[f64]>) -> CliResult<MleConfig> {
    match init {
        Some(v) => {
            let init: [f64; 5] = v
                .try_into()
                .map_err(|_| CliError::Usage("--init takes exactly 5 values".into()))?;
            Params::from_array(init)?;
            Ok(MleConfig {
                init,
                start: StartStrategy::Fixed,
                ..MleConfig::default()
            })
        }
        None => Ok(MleConfig {
            start: StartStrategy::Moments,
            ..MleConfig::default()
        }),
    }
}
