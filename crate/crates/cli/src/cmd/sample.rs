use std::path::PathBuf;

use bpgc_core::{exact_sample, gibbs_sample, Generator, GibbsConfig};
use clap::Args;
use serde_json::json;

use crate::dataset_io::{write_observations, write_to};
use crate::error::{CliError, CliResult};
use crate::report::{RunReport, Sink};

#[derive(Args)]
pub struct SampleArgs {
    /// Parameters m10 m01 m11 m02 m12.
    #[arg(long, num_args = 5, required = true, allow_negative_numbers = true,
          value_names = ["M10", "M01", "M11", "M02", "M12"])]
    params: Vec<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `exact` (marginal then conditional) or `gibbs`.
    #[arg(long, default_value = "exact", value_parser = super::parse_generator)]
    method: Generator,
    #[arg(long, default_value_t = GibbsConfig::DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, default_value_t = GibbsConfig::DEFAULT_THIN)]
    thin: usize,
    /// Starting value of y for the Gibbs chain.
    #[arg(long, default_value_t = 1.0)]
    init_y: f64,
    /// CSV destination (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: SampleArgs, sink: &Sink) -> CliResult<()> {
    let params = super::params_from(&args.params)?;
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let batch = match args.method {
        Generator::Exact => exact_sample(&params, args.n, args.seed)?,
        Generator::Gibbs => gibbs_sample(
            &params,
            &GibbsConfig {
                n: args.n,
                burn_in: args.burn_in,
                thin: args.thin,
                seed: args.seed,
                init_y: args.init_y,
            },
        )?,
    };
    write_to(args.out.as_deref(), |w| write_observations(w, &batch.draws))?;

    let n = batch.draws.len() as f64;
    let mean_x = batch.draws.iter().map(|o| o.x() as f64).sum::<f64>() / n;
    let mean_y = batch.draws.iter().map(|o| o.y()).sum::<f64>() / n;
    eprintln!("{} draws ({}), mean x {mean_x:.4}, mean y {mean_y:.4}", args.n, args.method);

    let mut report = RunReport::new("sample");
    report.seed = Some(args.seed);
    report.params = Some((&params).into());
    report.results = json!({
        "n": args.n,
        "method": args.method.to_string(),
        "gibbs": batch.gibbs.map(|g| json!({
            "burn_in": g.burn_in,
            "thin": g.thin,
            "init_y": g.init_y,
        })),
        "mean_x": mean_x,
        "mean_y": mean_y,
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    });
    sink.emit(report, args.out.is_none())
}
