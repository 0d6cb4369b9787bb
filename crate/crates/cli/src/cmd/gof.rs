use std::path::PathBuf;

use bpgc_core::{ff_test, fitted_gof, BpgcError, Generator, GofConfig, GofResult};
use clap::Args;
use serde_json::json;

use crate::dataset_io::read_dataset;
use crate::error::{CliError, CliResult};
use crate::report::{RunReport, Sink};

#[derive(Args)]
pub struct GofArgs {
    /// x,y CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Number of label permutations.
    #[arg(long, default_value_t = 999)]
    nperm: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sampler for the fitted-model draws: `exact` or `gibbs`.
    #[arg(long, default_value = "exact", value_parser = super::parse_generator)]
    method: Generator,
    /// Size of the fitted-model sample (default: the data size).
    #[arg(long)]
    nsim: Option<usize>,
    /// Starting point m10 m01 m11 m02 m12 for the fit.
    #[arg(long, num_args = 5, allow_negative_numbers = true,
          value_names = ["M10", "M01", "M11", "M02", "M12"])]
    init: Option<Vec<f64>>,
    /// Debugging aid: skip the fit and test the data against itself.
    #[arg(long)]
    self_compare: bool,
}

fn gof_json(g: &GofResult, method: Generator) -> serde_json::Value {
    json!({
        "d_stat": g.d_stat,
        "raw_stat": g.raw_stat,
        "p_value": g.p_value,
        "n1": g.n1,
        "n2": g.n2,
        "n_perm": g.n_perm,
        "sampler": method.to_string(),
    })
}

pub fn run(args: GofArgs, sink: &Sink) -> CliResult<()> {
    let data = read_dataset(&args.data)?;
    let cfg = GofConfig {
        n_sim: args.nsim,
        n_perm: args.nperm,
        seed: args.seed,
        sampler: args.method,
    };
    let mut report = RunReport::new("gof");
    report.seed = Some(args.seed);

    if args.self_compare {
        let pairs = data.pairs();
        let g = ff_test(&pairs, &pairs, &cfg)?;
        eprintln!("self comparison: d = {}, p = {}", g.d_stat, g.p_value);
        report.results = gof_json(&g, args.method);
        report.results["self_compare"] = json!(true);
        return sink.emit(report, false);
    }

    let mle = super::mle_config(args.init.as_deref())?;
    match fitted_gof(&data, &cfg, &mle) {
        Ok((fit, g)) => {
            eprintln!(
                "fitted {}; FF d = {:.6} (raw {}), p = {:.4} with {} permutations",
                fit.estimates, g.d_stat, g.raw_stat, g.p_value, g.n_perm
            );
            report.estimates = Some((&fit.estimates).into());
            report.results = gof_json(&g, args.method);
            report.results["fit"] = super::fit::fit_json(&fit);
            sink.emit(report, false)
        }
        Err(BpgcError::DidNotConverge(fit)) => {
            report.estimates = Some((&fit.estimates).into());
            report.results = json!({ "fit": super::fit::fit_json(&fit) });
            sink.emit(report, false)?;
            Err(CliError::Incomplete("fit did not converge; test not run".into()))
        }
        Err(e) => Err(e.into()),
    }
}
