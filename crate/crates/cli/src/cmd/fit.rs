use std::path::PathBuf;

use bpgc_core::{fit_mle, BpgcError, MleResult, StartStrategy};
use clap::Args;
use serde_json::{json, Value};

use crate::dataset_io::read_dataset;
use crate::error::{CliError, CliResult};
use crate::report::{ParamValues, RunReport, Sink};

#[derive(Args)]
pub struct FitArgs {
    /// x,y CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Starting point m10 m01 m11 m02 m12 (default: moment-based).
    #[arg(long, num_args = 5, allow_negative_numbers = true,
          value_names = ["M10", "M01", "M11", "M02", "M12"])]
    init: Option<Vec<f64>>,
}

pub fn fit_json(r: &MleResult) -> Value {
    let boundary = (!r.clamped.is_empty()).then(|| {
        format!(
            "optimum on the boundary ({} = 0); standard errors withheld",
            r.clamped.join(", ")
        )
    });
    json!({
        "n": r.n,
        "loglik": r.loglik,
        "converged": r.converged,
        "grad_norm": r.grad_norm,
        "clamped": r.clamped,
        "std_errors": r.std_errors.map(ParamValues::from),
        "boundary_notice": boundary,
        "trace": r.trace.iter().map(|s| json!({
            "mu": s.mu,
            "loglik": s.loglik,
            "grad_norm": s.grad_norm,
            "inner_iters": s.inner_iters,
            "inner_converged": s.inner_converged,
        })).collect::<Vec<_>>(),
    })
}

pub fn run(args: FitArgs, sink: &Sink) -> CliResult<()> {
    let data = read_dataset(&args.data)?;
    let cfg = super::mle_config(args.init.as_deref())?;
    let (result, failure) = match fit_mle(&data, &cfg) {
        Ok(r) => (r, None),
        Err(BpgcError::DidNotConverge(r)) => {
            let msg = format!("fit did not converge (gradient norm {:.3e})", r.grad_norm);
            (*r, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    eprintln!(
        "n = {}, estimates {}, loglik {:.6}{}",
        result.n,
        result.estimates,
        result.loglik,
        if result.converged { "" } else { " (NOT converged)" }
    );
    let mut report = RunReport::new("fit");
    report.estimates = Some((&result.estimates).into());
    report.results = fit_json(&result);
    if let Value::Object(m) = &mut report.results {
        m.insert("data".into(), json!(args.data.display().to_string()));
        let fixed = cfg.start == StartStrategy::Fixed;
        m.insert("start".into(), json!(if fixed { "fixed" } else { "moments" }));
        m.insert("init".into(), json!(fixed.then(|| ParamValues::from(cfg.init))));
    }
    sink.emit(report, false)?;
    match failure {
        Some(msg) => Err(CliError::Incomplete(msg)),
        None => Ok(()),
    }
}
