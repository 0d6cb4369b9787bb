use std::fs;
use std::path::{Path, PathBuf};

use bpgc_core::{
    fit_mle, ff_test, sample::sample, BpgcError, Dataset, Generator, GofConfig, Params, PARAM_NAMES,
    SIMULATION_CASES,
};
use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use crate::dataset_io::write_to;
use crate::error::{CliError, CliResult};
use crate::report::{ParamValues, RunReport, Sink};
use crate::stats::mean_sd;

/// Share of replicates that must succeed for exit status 0.
const MIN_SUCCESS_RATE: f64 = 0.9;

#[derive(Args)]
#[command(group = clap::ArgGroup::new("truth").required(true).args(["case", "params"]))]
pub struct SimstudyArgs {
    /// Built-in parameter set 1-4.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    case: Option<u8>,
    /// True parameters m10 m01 m11 m02 m12.
    #[arg(long, num_args = 5, allow_negative_numbers = true,
          value_names = ["M10", "M01", "M11", "M02", "M12"])]
    params: Option<Vec<f64>>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sampler for both the truth and fitted-model samples.
    #[arg(long, default_value = "exact", value_parser = super::parse_generator)]
    method: Generator,
    /// Permutations per goodness-of-fit test.
    #[arg(long, default_value_t = 999)]
    nperm: usize,
    /// Largest per-sample size used in the goodness-of-fit test.
    #[arg(long, default_value_t = 1000)]
    gof_max: usize,
    /// Output directory for table1.csv, table2.csv and replicates.csv.
    #[arg(long)]
    out: PathBuf,
}

struct Replicate {
    size_idx: usize,
    index: usize,
    seed: u64,
    status: String,
    estimates: Option<[f64; 5]>,
    loglik: f64,
    gof: Option<(f64, u64, f64)>,
}

impl Replicate {
    fn ok(&self) -> bool {
        self.status == "ok"
    }
}

fn run_replicate(truth: &Params, args: &SimstudyArgs, size_idx: usize, index: usize) -> Replicate {
    let n = args.sizes[size_idx];
    // two streams per replicate: data, then fitted-model draws
    let job = (size_idx * args.replicates + index) as u64;
    let seed = args.seed.wrapping_add(2 * job);
    let mut rep = Replicate {
        size_idx,
        index,
        seed,
        status: String::new(),
        estimates: None,
        loglik: f64::NAN,
        gof: None,
    };
    let outcome = (|| -> Result<(), BpgcError> {
        let truth_draws = sample(truth, args.method, n, seed)?;
        let data = Dataset::new(truth_draws.draws.clone())?;
        let fit = match fit_mle(&data, &super::mle_config(None).expect("default config")) {
            Ok(f) => f,
            Err(BpgcError::DidNotConverge(f)) => {
                rep.estimates = Some(f.estimates.to_array());
                rep.loglik = f.loglik;
                return Err(BpgcError::DidNotConverge(f));
            }
            Err(e) => return Err(e),
        };
        rep.estimates = Some(fit.estimates.to_array());
        rep.loglik = fit.loglik;
        let m = n.min(args.gof_max);
        let fitted = sample(&fit.estimates, args.method, m, args.seed.wrapping_add(2 * job + 1))?;
        let truth_pairs = truth_draws.pairs();
        let g = ff_test(&fitted.pairs(), &truth_pairs[..m], &GofConfig {
            n_perm: args.nperm,
            ..GofConfig::new(seed)
        })?;
        rep.gof = Some((g.d_stat, g.raw_stat, g.p_value));
        Ok(())
    })();
    rep.status = match outcome {
        Ok(()) => "ok".into(),
        Err(BpgcError::DidNotConverge(_)) => "did_not_converge".into(),
        Err(e) => format!("error: {e}"),
    };
    rep
}

fn fmt_row(values: impl IntoIterator<Item = String>) -> Vec<String> {
    values.into_iter().collect()
}

fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

pub fn run(args: SimstudyArgs, sink: &Sink) -> CliResult<()> {
    let truth = match (&args.params, args.case) {
        (Some(p), _) => super::params_from(p)?,
        (None, Some(k)) => Params::from_array(SIMULATION_CASES[k as usize - 1])?,
        (None, None) => unreachable!("clap enforces one of --case/--params"),
    };
    if args.sizes.is_empty() || args.sizes.iter().any(|n| *n < bpgc_core::fit::MIN_OBSERVATIONS) {
        return Err(CliError::Usage(format!(
            "--sizes must list sizes of at least {}",
            bpgc_core::fit::MIN_OBSERVATIONS
        )));
    }
    if args.replicates == 0 {
        return Err(CliError::Usage("--replicates must be at least 1".into()));
    }
    if args.nperm < GofConfig::MIN_PERMUTATIONS {
        return Err(CliError::Usage(format!(
            "--nperm must be at least {}",
            GofConfig::MIN_PERMUTATIONS
        )));
    }
    if args.gof_max < 2 {
        return Err(CliError::Usage("--gof-max must be at least 2".into()));
    }
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    let jobs: Vec<(usize, usize)> = (0..args.sizes.len())
        .flat_map(|s| (0..args.replicates).map(move |r| (s, r)))
        .collect();
    let reps: Vec<Replicate> = jobs
        .par_iter()
        .map(|&(s, r)| run_replicate(&truth, &args, s, r))
        .collect();

    let t = truth.to_array();
    let mut table1 = vec![fmt_row(
        ["n", "replicates", "succeeded"]
            .iter()
            .map(|s| s.to_string())
            .chain(PARAM_NAMES.iter().map(|p| format!("mean_{p}")))
            .chain(PARAM_NAMES.iter().map(|p| format!("sd_{p}")))
            .chain(PARAM_NAMES.iter().map(|p| format!("mae_{p}"))),
    )];
    let mut table2 = vec![fmt_row(
        ["n", "gof_n", "tests", "mean_d_stat", "mean_raw_stat", "mean_p_value", "min_p_value", "share_p_above_0.05"]
            .map(String::from),
    )];
    let mut per_size = Vec::new();
    let mut maes = Vec::new();
    for (k, &n) in args.sizes.iter().enumerate() {
        let good: Vec<&Replicate> = reps.iter().filter(|r| r.size_idx == k && r.ok()).collect();
        let mut means = [f64::NAN; 5];
        let mut sds = [f64::NAN; 5];
        let mut mae = [f64::NAN; 5];
        if !good.is_empty() {
            for j in 0..5 {
                let v: Vec<f64> = good.iter().map(|r| r.estimates.unwrap()[j]).collect();
                (means[j], sds[j]) = mean_sd(&v);
                mae[j] = v.iter().map(|e| (e - t[j]).abs()).sum::<f64>() / v.len() as f64;
            }
        }
        table1.push(fmt_row(
            [n.to_string(), args.replicates.to_string(), good.len().to_string()]
                .into_iter()
                .chain(means.iter().chain(&sds).chain(&mae).map(|v| num(*v))),
        ));
        let gofs: Vec<(f64, u64, f64)> = good.iter().filter_map(|r| r.gof).collect();
        let cnt = gofs.len() as f64;
        let (mean_d, mean_raw, mean_p, min_p, share) = if gofs.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        } else {
            (
                gofs.iter().map(|g| g.0).sum::<f64>() / cnt,
                gofs.iter().map(|g| g.1 as f64).sum::<f64>() / cnt,
                gofs.iter().map(|g| g.2).sum::<f64>() / cnt,
                gofs.iter().map(|g| g.2).fold(f64::INFINITY, f64::min),
                gofs.iter().filter(|g| g.2 > 0.05).count() as f64 / cnt,
            )
        };
        table2.push(fmt_row([
            n.to_string(),
            n.min(args.gof_max).to_string(),
            gofs.len().to_string(),
            num(mean_d),
            num(mean_raw),
            num(mean_p),
            num(min_p),
            num(share),
        ]));
        eprintln!(
            "n = {n:>6}: {}/{} ok, mean {:?}, MAE {:?}, mean p {:.3}",
            good.len(),
            args.replicates,
            means.map(|v| (v * 1e4).round() / 1e4),
            mae.map(|v| (v * 1e4).round() / 1e4),
            mean_p
        );
        per_size.push(json!({
            "n": n,
            "succeeded": good.len(),
            "mean": ParamValues::from(means),
            "sd": ParamValues::from(sds),
            "mae": ParamValues::from(mae),
            "gof": { "tests": gofs.len(), "mean_p_value": mean_p, "min_p_value": min_p, "share_p_above_0_05": share },
        }));
        maes.push(mae);
    }

    let mut rows = vec![fmt_row(
        ["n", "replicate", "seed", "status"]
            .iter()
            .map(|s| s.to_string())
            .chain(PARAM_NAMES.iter().map(|p| p.to_string()))
            .chain(["loglik", "d_stat", "raw_stat", "p_value"].iter().map(|s| s.to_string())),
    )];
    for r in &reps {
        let est = r.estimates.unwrap_or([f64::NAN; 5]);
        let (d, raw, p) = r.gof.map_or((String::new(), String::new(), String::new()), |g| {
            (num(g.0), g.1.to_string(), num(g.2))
        });
        rows.push(fmt_row(
            [
                args.sizes[r.size_idx].to_string(),
                r.index.to_string(),
                r.seed.to_string(),
                r.status.clone(),
            ]
            .into_iter()
            .chain(est.iter().map(|v| num(*v)))
            .chain([num(r.loglik), d, raw, p]),
        ));
    }
    let table1_path = args.out.join("table1.csv");
    let table2_path = args.out.join("table2.csv");
    let reps_path = args.out.join("replicates.csv");
    write_lines(&table1_path, &table1)?;
    write_lines(&table2_path, &table2)?;
    write_lines(&reps_path, &rows)?;

    let trend = (args.sizes.len() >= 2).then(|| {
        let dec: Vec<bool> = (0..5)
            .map(|j| maes.windows(2).all(|w| w[1][j] < w[0][j]))
            .collect();
        json!(PARAM_NAMES.iter().zip(dec).map(|(p, d)| (p.to_string(), json!(d))).collect::<serde_json::Map<_, _>>())
    });
    let succeeded = reps.iter().filter(|r| r.ok()).count();
    let rate = succeeded as f64 / reps.len() as f64;

    let mut report = RunReport::new("simstudy");
    report.seed = Some(args.seed);
    report.params = Some((&truth).into());
    report.results = json!({
        "case": args.case,
        "sizes": args.sizes,
        "replicates": args.replicates,
        "method": args.method.to_string(),
        "n_perm": args.nperm,
        "gof_max": args.gof_max,
        "succeeded": succeeded,
        "success_rate": rate,
        "per_size": per_size,
        "mae_decreasing": trend,
        "failures": reps.iter().filter(|r| !r.ok()).map(|r| json!({
            "n": args.sizes[r.size_idx], "replicate": r.index, "status": r.status,
        })).collect::<Vec<_>>(),
        "tables": {
            "table1": table1_path.display().to_string(),
            "table2": table2_path.display().to_string(),
            "replicates": reps_path.display().to_string(),
        },
    });
    sink.emit(report, false)?;
    if rate >= MIN_SUCCESS_RATE {
        Ok(())
    } else {
        Err(CliError::Incomplete(format!(
            "only {succeeded} of {} replicates succeeded",
            reps.len()
        )))
    }
}

fn write_lines(path: &Path, rows: &[Vec<String>]) -> CliResult<()> {
    write_to(Some(path), |w| {
        let mut out = csv::Writer::from_writer(w);
        for r in rows {
            out.write_record(r)?;
        }
        out.flush()
    })
}
