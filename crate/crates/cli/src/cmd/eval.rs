use std::path::PathBuf;

use bpgc_core::{
    conditional_gamma, conditional_poisson_mean, log_normalizer, log_pdf, log_pdf_y, log_pmf_x,
    LogNormalizer, Observation, Params,
};
use bpgc_core::quad::integrate;
use clap::Args;
use serde_json::json;

use crate::dataset_io::write_to;
use crate::error::{CliError, CliResult};
use crate::report::{RunReport, Sink};

#[derive(Args)]
pub struct EvalArgs {
    /// Parameters m10 m01 m11 m02 m12.
    #[arg(long, num_args = 5, required = true, allow_negative_numbers = true,
          value_names = ["M10", "M01", "M11", "M02", "M12"])]
    params: Vec<f64>,
    #[arg(long, requires = "y", conflicts_with = "grid")]
    x: Option<u64>,
    #[arg(long, requires = "x", allow_negative_numbers = true)]
    y: Option<f64>,
    /// Grid such as `x=0..15,y=0.1..10:100` (x inclusive, 100 y points
    /// from 0.1 to 10 inclusive).
    #[arg(long)]
    grid: Option<String>,
    /// Relative tolerance of the normalizing series.
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,
    /// Grid CSV destination (standard output if omitted).
    #[arg(long, requires = "grid")]
    out: Option<PathBuf>,
}

#[derive(Debug, PartialEq)]
struct Grid {
    x_lo: u64,
    x_hi: u64,
    y_lo: f64,
    y_hi: f64,
    y_count: usize,
}

impl Grid {
    fn ys(&self) -> Vec<f64> {
        let step = (self.y_hi - self.y_lo) / (self.y_count - 1) as f64;
        (0..self.y_count).map(|i| self.y_lo + i as f64 * step).collect()
    }
}

fn parse_grid(spec: &str) -> Result<Grid, String> {
    let mut x = None;
    let mut y = None;
    for part in spec.split(',') {
        let (name, range) = part
            .split_once('=')
            .ok_or_else(|| format!("grid part \"{part}\" is not of the form name=range"))?;
        let (lo, rest) = range
            .split_once("..")
            .ok_or_else(|| format!("grid range \"{range}\" lacks \"..\""))?;
        match name.trim() {
            "x" => {
                let lo: u64 = lo.trim().parse().map_err(|_| format!("bad x start \"{lo}\""))?;
                let hi: u64 = rest.trim().parse().map_err(|_| format!("bad x end \"{rest}\""))?;
                if hi < lo {
                    return Err("x range is empty".into());
                }
                x = Some((lo, hi));
            }
            "y" => {
                let (hi, count) = rest
                    .split_once(':')
                    .ok_or_else(|| "y range needs a point count, e.g. y=0.1..10:100".to_string())?;
                let lo: f64 = lo.trim().parse().map_err(|_| format!("bad y start \"{lo}\""))?;
                let hi: f64 = hi.trim().parse().map_err(|_| format!("bad y end \"{hi}\""))?;
                let count: usize = count.trim().parse().map_err(|_| format!("bad y count \"{count}\""))?;
                if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                    return Err("y range must satisfy 0 < start < end".into());
                }
                if count < 2 {
                    return Err("y count must be at least 2".into());
                }
                y = Some((lo, hi, count));
            }
            other => return Err(format!("unknown grid axis \"{other}\"")),
        }
    }
    let (x_lo, x_hi) = x.ok_or("grid needs an x range")?;
    let (y_lo, y_hi, y_count) = y.ok_or("grid needs a y range")?;
    Ok(Grid {
        x_lo,
        x_hi,
        y_lo,
        y_hi,
        y_count,
    })
}

fn normalizer_json(norm: &LogNormalizer, tol: f64) -> serde_json::Value {
    json!({
        "log_normalizer": norm.c,
        "terms_used": norm.terms_used,
        "tail_bound": norm.tail_bound,
        "rel_tol": tol,
    })
}

pub fn run(args: EvalArgs, sink: &Sink) -> CliResult<()> {
    let params = super::params_from(&args.params)?;
    let norm = log_normalizer(&params, args.tol)?;
    let mut report = RunReport::new("eval");
    report.params = Some((&params).into());

    let stdout_busy = match (&args.grid, args.x, args.y) {
        (Some(spec), _, _) => {
            let grid = parse_grid(spec).map_err(CliError::Usage)?;
            report.results = eval_grid(&params, &norm, &grid, args.tol, args.out.as_deref())?;
            args.out.is_none()
        }
        (None, Some(x), Some(y)) => {
            let obs = Observation::new(x, y)?;
            let lp = log_pdf(&params, &obs, &norm);
            let g = conditional_gamma(&params, x)?;
            eprintln!("log f({x}, {y}) = {lp}  (c = {}, {} terms)", norm.c, norm.terms_used);
            report.results = json!({
                "x": x,
                "y": y,
                "log_density": lp,
                "density": lp.exp(),
                "log_pmf_x": log_pmf_x(&params, x, &norm),
                "log_pdf_y": log_pdf_y(&params, y, &norm)?,
                "conditional_poisson_mean": conditional_poisson_mean(&params, y)?,
                "conditional_gamma_shape": g.shape,
                "conditional_gamma_rate": g.rate,
                "normalizer": normalizer_json(&norm, args.tol),
            });
            false
        }
        _ => {
            eprintln!("c = {}  ({} terms)", norm.c, norm.terms_used);
            report.results = json!({ "normalizer": normalizer_json(&norm, args.tol) });
            false
        }
    };
    sink.emit(report, stdout_busy)
}

fn eval_grid(
    params: &Params,
    norm: &LogNormalizer,
    grid: &Grid,
    tol: f64,
    out: Option<&std::path::Path>,
) -> CliResult<serde_json::Value> {
    let ys = grid.ys();
    let dy = ys[1] - ys[0];
    let mut rows = Vec::with_capacity(ys.len() * (grid.x_hi - grid.x_lo + 1) as usize);
    let mut grid_mass = 0.0;
    let mut count_mass = 0.0;
    let mut window_mass = 0.0;
    for x in grid.x_lo..=grid.x_hi {
        count_mass += log_pmf_x(params, x, norm).exp();
        let f = |y: f64| Observation::new(x, y).map_or(0.0, |o| log_pdf(params, &o, norm).exp());
        window_mass += integrate(f, grid.y_lo, grid.y_hi, 1e-300, 1e-10).value;
        for (i, &y) in ys.iter().enumerate() {
            let d = log_pdf(params, &Observation::new(x, y)?, norm).exp();
            let w = if i == 0 || i + 1 == ys.len() { 0.5 } else { 1.0 };
            grid_mass += w * d * dy;
            rows.push((x, y, d));
        }
    }
    write_to(out, |w| {
        writeln!(w, "x,y,density")?;
        for (x, y, d) in &rows {
            writeln!(w, "{x},{y},{d}")?;
        }
        Ok(())
    })?;
    eprintln!(
        "{} grid rows; trapezoid mass {grid_mass:.6}, exact window mass {window_mass:.6}",
        rows.len()
    );
    Ok(json!({
        "rows": rows.len(),
        "x_range": [grid.x_lo, grid.x_hi],
        "y_range": [grid.y_lo, grid.y_hi],
        "y_points": grid.y_count,
        "grid_mass": grid_mass,
        "window_mass": window_mass,
        "count_marginal_mass": count_mass,
        "out": out.map(|p| p.display().to_string()),
        "normalizer": normalizer_json(norm, tol),
    }))
}
