use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use crate::dataset_io::{read_dataset, write_to};
use crate::error::{CliError, CliResult};
use crate::report::{RunReport, Sink};

#[derive(Args)]
pub struct HistogramArgs {
    /// x,y CSV file.
    #[arg(long)]
    data: PathBuf,
    /// Number of equal-width y bins between the smallest and largest y.
    #[arg(long, default_value_t = 30)]
    y_bins: usize,
    /// Histogram CSV destination (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// 2-D histogram data: one bin per observed count value of x and
/// `y_bins` equal-width bins in y. Empty cells are written too, so the
/// output is a full rectangular grid.
pub fn run(args: HistogramArgs, sink: &Sink) -> CliResult<()> {
    if args.y_bins == 0 {
        return Err(CliError::Usage("--y-bins must be at least 1".into()));
    }
    let data = read_dataset(&args.data)?;
    let obs = data.observations();
    let x_max = obs.iter().map(|o| o.x()).max().unwrap_or(0);
    let y_lo = obs.iter().map(|o| o.y()).fold(f64::INFINITY, f64::min);
    let y_hi = obs.iter().map(|o| o.y()).fold(f64::NEG_INFINITY, f64::max);
    let width = if y_hi > y_lo { (y_hi - y_lo) / args.y_bins as f64 } else { 1.0 };

    let mut counts = vec![vec![0u64; args.y_bins]; x_max as usize + 1];
    for o in obs {
        let b = (((o.y() - y_lo) / width) as usize).min(args.y_bins - 1);
        counts[o.x() as usize][b] += 1;
    }
    let n = obs.len() as f64;
    write_to(args.out.as_deref(), |w| {
        writeln!(w, "x,y_lo,y_hi,count,density")?;
        for (x, row) in counts.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                let lo = y_lo + b as f64 * width;
                writeln!(w, "{x},{lo},{},{c},{}", lo + width, c as f64 / (n * width))?;
            }
        }
        Ok(())
    })?;
    eprintln!("{} x values by {} y bins of width {width:.4}", counts.len(), args.y_bins);

    let mut report = RunReport::new("histogram");
    report.results = json!({
        "data": args.data.display().to_string(),
        "n": obs.len(),
        "x_bins": counts.len(),
        "y_bins": args.y_bins,
        "y_range": [y_lo, y_hi],
        "y_bin_width": width,
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    });
    sink.emit(report, args.out.is_none())
}
