//! The `x,y` CSV format.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use bpgc_core::{Dataset, Observation};

use crate::error::{CliError, CliResult};

pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CliError::io(path, e))?;
    parse_dataset(&text).map_err(|msg| CliError::Usage(format!("{}: {msg}", path.display())))
}

/// Parses the CSV text; errors name the offending line. Lines may end in
/// LF or CRLF; blank lines are skipped.
pub fn parse_dataset(text: &str) -> Result<Dataset, String> {
    let mut lines = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, "x,y")) => {}
        Some((_, h)) => return Err(format!("line 1: header must be exactly \"x,y\", got \"{h}\"")),
        None => unreachable!("split yields at least one item"),
    }
    let mut obs = Vec::new();
    for (line, row) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = row.split(',').collect();
        let [x, y] = fields[..] else {
            return Err(format!("line {line}: expected 2 fields, found {}", fields.len()));
        };
        let x: u64 = x
            .trim()
            .parse()
            .map_err(|_| format!("line {line}: x = \"{x}\" is not a non-negative integer"))?;
        let y: f64 = y
            .trim()
            .parse()
            .map_err(|_| format!("line {line}: y = \"{y}\" is not a number"))?;
        obs.push(Observation::new(x, y).map_err(|e| format!("line {line}: {e}"))?);
    }
    if obs.is_empty() {
        return Err("no data rows after the header".into());
    }
    Dataset::new(obs).map_err(|e| e.to_string())
}

pub fn write_observations<W: Write>(out: W, obs: &[Observation]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y"])?;
    for o in obs {
        // shortest representation that parses back to the same f64
        w.write_record([o.x().to_string(), o.y().to_string()])?;
    }
    w.flush()
}

/// Writes to `path`, or to standard output when `path` is `None`.
pub fn write_to(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut file = io::BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?);
            f(&mut file).and_then(|_| file.flush()).map_err(|e| CliError::io(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
