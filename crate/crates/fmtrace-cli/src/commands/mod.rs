pub mod conditions;
pub mod localize;
pub mod symbol;
pub mod trace;
pub mod verify;

use std::path::PathBuf;

use crate::{CliError, Ctx};

/// Every command writes a JSON envelope to the configured path; tabular rows
/// go to the `.csv` sibling.  Naming a `.csv` path hands it to the table and
/// moves the envelope to the `.json` sibling — the two never collide.
pub(crate) fn report_paths(ctx: &Ctx) -> (PathBuf, PathBuf) {
    let csv = ctx.out_path.with_extension("csv");
    if csv == ctx.out_path {
        (ctx.out_path.with_extension("json"), csv)
    } else {
        (ctx.out_path.clone(), csv)
    }
}

/// `start:stop:step`, inclusive of both ends up to a lattice-snap tolerance.
/// A bare number is a single sample; an empty string is no samples at all.
pub(crate) fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse()
            .map_err(|_| CliError::Config(format!("invalid number '{}' in range '{t}'", s.trim())))
    };
    let parts: Vec<&str> = t.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) {
                return Err(CliError::Config(format!("range step must be positive, got {step}")));
            }
            if stop < start {
                return Err(CliError::Config(format!("range stop must be >= start in '{t}'")));
            }
            let count = (((stop - start) / step) * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + step * i as f64).collect())
        }
        _ => Err(CliError::Config(format!("range must be start:stop:step, got '{t}'"))),
    }
}
