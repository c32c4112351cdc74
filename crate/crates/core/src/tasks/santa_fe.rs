use std::path::Path;

use crate::error::{Error, Result};

use super::{InputSeries, Provenance, Scaling};

/// Reads a one-sample-per-line intensity file and rescales it to `[0, 1]`.
pub fn santa_fe_load(path: &Path) -> Result<InputSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    santa_fe_parse(&text, &path.display().to_string())
}

/// Parses file contents; `source` names the file in errors. Blank lines are skipped.
pub fn santa_fe_parse(text: &str, source: &str) -> Result<InputSeries> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            path: source.to_string(),
            line: i + 1,
            message: format!("`{line}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse { path: source.to_string(), line: i + 1, message: "non-finite sample".into() });
        }
        raw.push(v);
    }
    if raw.is_empty() {
        return Err(Error::Parse { path: source.to_string(), line: 0, message: "no samples".into() });
    }
    let scaling = Scaling::fit(&raw)?;
    let mut series = InputSeries::new(raw.iter().map(|&x| scaling.scale(x)).collect(), Provenance::SantaFe)?;
    series.scaling = Some(scaling);
    Ok(series)
}
