//! Envelope CSV: a `# grid t_start=.. dt=.. n=..` line, a `t,re,im`
//! header, then one row per sample. Floats use shortest round-trip
//! formatting, so a write/read cycle is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{ComplexEnvelope, TimeGrid};
use crate::error::{Error, Result};

pub fn write_envelope_csv<W: Write>(e: &ComplexEnvelope, mut out: W) -> std::io::Result<()> {
    let g = e.grid();
    writeln!(out, "# grid t_start={} dt={} n={}", g.t_start(), g.dt(), g.len())?;
    writeln!(out, "t,re,im")?;
    for (t, z) in g.times().zip(e.samples()) {
        writeln!(out, "{t},{},{}", z.re, z.im)?;
    }
    Ok(())
}

pub fn save_envelope_csv(e: &ComplexEnvelope, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|err| Error::io(path, err))?;
    let mut w = BufWriter::new(file);
    write_envelope_csv(e, &mut w).map_err(|err| Error::io(path, err))?;
    w.flush().map_err(|err| Error::io(path, err))
}

pub fn read_envelope_csv<R: Read>(input: R, context: &str) -> Result<ComplexEnvelope> {
    let mut lines = BufReader::new(input).lines();
    let mut next = || -> Result<Option<String>> {
        lines
            .next()
            .transpose()
            .map_err(|err| Error::parse(context, err))
    };

    let grid_line = next()?.ok_or_else(|| Error::parse(context, "empty file"))?;
    let grid = parse_grid_line(&grid_line).map_err(|m| Error::parse(context, m))?;
    let header = next()?.ok_or_else(|| Error::parse(context, "missing column header"))?;
    if header.trim() != "t,re,im" {
        return Err(Error::parse(context, format!("expected header `t,re,im`, got `{header}`")));
    }

    let mut samples = Vec::with_capacity(grid.len());
    let mut row = 0usize;
    while let Some(line) = next()? {
        row += 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(context, format!("row {row}: expected 3 columns")));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|err| Error::parse(context, format!("row {row}: {err}")))
        };
        let t = num(fields[0])?;
        let expected_t = grid.time(samples.len());
        if (t - expected_t).abs() > 1e-9 * grid.dt().max(expected_t.abs()) {
            return Err(Error::parse(
                context,
                format!("row {row}: time {t} does not match grid time {expected_t}"),
            ));
        }
        samples.push(Complex64::new(num(fields[1])?, num(fields[2])?));
    }
    ComplexEnvelope::new(grid, samples)
}

pub fn load_envelope_csv(path: &Path) -> Result<ComplexEnvelope> {
    let file = File::open(path).map_err(|err| Error::io(path, err))?;
    read_envelope_csv(file, &path.display().to_string())
}

fn parse_grid_line(line: &str) -> std::result::Result<TimeGrid, String> {
    let rest = line
        .trim()
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|s| s.strip_prefix("grid"))
        .ok_or_else(|| format!("expected `# grid ...` line, got `{line}`"))?;
    let (mut t_start, mut dt, mut n) = (None, None, None);
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("bad grid field `{kv}`"))?;
        match k {
            "t_start" => t_start = Some(v.parse::<f64>().map_err(|e| e.to_string())?),
            "dt" => dt = Some(v.parse::<f64>().map_err(|e| e.to_string())?),
            "n" => n = Some(v.parse::<usize>().map_err(|e| e.to_string())?),
            other => return Err(format!("unknown grid field `{other}`")),
        }
    }
    match (t_start, dt, n) {
        (Some(t), Some(d), Some(n)) => TimeGrid::new(t, d, n).map_err(|e| e.to_string()),
        _ => Err("grid line needs t_start, dt and n".into()),
    }
}
