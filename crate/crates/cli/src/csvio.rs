//! CSV trajectory format: leading `#` comment lines carry the serialized
//! experiment, then a fixed header and one row per recorded sample.
//! Formatting is fixed so identical runs produce byte-identical files.

use std::io::{self, BufRead, Write};

use memsyn::expfile::ParseError;
use memsyn::{parse_experiment, serialize_experiment, Experiment, Sample, Trajectory};
use thiserror::Error;

pub const HEADER: &str = "t,v,i,x1,m1,x2,m2,m_total,q";

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("embedded experiment: {0}")]
    Experiment(#[from] ParseError),
}

/// Ten significant digits, enough to reproduce every f64 column to well
/// under any tolerance used downstream.
fn num(v: f64) -> String {
    format!("{v:.9e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Writes the experiment as `#` comments, the header, then the samples.
pub fn write_trajectory(w: &mut impl Write, exp: &Experiment, traj: &Trajectory) -> io::Result<()> {
    for line in serialize_experiment(exp).lines() {
        if line.is_empty() {
            writeln!(w, "#")?;
        } else {
            writeln!(w, "# {line}")?;
        }
    }
    writeln!(w, "{HEADER}")?;
    for s in &traj.samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            num(s.t),
            num(s.v),
            num(s.i),
            num(s.x1),
            num(s.m1),
            opt(s.x2),
            opt(s.m2),
            num(s.m_total),
            num(s.q),
        )?;
    }
    Ok(())
}

/// Reads a file produced by `write_trajectory`: recovers the experiment
/// from the comment block and the samples from the rows. Anything not in
/// exactly that shape is rejected with its line number.
pub fn read_trajectory(r: impl BufRead) -> Result<(Experiment, Trajectory), ReadError> {
    let mut meta = String::new();
    let mut header_seen = false;
    let mut samples = Vec::new();

    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if !header_seen {
            if let Some(rest) = line.strip_prefix('#') {
                meta.push_str(rest.strip_prefix(' ').unwrap_or(rest));
                meta.push('\n');
                continue;
            }
            if line != HEADER {
                return Err(ReadError::Format {
                    line: lineno,
                    message: format!("expected header `{HEADER}`"),
                });
            }
            header_seen = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        samples.push(parse_row(&line, lineno)?);
    }
    if !header_seen {
        return Err(ReadError::Format {
            line: 1,
            message: format!("expected header `{HEADER}`"),
        });
    }
    let exp = parse_experiment(&meta)?;
    let traj = Trajectory {
        topology: exp.topology().clone(),
        stimulus: *exp.stimulus(),
        solver: *exp.solver(),
        samples,
    };
    Ok((exp, traj))
}

fn parse_row(line: &str, lineno: usize) -> Result<Sample, ReadError> {
    let parts: Vec<&str> = line.split(',').collect();
    let names: Vec<&str> = HEADER.split(',').collect();
    if parts.len() != names.len() {
        return Err(ReadError::Format {
            line: lineno,
            message: format!("expected {} columns, found {}", names.len(), parts.len()),
        });
    }
    let req = |col: usize| -> Result<f64, ReadError> {
        parts[col].parse().map_err(|_| ReadError::Format {
            line: lineno,
            message: format!("column {} is not a number: `{}`", names[col], parts[col]),
        })
    };
    let opt = |col: usize| -> Result<Option<f64>, ReadError> {
        if parts[col].is_empty() {
            Ok(None)
        } else {
            req(col).map(Some)
        }
    };
    let x2 = opt(5)?;
    let m2 = opt(6)?;
    if x2.is_some() != m2.is_some() {
        return Err(ReadError::Format {
            line: lineno,
            message: "columns x2 and m2 must be empty together".into(),
        });
    }
    Ok(Sample {
        t: req(0)?,
        v: req(1)?,
        i: req(2)?,
        x1: req(3)?,
        m1: req(4)?,
        x2,
        m2,
        m_total: req(7)?,
        q: req(8)?,
    })
}
