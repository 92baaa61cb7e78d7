//! Plain-text instance and schedule files.
//!
//! Instance file, whitespace separated, `#` starts a comment line:
//!
//! ```text
//! n m
//! m_1 m_2 ... m_m
//! p_1j size_1j p_2j size_2j ... p_mj size_mj     (one line per job)
//! ```
//!
//! Comment lines of the form `# key: value` with key `name`, `type`, `seed`
//! or `cell` fill in [`Meta`]; any other comment is ignored.
//!
//! Schedule file: the makespan on the first line, then one line per job with
//! the start time at each stage.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Instance, Meta, Schedule, Time};

/// Non-comment lines with their one-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn numbers<T: FromStr>(line_no: usize, line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("expected a non-negative integer, found {tok:?}"),
            })
        })
        .collect()
}

fn expect_len<T>(line_no: usize, v: Vec<T>, len: usize, what: &str) -> Result<Vec<T>> {
    if v.len() == len {
        Ok(v)
    } else {
        Err(Error::Parse {
            line: line_no,
            msg: format!("{what}: expected {len} values, found {}", v.len()),
        })
    }
}

fn parse_meta(text: &str) -> Meta {
    let mut meta = Meta::default();
    for line in text.lines() {
        let Some(body) = line.trim().strip_prefix('#') else {
            continue;
        };
        let Some((key, value)) = body.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "name" => meta.name = Some(value.to_string()),
            "type" => meta.kind = value.parse().ok(),
            "seed" => meta.seed = value.parse().ok(),
            "cell" => meta.cell = value.parse().ok(),
            _ => {}
        }
    }
    meta
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = data_lines(text);
    let eof = |what: &str| Error::Parse {
        line: 0,
        msg: format!("unexpected end of file, missing {what}"),
    };

    let (ln, header) = lines.next().ok_or_else(|| eof("header"))?;
    let header = expect_len(ln, numbers::<usize>(ln, header)?, 2, "header `n m`")?;
    let (n, m) = (header[0], header[1]);

    let (ln, procs) = lines.next().ok_or_else(|| eof("processor counts"))?;
    let procs = expect_len(ln, numbers::<u32>(ln, procs)?, m, "processor counts")?;

    let mut p = Vec::with_capacity(n);
    let mut size = Vec::with_capacity(n);
    for job in 0..n {
        let (ln, row) = lines
            .next()
            .ok_or_else(|| eof(&format!("job {}", job + 1)))?;
        let row = expect_len(ln, numbers::<u64>(ln, row)?, 2 * m, "job line")?;
        p.push(row.iter().step_by(2).copied().collect::<Vec<Time>>());
        let sizes = row.iter().skip(1).step_by(2).map(|&s| {
            u32::try_from(s).map_err(|_| Error::Parse {
                line: ln,
                msg: format!("size {s} too large"),
            })
        });
        size.push(sizes.collect::<Result<Vec<u32>>>()?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse {
            line: ln,
            msg: "trailing data after the last job".into(),
        });
    }
    Ok(Instance::new(procs, p, size)?.with_meta(parse_meta(text)))
}

pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let meta = inst.meta();
    if let Some(name) = &meta.name {
        let _ = writeln!(out, "# name: {name}");
    }
    if let Some(kind) = meta.kind {
        let _ = writeln!(out, "# type: {kind}");
    }
    if let Some(seed) = meta.seed {
        let _ = writeln!(out, "# seed: {seed}");
    }
    if let Some(cell) = meta.cell {
        let _ = writeln!(out, "# cell: {cell}");
    }
    let _ = writeln!(out, "{} {}", inst.n(), inst.m());
    let _ = writeln!(out, "{}", join(inst.all_procs()));
    for job in 0..inst.n() {
        let row: Vec<String> = (0..inst.m())
            .map(|i| format!("{} {}", inst.p(job, i), inst.size(job, i)))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Parses a schedule file and checks its shape against `inst`.
pub fn parse_schedule(inst: &Instance, text: &str) -> Result<Schedule> {
    let mut lines = data_lines(text);
    let (ln, first) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "empty schedule file".into(),
    })?;
    let makespan = expect_len(ln, numbers::<Time>(ln, first)?, 1, "makespan")?[0];
    let mut start = Vec::with_capacity(inst.n());
    for (ln, row) in lines {
        start.push(expect_len(
            ln,
            numbers::<Time>(ln, row)?,
            inst.m(),
            "start times",
        )?);
    }
    if start.len() != inst.n() {
        return Err(Error::Dimension(format!(
            "schedule has {} job lines, instance has {} jobs",
            start.len(),
            inst.n()
        )));
    }
    Ok(Schedule::with_makespan(start, makespan))
}

pub fn write_schedule(sched: &Schedule) -> String {
    let mut out = format!("{}\n", sched.makespan());
    for row in sched.starts() {
        let _ = writeln!(out, "{}", join(row));
    }
    out
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    let inst = parse_instance(&text)?;
    if inst.meta().name.is_some() {
        return Ok(inst);
    }
    let mut meta = inst.meta().clone();
    meta.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    Ok(inst.with_meta(meta))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}
