//! Plain-text serialization.
//!
//! Formats, one item per line, whitespace separated:
//! - sensing matrix: header `N m k seed`, then `row col value` per nonzero;
//! - signal: one f64 per line; counts: one integer per line;
//! - trace: CSV with header `iter,objective,alpha,rms,seconds` (rms empty
//!   when no ground truth was supplied);
//! - partition fit (debug output): `start length level` per interval.
//!
//! Floats print in Rust's shortest-round-trip form, so write-then-read is
//! bit-exact. Read errors carry 1-based line numbers.

use crate::driver::TraceRow;
use crate::error::{Error, Result};
use crate::model::{CountVector, Signal};
use crate::prox::PartitionFit;
use crate::sensing::SensingMatrix;
use std::io::{BufRead, Write};

pub const TRACE_HEADER: &str = "iter,objective,alpha,rms,seconds";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what}: {token:?}")))
}

pub fn write_matrix(mut w: impl Write, a: &SensingMatrix) -> Result<()> {
    writeln!(w, "{} {} {} {}", a.n_rows(), a.n_cols(), a.row_nnz(), a.seed())?;
    for (r, c, v) in a.triples() {
        writeln!(w, "{r} {c} {v}")?;
    }
    Ok(())
}

pub fn read_matrix(r: impl BufRead) -> Result<SensingMatrix> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing matrix header"))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(parse_err(1, format!("header needs 'N m k seed', got {header:?}")));
    }
    let n_rows: usize = parse(fields[0], 1, "row count")?;
    let n_cols: usize = parse(fields[1], 1, "column count")?;
    let row_nnz: usize = parse(fields[2], 1, "per-row nonzero count")?;
    let seed: u64 = parse(fields[3], 1, "seed")?;
    let mut triples = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            return Err(parse_err(lineno, "blank line inside matrix body"));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(lineno, format!("need 'row col value', got {line:?}")));
        }
        triples.push((
            parse::<usize>(fields[0], lineno, "row index")?,
            parse::<usize>(fields[1], lineno, "column index")?,
            parse::<f64>(fields[2], lineno, "value")?,
        ));
    }
    Ok(SensingMatrix::from_triples(n_rows, n_cols, &triples)?.with_metadata(row_nnz, seed))
}

pub fn write_signal(mut w: impl Write, f: &Signal) -> Result<()> {
    for v in f.values() {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn read_signal(r: impl BufRead) -> Result<Signal> {
    let mut values = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        values.push(parse::<f64>(line.trim(), idx + 1, "signal value")?);
    }
    Signal::nonneg(values)
}

pub fn write_counts(mut w: impl Write, y: &CountVector) -> Result<()> {
    for c in y.counts() {
        writeln!(w, "{c}")?;
    }
    Ok(())
}

pub fn read_counts(r: impl BufRead) -> Result<CountVector> {
    let mut counts = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        counts.push(parse::<u64>(line.trim(), idx + 1, "count")?);
    }
    CountVector::new(counts)
}

pub fn write_trace_rows(mut w: impl Write, rows: &[TraceRow]) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for row in rows {
        let rms = row.rms.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            row.iter, row.objective, row.alpha, rms, row.seconds
        )?;
    }
    Ok(())
}

pub fn read_trace_rows(r: impl BufRead) -> Result<Vec<TraceRow>> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing trace header"))?;
    let header = header?;
    if header.trim() != TRACE_HEADER {
        return Err(parse_err(1, format!("expected {TRACE_HEADER:?}, got {header:?}")));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err(lineno, format!("need 5 columns, got {}", fields.len())));
        }
        rows.push(TraceRow {
            iter: parse(fields[0], lineno, "iteration")?,
            objective: parse(fields[1], lineno, "objective")?,
            alpha: parse(fields[2], lineno, "alpha")?,
            rms: if fields[3].is_empty() {
                None
            } else {
                Some(parse(fields[3], lineno, "rms")?)
            },
            seconds: parse(fields[4], lineno, "seconds")?,
        });
    }
    Ok(rows)
}

pub fn write_partition(mut w: impl Write, fit: &PartitionFit) -> Result<()> {
    for (&(start, len), &level) in fit.intervals().iter().zip(fit.levels()) {
        writeln!(w, "{start} {len} {level}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::rdp_denoise;

    #[test]
    fn matrix_round_trip() {
        let a = SensingMatrix::generate(6, 10, 3, 42).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &a).unwrap();
        let back = read_matrix(buf.as_slice()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn matrix_parse_errors_carry_line_numbers() {
        match read_matrix("2 2 1".as_bytes()) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("want header error, got {other:?}"),
        }
        match read_matrix("2 2 1 0\n0 0 1.0\n1 oops 1.0".as_bytes()) {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("want line-3 error, got {other:?}"),
        }
    }

    #[test]
    fn signal_and_counts_round_trip() {
        let f = Signal::nonneg(vec![0.0, 1.5, 0.1234567890123456, 7.0]).unwrap();
        let mut buf = Vec::new();
        write_signal(&mut buf, &f).unwrap();
        assert_eq!(read_signal(buf.as_slice()).unwrap().values(), f.values());

        let y = CountVector::new(vec![0, 3, 99, 2]).unwrap();
        let mut buf = Vec::new();
        write_counts(&mut buf, &y).unwrap();
        assert_eq!(read_counts(buf.as_slice()).unwrap(), y);

        match read_counts("1\n-4\n".as_bytes()) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("want line-2 error, got {other:?}"),
        }
    }

    #[test]
    fn trace_round_trip_with_and_without_rms() {
        let rows = vec![
            TraceRow {
                iter: 0,
                objective: 12.25,
                alpha: 1.0,
                rms: None,
                seconds: 0.001,
            },
            TraceRow {
                iter: 1,
                objective: 10.5,
                alpha: 0.3333333333333333,
                rms: Some(0.25),
                seconds: 0.002,
            },
        ];
        let mut buf = Vec::new();
        write_trace_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iter,objective,alpha,rms,seconds\n"));
        assert!(text.contains("0,12.25,1,,0.001"));
        let back = read_trace_rows(buf.as_slice()).unwrap();
        assert_eq!(back, rows);

        match read_trace_rows("bad header\n".as_bytes()) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("want header error, got {other:?}"),
        }
        let malformed = format!("{TRACE_HEADER}\n0,1,1,,0.5\n1,2,3\n");
        match read_trace_rows(malformed.as_bytes()) {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("want line-3 error, got {other:?}"),
        }
    }

    #[test]
    fn partition_lines_match_intervals() {
        let s = Signal::unconstrained(vec![1.0, 1.0, 5.0, 5.0]).unwrap();
        let fit = rdp_denoise(&s, 0.1).unwrap();
        let mut buf = Vec::new();
        write_partition(&mut buf, &fit).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 2 1\n2 2 5\n");
    }
}
