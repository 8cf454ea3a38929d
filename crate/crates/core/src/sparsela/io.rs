//! Coordinate (triplet) text format: one `row col value` line per stored
//! entry, zero-based indices, values printed with `%.17g`. A leading
//! `# nrows ncols nnz` comment fixes the shape; without it the shape is
//! inferred from the largest indices.

use std::io::{BufRead, Write};

use super::CsrMatrix;
use crate::error::{Error, Result};
use crate::fmt::format_g17;

pub fn write_triplets<W: Write>(out: &mut W, a: &CsrMatrix<f64>) -> Result<()> {
    writeln!(out, "# {} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(out, "{i} {j} {}", format_g17(v))?;
    }
    Ok(())
}

pub fn read_triplets<R: BufRead>(input: R) -> Result<CsrMatrix<f64>> {
    let mut shape: Option<(usize, usize)> = None;
    let mut entries = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let nums: Vec<usize> = header.split_whitespace().filter_map(|t| t.parse().ok()).collect();
            if shape.is_none() && nums.len() >= 2 {
                shape = Some((nums[0], nums[1]));
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let parse_err = |m: &str| Error::Parse {
            line: lineno + 1,
            message: m.to_string(),
        };
        let i: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err("bad row"))?;
        let j: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err("bad column"))?;
        let v: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err("bad value"))?;
        if it.next().is_some() {
            return Err(parse_err("trailing fields"));
        }
        entries.push((i, j, v));
    }
    let (nrows, ncols) = shape.unwrap_or_else(|| {
        let r = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
        let c = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
        (r, c)
    });
    CsrMatrix::from_triplets(nrows, ncols, &entries)
}
