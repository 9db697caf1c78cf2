use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use super::layout::SystemLayout;
use super::operator::Operator;
use crate::error::{QdError, Result};
use crate::fsio::write_atomic;

/// Sparse-triplet text: a `dim nnz` header, then one `row col re im` line per
/// stored entry with 17 significant digits.
pub fn to_triplet_string(op: &Operator) -> String {
    let mut out = String::with_capacity(64 * (op.nnz() + 1));
    let _ = writeln!(out, "{} {}", op.dim(), op.nnz());
    for (r, c, v) in op.iter() {
        let _ = writeln!(out, "{r} {c} {:.16e} {:.16e}", v.re, v.im);
    }
    out
}

pub fn from_triplet_str(layout: &Arc<SystemLayout>, text: &str) -> Result<Operator> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| QdError::Parse("empty triplet file".into()))?;
    let mut head = header.split_whitespace();
    let mut next_usize = |what: &str| -> Result<usize> {
        head.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| QdError::Parse(format!("bad header field {what}")))
    };
    let dim = next_usize("dim")?;
    let nnz = next_usize("nnz")?;
    if dim != layout.total_dim() {
        return Err(QdError::invalid(format!(
            "triplet dimension {dim} does not match layout dimension {}",
            layout.total_dim()
        )));
    }
    let mut trip = Vec::with_capacity(nnz);
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || QdError::Parse(format!("malformed triplet line {}", k + 2));
        if f.len() != 4 {
            return Err(bad());
        }
        let r: usize = f[0].parse().map_err(|_| bad())?;
        let c: usize = f[1].parse().map_err(|_| bad())?;
        let re: f64 = f[2].parse().map_err(|_| bad())?;
        let im: f64 = f[3].parse().map_err(|_| bad())?;
        trip.push((r, c, Complex64::new(re, im)));
    }
    if trip.len() != nnz {
        return Err(QdError::Parse(format!(
            "header promises {nnz} entries, found {}",
            trip.len()
        )));
    }
    Operator::from_triplets(layout, trip)
}

pub fn write_triplets(op: &Operator, path: &Path) -> Result<()> {
    write_atomic(path, to_triplet_string(op).as_bytes())
}

pub fn read_triplets(layout: &Arc<SystemLayout>, path: &Path) -> Result<Operator> {
    let text = std::fs::read_to_string(path).map_err(|e| QdError::io(path.display().to_string(), e))?;
    from_triplet_str(layout, &text)
}
