//! Plain-text coordinate format:
//!
//! ```text
//! shape 2 3
//! 1 1 0.5
//! 2 3 -1
//! ```

use std::io::{BufRead, Write};

use super::SparseTensor;
use crate::error::{Error, Result};

pub fn read_coo<R: BufRead>(reader: R) -> Result<SparseTensor> {
    let mut lines = reader.lines().enumerate().filter_map(|(no, line)| match line {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
        other => Some((no + 1, other)),
    });
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("missing shape header".into()))?;
    let header = header?;
    let mut words = header.split_whitespace();
    if words.next() != Some("shape") {
        return Err(Error::Parse(format!("expected `shape` header, found {header:?}")));
    }
    let shape = words
        .map(|w| w.parse::<usize>().map_err(|e| Error::Parse(format!("bad mode size {w:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut tensor = SparseTensor::zeros(shape)?;
    for (no, line) in lines {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != tensor.order() + 1 {
            return Err(Error::Parse(format!(
                "line {no}: expected {} fields, found {}",
                tensor.order() + 1,
                fields.len()
            )));
        }
        let (idx, value) = fields.split_at(tensor.order());
        let idx = idx
            .iter()
            .map(|w| w.parse::<usize>().map_err(|e| Error::Parse(format!("line {no}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let value: f64 = value[0].parse().map_err(|e| Error::Parse(format!("line {no}: {e}")))?;
        tensor.add(&idx, value)?;
    }
    Ok(tensor)
}

pub fn write_coo<W: Write>(tensor: &SparseTensor, mut out: W) -> Result<()> {
    write!(out, "shape")?;
    for n in tensor.shape() {
        write!(out, " {n}")?;
    }
    writeln!(out)?;
    for (idx, v) in tensor.iter() {
        for i in idx {
            write!(out, "{i} ")?;
        }
        writeln!(out, "{v}")?;
    }
    Ok(())
}
