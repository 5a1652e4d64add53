//! Sparse coordinate-format tensors and multi-index arithmetic.
//!
//! All public indices are 1-based: an order-`q` tensor of shape
//! `(n_1, ..., n_q)` is addressed by multi-indices `(i_1, ..., i_q)` with
//! `1 <= i_k <= n_k`. Vectorization and flattening use lexicographic order,
//! so the first mode is the most significant.

mod coo;
mod dense;

use std::collections::BTreeMap;

pub use coo::{read_coo, write_coo};
pub use dense::DenseTensor;

use crate::error::{Error, Result};

/// Lexicographic (row-major) position of `index` within `shape`, in
/// `1..=prod(shape)`. The empty index of an order-0 shape maps to 1.
pub fn linear_index(index: &[usize], shape: &[usize]) -> Result<usize> {
    check_index(index, shape)?;
    Ok(linear_index_unchecked(index, shape) + 1)
}

/// Inverse of [`linear_index`].
pub fn multi_index(position: usize, shape: &[usize]) -> Result<Vec<usize>> {
    let cells = num_cells(shape);
    if position == 0 || position > cells {
        return Err(Error::IndexOutOfRange { index: vec![position], shape: shape.to_vec() });
    }
    let mut rem = position - 1;
    let mut index = vec![0; shape.len()];
    for (k, &n) in shape.iter().enumerate().rev() {
        index[k] = rem % n + 1;
        rem /= n;
    }
    Ok(index)
}

/// Zero-based lexicographic rank; callers guarantee validity.
pub(crate) fn linear_index_unchecked(index: &[usize], shape: &[usize]) -> usize {
    index.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + (i - 1))
}

pub(crate) fn num_cells(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Coordinates `(row, col)` of entry `index` inside the mode-`k` flattening
/// `mat_k(X)`, where the row is `i_k` and the column is the 1-based
/// lexicographic rank of `index` with mode `k` removed.
pub fn mode_flatten_coords(index: &[usize], shape: &[usize], k: usize) -> Result<(usize, usize)> {
    if k == 0 || k > shape.len() {
        return Err(Error::InvalidMode { mode: k, order: shape.len() });
    }
    check_index(index, shape)?;
    let rest_idx: Vec<usize> = index.iter().enumerate().filter(|&(j, _)| j != k - 1).map(|(_, &i)| i).collect();
    let rest_shape: Vec<usize> = shape.iter().enumerate().filter(|&(j, _)| j != k - 1).map(|(_, &n)| n).collect();
    Ok((index[k - 1], linear_index_unchecked(&rest_idx, &rest_shape) + 1))
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.contains(&0) {
        return Err(Error::InvalidShape(format!("mode sizes must be positive, got {shape:?}")));
    }
    Ok(())
}

fn check_index(index: &[usize], shape: &[usize]) -> Result<()> {
    if index.len() != shape.len() || index.iter().zip(shape).any(|(&i, &n)| i == 0 || i > n) {
        return Err(Error::IndexOutOfRange { index: index.to_vec(), shape: shape.to_vec() });
    }
    Ok(())
}

/// A real tensor in coordinate format.
///
/// Entries are kept in a `BTreeMap` so iteration is lexicographic and every
/// computation over the nonzeros is deterministic. Zero values are never
/// stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SparseTensor {
    shape: Vec<usize>,
    entries: BTreeMap<Vec<usize>, f64>,
}

impl SparseTensor {
    /// The all-zeros tensor of the given shape.
    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        check_shape(&shape)?;
        Ok(SparseTensor { shape, entries: BTreeMap::new() })
    }

    /// Builds a tensor from `(index, value)` pairs. Repeated indices are
    /// summed, which is what frequency tensors need.
    pub fn from_entries<I>(shape: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut t = Self::zeros(shape)?;
        for (index, value) in entries {
            t.add(&index, value)?;
        }
        Ok(t)
    }

    /// An order-0 tensor holding `value`.
    pub fn scalar(value: f64) -> Self {
        let mut entries = BTreeMap::new();
        if value != 0.0 {
            entries.insert(Vec::new(), value);
        }
        SparseTensor { shape: Vec::new(), entries }
    }

    /// Builds from a row-major value array, dropping zeros.
    pub fn from_dense(shape: Vec<usize>, values: &[f64]) -> Result<Self> {
        check_shape(&shape)?;
        if values.len() != num_cells(&shape) {
            return Err(Error::LengthMismatch { left: values.len(), right: num_cells(&shape) });
        }
        let mut entries = BTreeMap::new();
        for (pos, &v) in values.iter().enumerate() {
            if v != 0.0 {
                entries.insert(multi_index(pos + 1, &shape)?, v);
            }
        }
        Ok(SparseTensor { shape, entries })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.entries.get(index).copied().unwrap_or(0.0)
    }

    /// Nonzero entries in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.entries.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// For order-0 tensors, the held scalar (zero when empty).
    pub fn scalar_value(&self) -> f64 {
        self.get(&[])
    }

    /// Adds `delta` to the entry at `index`, removing it if it cancels to zero.
    pub fn add(&mut self, index: &[usize], delta: f64) -> Result<()> {
        check_index(index, &self.shape)?;
        if delta == 0.0 {
            return Ok(());
        }
        let slot = self.entries.entry(index.to_vec()).or_insert(0.0);
        *slot += delta;
        if *slot == 0.0 {
            self.entries.remove(index);
        }
        Ok(())
    }

    pub fn set(&mut self, index: &[usize], value: f64) -> Result<()> {
        check_index(index, &self.shape)?;
        if value == 0.0 {
            self.entries.remove(index);
        } else {
            self.entries.insert(index.to_vec(), value);
        }
        Ok(())
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Fixes the modes for which `fixed[k]` is `Some(i)` and returns the
    /// tensor over the remaining modes, in their original order.
    pub fn slice(&self, fixed: &[Option<usize>]) -> Result<SparseTensor> {
        if fixed.len() != self.order() {
            return Err(Error::OrderMismatch { expected: self.order(), found: fixed.len() });
        }
        for (k, f) in fixed.iter().enumerate() {
            if let Some(i) = *f {
                if i == 0 || i > self.shape[k] {
                    return Err(Error::IndexOutOfRange {
                        index: fixed.iter().map(|f| f.unwrap_or(0)).collect(),
                        shape: self.shape.clone(),
                    });
                }
            }
        }
        let shape: Vec<usize> = self.shape.iter().zip(fixed).filter(|(_, f)| f.is_none()).map(|(&n, _)| n).collect();
        let entries = self
            .entries
            .iter()
            .filter(|(idx, _)| idx.iter().zip(fixed).all(|(&i, f)| f.is_none_or(|v| v == i)))
            .map(|(idx, &v)| {
                let rest = idx.iter().zip(fixed).filter(|(_, f)| f.is_none()).map(|(&i, _)| i).collect();
                (rest, v)
            })
            .collect();
        Ok(SparseTensor { shape, entries })
    }

    /// Reorders modes so that new mode `j` is old mode `perm[j]`. Modes are
    /// 1-based.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<SparseTensor> {
        let q = self.order();
        let mut seen = vec![false; q];
        if perm.len() != q {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        for &p in perm {
            if p == 0 || p > q || seen[p - 1] {
                return Err(Error::InvalidPermutation(perm.to_vec()));
            }
            seen[p - 1] = true;
        }
        let shape = perm.iter().map(|&p| self.shape[p - 1]).collect();
        let entries = self
            .entries
            .iter()
            .map(|(idx, &v)| (perm.iter().map(|&p| idx[p - 1]).collect(), v))
            .collect();
        Ok(SparseTensor { shape, entries })
    }

    /// Enlarges the declared shape; entries are unchanged.
    pub fn pad_modes(&self, new_shape: &[usize]) -> Result<SparseTensor> {
        if new_shape.len() != self.order() {
            return Err(Error::OrderMismatch { expected: self.order(), found: new_shape.len() });
        }
        if new_shape.iter().zip(&self.shape).any(|(&new, &old)| new < old) {
            return Err(Error::InvalidShape(format!(
                "cannot pad shape {:?} down to {:?}",
                self.shape, new_shape
            )));
        }
        Ok(SparseTensor { shape: new_shape.to_vec(), entries: self.entries.clone() })
    }

    /// Re-keys every entry through `map`, summing collisions and dropping
    /// entries mapped to `None`. Used by the normalizer, whose index maps are
    /// all injective or diagonal-filtering.
    pub(crate) fn remap<F>(&self, shape: Vec<usize>, mut map: F) -> SparseTensor
    where
        F: FnMut(&[usize]) -> Option<Vec<usize>>,
    {
        let mut out = SparseTensor { shape, entries: BTreeMap::new() };
        for (idx, &v) in &self.entries {
            if let Some(new_idx) = map(idx) {
                let slot = out.entries.entry(new_idx).or_insert(0.0);
                *slot += v;
            }
        }
        out.entries.retain(|_, v| *v != 0.0);
        out
    }

    pub fn to_dense(&self) -> DenseTensor {
        DenseTensor::from_sparse(self)
    }
}
