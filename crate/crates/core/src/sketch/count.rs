use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hashing::{derive_seed, tags, HashFn, KWiseHash, SignHash};
use crate::tensor::SparseTensor;

/// Seeded description of a count sketch matrix `C in R^{m x n}` with
/// `C(j, i) = s(i) [row(i) = j]`.
///
/// When `complemented` is set the row of column `i` is the unique
/// `j in [m]` with `j = 2 - h(i) (mod m)`, i.e. the circular reversal of the
/// base sketch. Both forms share the same sign and bucket hashes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountSketchSpec {
    m: usize,
    n: usize,
    sign: HashFn,
    row: HashFn,
    complemented: bool,
}

impl CountSketchSpec {
    /// A fresh count sketch with 4-wise signs and 2-wise rows, both derived
    /// from `seed`.
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        assert!(m >= 1 && n >= 1, "sketch dimensions must be positive");
        CountSketchSpec {
            m,
            n,
            sign: HashFn::Sign(SignHash::new(derive_seed(seed, tags::SIGN, 0), n)),
            row: HashFn::Bucket(KWiseHash::new(2, derive_seed(seed, tags::ROW, 0), n, m)),
            complemented: false,
        }
    }

    /// A count sketch with explicit sign and (1-based) row tables.
    pub fn from_tables(m: usize, signs: &[i8], rows: &[usize]) -> Result<Self> {
        if signs.len() != rows.len() {
            return Err(Error::LengthMismatch { left: signs.len(), right: rows.len() });
        }
        if m == 0 || signs.is_empty() {
            return Err(Error::InvalidShape("count sketch needs m >= 1 and n >= 1".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) || rows.iter().any(|&r| r == 0 || r > m) {
            return Err(Error::Config("sign table must be +-1 and rows must lie in [1, m]".into()));
        }
        let sign: Arc<[i64]> = signs.iter().map(|&s| s as i64).collect();
        let row: Arc<[i64]> = rows.iter().map(|&r| r as i64).collect();
        Ok(CountSketchSpec { m, n: signs.len(), sign: HashFn::Table(sign), row: HashFn::Table(row), complemented: false })
    }

    /// The complement sketch `C'`: same hashes, circularly reversed rows.
    pub fn complement(&self) -> Self {
        CountSketchSpec { complemented: !self.complemented, ..self.clone() }
    }

    pub fn is_complemented(&self) -> bool {
        self.complemented
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `s(i)` for `i in [1, n]`.
    pub fn sign(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        Ok(self.sign_unchecked(i))
    }

    /// Effective 1-based row of column `i`.
    pub fn row(&self, i: usize) -> Result<usize> {
        self.check(i)?;
        Ok(self.row0(i) + 1)
    }

    fn check(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange { index: vec![i], shape: vec![self.n] });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn sign_unchecked(&self, i: usize) -> f64 {
        self.sign.eval_unchecked(i) as f64
    }

    /// Zero-based effective row.
    #[inline]
    pub(crate) fn row0(&self, i: usize) -> usize {
        let h0 = (self.row.eval_unchecked(i) - 1) as usize;
        if self.complemented { (self.m - h0) % self.m } else { h0 }
    }

    /// `C x` for a sparse vector `x` (an order-1 tensor over `[n]`).
    pub fn apply(&self, x: &SparseTensor) -> Result<Vec<f64>> {
        if x.order() != 1 {
            return Err(Error::OrderMismatch { expected: 1, found: x.order() });
        }
        if x.shape()[0] > self.n {
            return Err(Error::LengthMismatch { left: x.shape()[0], right: self.n });
        }
        let mut y = vec![0.0; self.m];
        for (idx, v) in x.iter() {
            y[self.row0(idx[0])] += self.sign_unchecked(idx[0]) * v;
        }
        Ok(y)
    }

    /// `C x` for a dense vector of length `n`.
    pub fn apply_dense(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { left: x.len(), right: self.n });
        }
        let mut y = vec![0.0; self.m];
        for (i, &v) in x.iter().enumerate() {
            if v != 0.0 {
                y[self.row0(i + 1)] += self.sign_unchecked(i + 1) * v;
            }
        }
        Ok(y)
    }

    /// `C e_i` as a dense m-vector.
    pub fn basis_column(&self, i: usize) -> Result<Vec<f64>> {
        self.check(i)?;
        let mut y = vec![0.0; self.m];
        y[self.row0(i)] = self.sign_unchecked(i);
        Ok(y)
    }
}
