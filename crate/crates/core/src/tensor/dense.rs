use super::{linear_index_unchecked, num_cells, SparseTensor};

/// Row-major dense tensor. Only meant for small test oracles.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn from_sparse(t: &SparseTensor) -> Self {
        let mut values = vec![0.0; num_cells(t.shape())];
        for (idx, v) in t.iter() {
            values[linear_index_unchecked(idx, t.shape())] = v;
        }
        DenseTensor { shape: t.shape().to_vec(), values }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Values in lexicographic order, i.e. `vec(X)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[linear_index_unchecked(index, &self.shape)]
    }
}
