use super::CountSketchSpec;
use crate::error::{Error, Result};
use crate::fft::{dft_real, idft_in_place};
use crate::hashing::{derive_seed, tags};
use crate::tensor::SparseTensor;

/// A tensor sketch `T = idft((dft C_1) . ... . (dft C_q))` over a shared `m`.
///
/// Column `i = (i_1, ..., i_q)` has sign `prod_k s_k(i_k)` and row
/// `((sum_k h_k(i_k) - q) mod m) + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSketchSpec {
    m: usize,
    components: Vec<CountSketchSpec>,
}

impl TensorSketchSpec {
    /// Independent count sketches over the given mode sizes.
    pub fn new(m: usize, domains: &[usize], seed: u64) -> Self {
        let components = domains
            .iter()
            .enumerate()
            .map(|(k, &n)| CountSketchSpec::new(m, n, derive_seed(seed, tags::COMPONENT, k as u64)))
            .collect();
        TensorSketchSpec { m, components }
    }

    pub fn from_components(m: usize, components: Vec<CountSketchSpec>) -> Result<Self> {
        if let Some(c) = components.iter().find(|c| c.m() != m) {
            return Err(Error::LengthMismatch { left: c.m(), right: m });
        }
        Ok(TensorSketchSpec { m, components })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[CountSketchSpec] {
        &self.components
    }

    /// `(sign, 1-based bucket)` of column `index`.
    pub fn hash(&self, index: &[usize]) -> Result<(f64, usize)> {
        if index.len() != self.order() {
            return Err(Error::OrderMismatch { expected: self.order(), found: index.len() });
        }
        if index.iter().zip(&self.components).any(|(&i, c)| i == 0 || i > c.n()) {
            return Err(Error::IndexOutOfRange {
                index: index.to_vec(),
                shape: self.components.iter().map(CountSketchSpec::n).collect(),
            });
        }
        let (s, b) = self.hash0(index);
        Ok((s, b + 1))
    }

    /// Zero-based bucket. Summing zero-based rows directly gives
    /// `(sum h_k - q) mod m`.
    #[inline]
    pub(crate) fn hash0(&self, index: &[usize]) -> (f64, usize) {
        let mut sign = 1.0;
        let mut bucket = 0usize;
        for (c, &i) in self.components.iter().zip(index) {
            sign *= c.sign_unchecked(i);
            bucket += c.row0(i);
        }
        (sign, bucket % self.m)
    }

    /// `T vec(X)` accumulated over the nonzeros of `X`.
    pub fn apply_tensor(&self, x: &SparseTensor) -> Result<Vec<f64>> {
        if x.order() != self.order() {
            return Err(Error::OrderMismatch { expected: self.order(), found: x.order() });
        }
        if x.shape().iter().zip(&self.components).any(|(&n, c)| n > c.n()) {
            return Err(Error::InvalidShape(format!("tensor shape {:?} exceeds sketch domain", x.shape())));
        }
        let mut y = vec![0.0; self.m];
        for (idx, v) in x.iter() {
            let (s, b) = self.hash0(idx);
            y[b] += s * v;
        }
        Ok(y)
    }

    /// `T (x (x) y)` for a two-component sketch over `[m]^2`, computed as
    /// `idft(dft(C_1 x) . dft(C_2 y))` without forming the outer product.
    pub fn combine_pair(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        if self.order() != 2 {
            return Err(Error::OrderMismatch { expected: 2, found: self.order() });
        }
        let cx = self.components[0].apply_dense(x)?;
        let cy = self.components[1].apply_dense(y)?;
        let mut fx = dft_real(&cx)?;
        let fy = dft_real(&cy)?;
        fx.iter_mut().zip(&fy).for_each(|(a, b)| *a *= b);
        idft_in_place(&mut fx)?;
        Ok(fx.into_iter().map(|z| z.re).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::dense::ts_dense;
    use crate::tensor::{linear_index, multi_index};
    use rand::{Rng, SeedableRng};

    #[test]
    fn order_one_reduces_to_count_sketch() {
        let ts = TensorSketchSpec::new(8, &[10], 3);
        let c = &ts.components()[0];
        for i in 1..=10 {
            assert_eq!(ts.hash(&[i]).unwrap(), (c.sign(i).unwrap(), c.row(i).unwrap()));
        }
        let x = SparseTensor::from_dense(vec![10], &[1., 0., 2., 0., -1., 0., 0., 3., 0., 1.]).unwrap();
        assert_eq!(ts.apply_tensor(&x).unwrap(), c.apply(&x).unwrap());
    }

    #[test]
    fn all_first_rows_give_bucket_one() {
        let comps = (0..3).map(|_| CountSketchSpec::from_tables(5, &[1, -1], &[1, 1]).unwrap()).collect();
        let ts = TensorSketchSpec::from_components(5, comps).unwrap();
        assert_eq!(ts.hash(&[1, 2, 2]).unwrap(), (1.0, 1));
        assert_eq!(ts.hash(&[2, 2, 1]).unwrap(), (1.0, 1));
    }

    #[test]
    fn hash_matches_dense_row_wise_kronecker() {
        for seed in 0..20 {
            for m in [2usize, 4] {
                let ts = TensorSketchSpec::new(m, &[3, 4], seed);
                let dense = ts_dense(&ts).unwrap();
                for col in 1..=12 {
                    let idx = multi_index(col, &[3, 4]).unwrap();
                    let (s, b) = ts.hash(&idx).unwrap();
                    for row in 0..m {
                        let want = if row + 1 == b { s } else { 0.0 };
                        assert!((dense[[row, col - 1]] - want).abs() <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn single_nonzero_gives_single_entry() {
        let ts = TensorSketchSpec::new(8, &[3, 3], 1);
        let x = SparseTensor::from_entries(vec![3, 3], vec![(vec![2, 3], 5.0)]).unwrap();
        let y = ts.apply_tensor(&x).unwrap();
        let (s, b) = ts.hash(&[2, 3]).unwrap();
        assert_eq!(y.iter().filter(|&&v| v != 0.0).count(), 1);
        assert_eq!(y[b - 1], 5.0 * s);
    }

    #[test]
    fn apply_matches_dense_product() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for seed in 0..20 {
            let ts = TensorSketchSpec::new(4, &[3, 3], seed);
            let values: Vec<f64> = (0..9).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let x = SparseTensor::from_dense(vec![3, 3], &values).unwrap();
            let want = ts_dense(&ts).unwrap().dot(&ndarray::Array1::from(values));
            let got = ts.apply_tensor(&x).unwrap();
            assert!(got.iter().zip(want.iter()).all(|(a, b)| (a - b).abs() <= 1e-9));
        }
        assert!(TensorSketchSpec::new(4, &[3, 3], 0).apply_tensor(&SparseTensor::zeros(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn combine_pair_matches_outer_product_sketch() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let m = 8;
        for seed in 0..20 {
            let ts = TensorSketchSpec::new(m, &[m, m], seed);
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut outer = SparseTensor::zeros(vec![m, m]).unwrap();
            for (i, xi) in x.iter().enumerate() {
                for (j, yj) in y.iter().enumerate() {
                    outer.set(&[i + 1, j + 1], xi * yj).unwrap();
                }
            }
            let want = ts.apply_tensor(&outer).unwrap();
            let got = ts.combine_pair(&x, &y).unwrap();
            assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() <= 1e-9));
            assert!(ts.combine_pair(&x, &vec![0.0; m]).unwrap().iter().all(|v| v.abs() <= 1e-12));

            let y2: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ysum: Vec<f64> = y.iter().zip(&y2).map(|(a, b)| a + b).collect();
            let lhs = ts.combine_pair(&x, &ysum).unwrap();
            let r1 = ts.combine_pair(&x, &y).unwrap();
            let r2 = ts.combine_pair(&x, &y2).unwrap();
            assert!(lhs.iter().zip(r1.iter().zip(&r2)).all(|(l, (a, b))| (l - a - b).abs() <= 1e-9));
        }
        let _ = linear_index(&[1], &[1]);
    }
}
