//! Explicit sketch matrices for small sizes, built directly from the
//! matrix definitions: `C` from its hashes, `T = F^{-1}((F C_1) . ... . (F C_q))`
//! with an explicit DFT matrix, and `R = Q_2 ... Q_q S` from Kronecker
//! products.

use ndarray::{Array2, Zip};

use super::{CountSketchSpec, RecursiveSketchSpec, TensorSketchSpec};
use crate::error::{Error, Result};
use crate::fft::Complex64;

/// Largest column count any dense form will materialize.
pub const MAX_DENSE_COLUMNS: usize = 4096;

/// Largest intermediate matrix (in entries) built on the way to `rs_dense`.
const MAX_DENSE_ENTRIES: usize = 1 << 24;

fn guard(rows: usize, cols: usize) -> Result<()> {
    if cols > MAX_DENSE_COLUMNS || rows.saturating_mul(cols) > MAX_DENSE_ENTRIES {
        return Err(Error::BudgetExceeded { budget: MAX_DENSE_COLUMNS as u64 });
    }
    Ok(())
}

pub fn cs_dense(spec: &CountSketchSpec) -> Result<Array2<f64>> {
    guard(spec.m(), spec.n())?;
    let mut c = Array2::zeros((spec.m(), spec.n()));
    for i in 1..=spec.n() {
        c[[spec.row(i)? - 1, i - 1]] = spec.sign(i)?;
    }
    Ok(c)
}

fn dft_matrix(m: usize, inverse: bool) -> Array2<Complex64> {
    let sign = if inverse { 1.0 } else { -1.0 };
    let scale = if inverse { 1.0 / m as f64 } else { 1.0 };
    Array2::from_shape_fn((m, m), |(k, j)| {
        let angle = sign * 2.0 * std::f64::consts::PI * ((k * j) % m) as f64 / m as f64;
        Complex64::from_polar(scale, angle)
    })
}

/// Row-wise Kronecker product: row `r` of the result is `a[r] (x) b[r]`.
fn face_split(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows, na) = a.dim();
    let nb = b.ncols();
    Array2::from_shape_fn((rows, na * nb), |(r, col)| a[[r, col / nb]] * b[[r, col % nb]])
}

fn complexify(a: &Array2<f64>) -> Array2<Complex64> {
    a.mapv(|v| Complex64::new(v, 0.0))
}

pub fn ts_dense(spec: &TensorSketchSpec) -> Result<Array2<f64>> {
    let m = spec.m();
    let cols: usize = spec.components().iter().map(CountSketchSpec::n).product();
    guard(m, cols)?;
    let f = dft_matrix(m, false);
    let mut acc = Array2::from_elem((m, 1), Complex64::new(1.0, 0.0));
    for c in spec.components() {
        let fc = f.dot(&complexify(&cs_dense(c)?));
        acc = face_split(&acc, &fc);
    }
    let t = dft_matrix(m, true).dot(&acc);
    let max_imag = t.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > 1e-9 {
        return Err(Error::ImaginaryResidue { real: 0.0, imag: max_imag });
    }
    Ok(t.mapv(|z| z.re))
}

pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for ((i, j), &v) in a.indexed_iter() {
        if v != 0.0 {
            let mut block = out.slice_mut(ndarray::s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]);
            Zip::from(&mut block).and(b).for_each(|o, &x| *o = v * x);
        }
    }
    out
}

pub fn rs_dense(spec: &RecursiveSketchSpec) -> Result<Array2<f64>> {
    if spec.order() == 0 {
        return Ok(Array2::ones((1, 1)));
    }
    let cols: usize = spec.domains().iter().product();
    let rows = spec.m().checked_pow(spec.padded_order() as u32).unwrap_or(usize::MAX);
    guard(rows, cols)?;
    let mut r = Array2::ones((1, 1));
    for leaf in spec.leaves() {
        r = kron(&r, &cs_dense(leaf)?);
    }
    for level in spec.levels() {
        let mut q = Array2::ones((1, 1));
        for node in level {
            q = kron(&q, &ts_dense(node)?);
        }
        r = q.dot(&r);
    }
    Ok(r)
}
