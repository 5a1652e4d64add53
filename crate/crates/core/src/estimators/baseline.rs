use crate::error::{Error, Result};
use crate::fft::{circ_xcorr, to_complex, Complex64};
use crate::hashing::{derive_seed, tags};
use crate::network::TensorNetwork;
use crate::sketch::{CountSketchSpec, TensorSketchSpec};
use crate::tensor::SparseTensor;

/// Checks that `tensors` form a chain: a vector, zero or more matrices, a
/// vector, with matching inner dimensions. Returns the `q` bond sizes.
fn chain_bonds(tensors: &[SparseTensor]) -> Result<Vec<usize>> {
    let bad = |msg: String| Err(Error::Config(format!("not a vector-matrix-vector chain: {msg}")));
    if tensors.len() < 2 {
        return bad(format!("{} tensors", tensors.len()));
    }
    let last = tensors.len() - 1;
    let mut bonds = Vec::with_capacity(last);
    for (k, t) in tensors.iter().enumerate() {
        let want = if k == 0 || k == last { 1 } else { 2 };
        if t.order() != want {
            return bad(format!("tensor {} has order {}", k + 1, t.order()));
        }
        if k > 0 && t.shape()[0] != bonds[k - 1] {
            return bad(format!("tensor {} does not match its left neighbour", k + 1));
        }
        if k < last {
            bonds.push(*t.shape().last().unwrap());
        }
    }
    Ok(bonds)
}

/// The chain `x_1 - X_2 - ... - X_q - x_{q+1}` as a network.
pub fn chain_network(tensors: Vec<SparseTensor>) -> Result<TensorNetwork> {
    let q = chain_bonds(&tensors)?.len();
    // bond i joins the last mode of tensor i and the first mode of tensor i+1
    let contractions = (0..q).map(|i| (2 * i + 1, 2 * i + 2)).collect();
    TensorNetwork::try_new(tensors, contractions)
}

/// Splits a chain-shaped network back into its tensors, in chain order.
pub fn chain_tensors(net: &TensorNetwork) -> Result<Vec<SparseTensor>> {
    let tensors = net.tensors().to_vec();
    let q = chain_bonds(&tensors)?.len();
    let expected: Vec<(usize, usize)> = (0..q).map(|i| (2 * i + 1, 2 * i + 2)).collect();
    if net.contractions() != expected.as_slice() {
        return Err(Error::Config("contractions do not link consecutive tensors".into()));
    }
    Ok(tensors)
}

/// One sample of the earlier chain estimator: bond `i` gets an independent
/// count sketch `C_i`, the end vectors are count-sketched, each matrix is
/// sketched by the tensor sketch over its two bonds, and the sketches are
/// folded left to right with circular cross-correlation. The first
/// component of the fold is the estimate.
pub fn baseline_chain_once(tensors: &[SparseTensor], m: usize, seed: u64) -> Result<f64> {
    if !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    let bonds = chain_bonds(tensors)?;
    let cs: Vec<CountSketchSpec> = bonds
        .iter()
        .enumerate()
        .map(|(i, &n)| CountSketchSpec::new(m, n, derive_seed(seed, tags::CONTRACTION, i as u64)))
        .collect();
    let last = tensors.len() - 1;
    let mut acc: Option<Vec<Complex64>> = None;
    for (k, t) in tensors.iter().enumerate() {
        let sketch = if k == 0 {
            cs[0].apply(t)?
        } else if k == last {
            cs[last - 1].apply(t)?
        } else {
            TensorSketchSpec::from_components(m, vec![cs[k - 1].clone(), cs[k].clone()])?.apply_tensor(t)?
        };
        let sketch = to_complex(&sketch);
        acc = Some(match acc {
            None => sketch,
            Some(prev) => circ_xcorr(&prev, &sketch)?,
        });
    }
    Ok(acc.unwrap()[0].re)
}
