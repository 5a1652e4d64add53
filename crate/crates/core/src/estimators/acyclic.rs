use crate::error::{Error, Result};
use crate::hashing::{derive_seed, tags};
use crate::network::{build_rooted_tree, RootedTree, TensorNetwork};
use crate::sketch::{CountSketchSpec, RecursiveSketchSpec};
use crate::tensor::SparseTensor;

/// `C mat(X) R^T z`, where `mat(X)` has the first mode as rows and `R`
/// sketches the remaining modes. One pass over the nonzeros of `X`.
///
/// An order-1 `X` pairs with an order-0 `R`, whose `z` is a single scalar.
pub fn sketched_matvec(
    c: &CountSketchSpec,
    x: &SparseTensor,
    r: &RecursiveSketchSpec,
    z: &[f64],
) -> Result<Vec<f64>> {
    if x.order() != r.order() + 1 {
        return Err(Error::OrderMismatch { expected: r.order() + 1, found: x.order() });
    }
    if z.len() != r.output_dim() {
        return Err(Error::LengthMismatch { left: z.len(), right: r.output_dim() });
    }
    let shape = x.shape();
    if shape[0] > c.n() || shape[1..].iter().zip(r.leaves()).any(|(&n, l)| n > l.n()) {
        return Err(Error::InvalidShape(format!("tensor shape {shape:?} exceeds sketch domains")));
    }
    let mut y = vec![0.0; c.m()];
    for (idx, v) in x.iter() {
        let (sigma, b) = r.hash0(&idx[1..]);
        y[c.row0(idx[0])] += v * z[b] * sigma * c.sign_unchecked(idx[0]);
    }
    Ok(y)
}

/// A rooted acyclic network with its tensors already permuted so that each
/// non-root tensor's first mode faces its parent.
#[derive(Clone, Debug)]
pub struct AcyclicPlan {
    tree: RootedTree,
    tensors: Vec<SparseTensor>,
}

impl AcyclicPlan {
    pub fn new(net: &TensorNetwork, root: usize) -> Result<Self> {
        let tree = build_rooted_tree(net, root)?;
        Self::with_tree(net, tree)
    }

    pub fn with_tree(net: &TensorNetwork, tree: RootedTree) -> Result<Self> {
        let tensors = tree.permuted_tensors(net)?;
        Ok(AcyclicPlan { tree, tensors })
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    /// One sample: `<R_o vec(X_o), r_o>` where `r_k` sketches everything
    /// hanging below tensor `k`.
    pub fn estimate_once(&self, m: usize, seed: u64) -> Result<f64> {
        if !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m));
        }
        let tree = &self.tree;
        let p = self.tensors.len();
        // R_k covers tensor k's child-facing modes; leaf j of R_k is the
        // count sketch shared with child j.
        let specs: Vec<RecursiveSketchSpec> = (0..p)
            .map(|k| {
                let shape = self.tensors[k].shape();
                let child_modes = if tree.parent(k).is_some() { &shape[1..] } else { shape };
                RecursiveSketchSpec::new(m, child_modes, derive_seed(seed, tags::RECURSIVE, k as u64))
            })
            .collect();
        let mut below: Vec<Vec<f64>> = vec![Vec::new(); p];
        for &k in tree.bfs_order().iter().rev() {
            let xs = tree
                .children(k)
                .iter()
                .enumerate()
                .map(|(j, &l)| sketched_matvec(specs[k].leaf(j), &self.tensors[l], &specs[l], &below[l]))
                .collect::<Result<Vec<_>>>()?;
            below[k] = specs[k].apply_children(&xs)?;
        }
        let root = tree.root();
        let top = specs[root].apply_tensor(&self.tensors[root])?;
        Ok(top.iter().zip(&below[root]).map(|(a, b)| a * b).sum())
    }
}

/// One sample of the acyclic estimator on a normalized, connected, acyclic
/// full network rooted as in `tree`.
pub fn estimate_acyclic_once(net: &TensorNetwork, tree: &RootedTree, m: usize, seed: u64) -> Result<f64> {
    AcyclicPlan::with_tree(net, tree.clone())?.estimate_once(m, seed)
}
