use std::collections::HashMap;

use super::{free_layout, mode_classes};
use crate::error::{Error, Result};
use crate::network::TensorNetwork;
use crate::tensor::SparseTensor;

/// Sparse table over index classes.
struct Factor {
    labels: Vec<usize>,
    cells: HashMap<Vec<usize>, f64>,
}

impl Factor {
    /// Tensor entries relabelled by class; repeated labels keep the diagonal.
    fn from_tensor(t: &SparseTensor, classes: &[usize]) -> Self {
        let mut labels = Vec::new();
        let mut first = Vec::with_capacity(classes.len());
        for &c in classes {
            match labels.iter().position(|&l| l == c) {
                Some(p) => first.push(p),
                None => {
                    first.push(labels.len());
                    labels.push(c);
                }
            }
        }
        let mut cells = HashMap::new();
        'entry: for (idx, v) in t.iter() {
            let mut key = vec![0; labels.len()];
            for (j, &p) in first.iter().enumerate() {
                if key[p] != 0 && key[p] != idx[j] {
                    continue 'entry;
                }
                key[p] = idx[j];
            }
            *cells.entry(key).or_insert(0.0) += v;
        }
        Factor { labels, cells }
    }

    /// Hash join on shared labels.
    fn join(&self, other: &Factor) -> Factor {
        let shared: Vec<(usize, usize)> = self
            .labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| other.labels.iter().position(|m| m == l).map(|j| (i, j)))
            .collect();
        let extra: Vec<usize> = (0..other.labels.len()).filter(|j| !shared.iter().any(|s| s.1 == *j)).collect();
        let mut index: HashMap<Vec<usize>, Vec<(&Vec<usize>, f64)>> = HashMap::new();
        for (key, &v) in &other.cells {
            index.entry(shared.iter().map(|s| key[s.1]).collect()).or_default().push((key, v));
        }
        let mut cells = HashMap::new();
        for (key, &a) in &self.cells {
            let probe: Vec<usize> = shared.iter().map(|s| key[s.0]).collect();
            for &(okey, b) in index.get(&probe).map_or(&[][..], Vec::as_slice) {
                let mut k = key.clone();
                k.extend(extra.iter().map(|&j| okey[j]));
                *cells.entry(k).or_insert(0.0) += a * b;
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(extra.iter().map(|&j| other.labels[j]));
        Factor { labels, cells }
    }

    /// Sums out every label not in `keep`.
    fn marginalize(self, keep: impl Fn(usize) -> bool) -> Factor {
        let kept: Vec<usize> = (0..self.labels.len()).filter(|&j| keep(self.labels[j])).collect();
        if kept.len() == self.labels.len() {
            return self;
        }
        let mut cells = HashMap::new();
        for (key, v) in self.cells {
            *cells.entry(kept.iter().map(|&j| key[j]).collect()).or_insert(0.0) += v;
        }
        Factor { labels: kept.iter().map(|&j| self.labels[j]).collect(), cells }
    }
}

/// Exact contraction by folding tensors in `order` (a permutation of the
/// 0-based tensor positions), summing each index out as soon as no
/// remaining tensor uses it.
pub fn contract_exact_pairwise(net: &TensorNetwork, order: &[usize]) -> Result<SparseTensor> {
    net.validate().map_err(Error::Validation)?;
    let p = net.num_tensors();
    let mut seen = vec![false; p];
    if order.len() != p || order.iter().any(|&k| k >= p || std::mem::replace(&mut seen[k], true)) {
        return Err(Error::Config(format!("contraction order {order:?} is not a permutation of 0..{p}")));
    }
    let (class, num_classes) = mode_classes(net);
    let (shape, free_classes) = free_layout(net, &class);
    let tensor_classes: Vec<Vec<usize>> = (0..p).map(|k| net.modes_of(k).map(|u| class[u]).collect()).collect();
    // uses[c]: how many tensors not yet folded mention class c
    let mut uses = vec![0usize; num_classes];
    for cls in &tensor_classes {
        let mut distinct = cls.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for c in distinct {
            uses[c] += 1;
        }
    }
    let mut is_free = vec![false; num_classes];
    for &c in &free_classes {
        is_free[c] = true;
    }

    let mut acc = Factor { labels: Vec::new(), cells: HashMap::from([(Vec::new(), 1.0)]) };
    for &k in order {
        acc = acc.join(&Factor::from_tensor(net.tensor(k), &tensor_classes[k]));
        let mut distinct = tensor_classes[k].clone();
        distinct.sort_unstable();
        distinct.dedup();
        for c in distinct {
            uses[c] -= 1;
        }
        acc = acc.marginalize(|c| is_free[c] || uses[c] > 0);
    }
    let perm: Vec<usize> =
        free_classes.iter().map(|c| acc.labels.iter().position(|l| l == c).expect("free class survives")).collect();
    let mut result = SparseTensor::zeros(shape)?;
    let mut cells: Vec<_> = acc.cells.into_iter().collect();
    cells.sort_by(|a, b| a.0.cmp(&b.0));
    for (key, v) in cells {
        let idx: Vec<usize> = perm.iter().map(|&j| key[j]).collect();
        result.add(&idx, v)?;
    }
    Ok(result)
}
