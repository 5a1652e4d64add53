//! Tensor networks over globally numbered modes.
//!
//! Modes are numbered `1..=q` consecutively across the tensors in list
//! order, so tensor `k` owns a contiguous block of global modes. Tensors are
//! addressed by their 0-based position in the list.

mod io;
mod normalize;
mod tree;

use std::collections::{BTreeMap, VecDeque};

pub use io::{read_network, NetworkFile, TensorFile};
pub use normalize::{normalize_wlog, NormalizationStep, Provenance};
pub use tree::{build_rooted_tree, default_root, RootedTree};

use crate::error::{Diagnostic, Error, Result};
use crate::tensor::SparseTensor;

#[derive(Clone, Debug, PartialEq)]
pub struct TensorNetwork {
    tensors: Vec<SparseTensor>,
    /// Sorted, deduplicated pairs with `u <= v`.
    contractions: Vec<(usize, usize)>,
    /// `offsets[k]` is the number of global modes before tensor `k`.
    offsets: Vec<usize>,
}

impl TensorNetwork {
    /// Builds a network without checking it; see [`TensorNetwork::validate`].
    /// Contraction pairs are unordered and duplicates collapse.
    pub fn new(tensors: Vec<SparseTensor>, contractions: Vec<(usize, usize)>) -> Self {
        let mut offsets = Vec::with_capacity(tensors.len());
        let mut total = 0;
        for t in &tensors {
            offsets.push(total);
            total += t.order();
        }
        let mut contractions: Vec<(usize, usize)> =
            contractions.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        contractions.sort_unstable();
        contractions.dedup();
        TensorNetwork { tensors, contractions, offsets }
    }

    /// Builds and validates.
    pub fn try_new(tensors: Vec<SparseTensor>, contractions: Vec<(usize, usize)>) -> Result<Self> {
        let net = Self::new(tensors, contractions);
        net.validate().map_err(Error::Validation)?;
        Ok(net)
    }

    pub fn tensors(&self) -> &[SparseTensor] {
        &self.tensors
    }

    pub fn tensor(&self, k: usize) -> &SparseTensor {
        &self.tensors[k]
    }

    pub fn num_tensors(&self) -> usize {
        self.tensors.len()
    }

    pub fn contractions(&self) -> &[(usize, usize)] {
        &self.contractions
    }

    /// Total number of modes `q`.
    pub fn num_modes(&self) -> usize {
        self.offsets.last().map_or(0, |&o| o + self.tensors.last().map_or(0, SparseTensor::order))
    }

    /// `(tensor, 1-based local mode)` owning global mode `u`.
    pub fn mode_owner(&self, u: usize) -> Option<(usize, usize)> {
        if u == 0 || u > self.num_modes() {
            return None;
        }
        let k = self.offsets.partition_point(|&o| o < u) - 1;
        Some((k, u - self.offsets[k]))
    }

    /// Global number of local mode `local` (1-based) of tensor `k`.
    pub fn global_mode(&self, k: usize, local: usize) -> usize {
        self.offsets[k] + local
    }

    /// Global modes of tensor `k`.
    pub fn modes_of(&self, k: usize) -> std::ops::RangeInclusive<usize> {
        self.offsets[k] + 1..=self.offsets[k] + self.tensors[k].order()
    }

    pub fn mode_size(&self, u: usize) -> Option<usize> {
        self.mode_owner(u).map(|(k, l)| self.tensors[k].shape()[l - 1])
    }

    /// Modes that take part in no contraction, in increasing order.
    pub fn free_modes(&self) -> Vec<usize> {
        let degree = self.mode_degrees();
        (1..=self.num_modes()).filter(|&u| degree[u] == 0).collect()
    }

    pub fn is_full(&self) -> bool {
        self.free_modes().is_empty()
    }

    /// `degree[u]` is the number of contractions mode `u` takes part in.
    pub(crate) fn mode_degrees(&self) -> Vec<usize> {
        let mut degree = vec![0; self.num_modes() + 1];
        for &(u, v) in &self.contractions {
            for w in [u, v] {
                if w < degree.len() {
                    degree[w] += 1;
                }
            }
        }
        degree
    }

    /// Checks mode numbering, pairing, and dimension agreement.
    pub fn validate(&self) -> std::result::Result<(), Vec<Diagnostic>> {
        let q = self.num_modes();
        let mut diags = Vec::new();
        for &(u, v) in &self.contractions {
            let mut in_range = true;
            for w in [u, v] {
                if w == 0 || w > q {
                    diags.push(Diagnostic::ModeOutOfRange { mode: w, num_modes: q });
                    in_range = false;
                }
            }
            if u == v {
                diags.push(Diagnostic::SelfPair { mode: u });
            } else if in_range {
                let (n_u, n_v) = (self.mode_size(u).unwrap(), self.mode_size(v).unwrap());
                if n_u != n_v {
                    diags.push(Diagnostic::DimensionMismatch { u, v, n_u, n_v });
                }
            }
        }
        if diags.is_empty() { Ok(()) } else { Err(diags) }
    }

    /// Tensor-level edges `(a, b, u, v)` for each contraction `(u, v)`.
    pub(crate) fn tensor_edges(&self) -> Vec<(usize, usize, usize, usize)> {
        self.contractions
            .iter()
            .map(|&(u, v)| (self.mode_owner(u).unwrap().0, self.mode_owner(v).unwrap().0, u, v))
            .collect()
    }

    /// A cycle of the tensor multigraph as 1-based tensor numbers, if any.
    /// Self-contractions and parallel contractions count as cycles.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let p = self.num_tensors();
        let mut uf = UnionFind::new(p);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); p];
        for (a, b, _, _) in self.tensor_edges() {
            if a == b {
                return Some(vec![a + 1]);
            }
            if !uf.union(a, b) {
                let mut path = bfs_path(&adj, a, b);
                path.iter_mut().for_each(|k| *k += 1);
                return Some(path);
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Splits the network into contraction-connected components, each with
    /// its original tensor indices.
    pub fn connected_components(&self) -> Vec<Component> {
        let p = self.num_tensors();
        let mut uf = UnionFind::new(p);
        for (a, b, _, _) in self.tensor_edges() {
            uf.union(a, b);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for k in 0..p {
            groups.entry(uf.find(k)).or_default().push(k);
        }
        let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
        comps.sort_by_key(|g| g[0]);
        comps.into_iter().map(|g| self.subnetwork(g)).collect()
    }

    /// The network induced by the given tensors (which must be closed under
    /// contraction), renumbered.
    fn subnetwork(&self, tensors: Vec<usize>) -> Component {
        let mut renumber = BTreeMap::new();
        let mut next = 0;
        for &k in &tensors {
            for u in self.modes_of(k) {
                next += 1;
                renumber.insert(u, next);
            }
        }
        let contractions = self
            .contractions
            .iter()
            .filter_map(|(u, v)| Some((*renumber.get(u)?, *renumber.get(v)?)))
            .collect();
        let network = TensorNetwork::new(tensors.iter().map(|&k| self.tensors[k].clone()).collect(), contractions);
        Component { tensors, network }
    }

    /// Fixes the free modes listed in `assignment` (global mode, index) and
    /// returns the network over the remaining modes, renumbered.
    pub fn slice_free_modes(&self, assignment: &[(usize, usize)]) -> Result<TensorNetwork> {
        let degree = self.mode_degrees();
        let mut fixed: Vec<Vec<Option<usize>>> = self.tensors.iter().map(|t| vec![None; t.order()]).collect();
        for &(u, i) in assignment {
            let (k, l) = self.mode_owner(u).ok_or(Error::InvalidMode { mode: u, order: self.num_modes() })?;
            if degree[u] != 0 {
                return Err(Error::Config(format!("mode {u} is contracted and cannot be fixed")));
            }
            fixed[k][l - 1] = Some(i);
        }
        let mut renumber = vec![0; self.num_modes() + 1];
        let mut next = 0;
        for (k, f) in fixed.iter().enumerate() {
            for (l, slot) in f.iter().enumerate() {
                if slot.is_none() {
                    next += 1;
                    renumber[self.global_mode(k, l + 1)] = next;
                }
            }
        }
        let tensors = self.tensors.iter().zip(&fixed).map(|(t, f)| t.slice(f)).collect::<Result<Vec<_>>>()?;
        let contractions = self.contractions.iter().map(|&(u, v)| (renumber[u], renumber[v])).collect();
        Ok(TensorNetwork::new(tensors, contractions))
    }

    /// `prod_k ||X_k||_F^2`.
    pub fn norm_product_sq(&self) -> f64 {
        self.tensors.iter().map(SparseTensor::frobenius_norm_sq).product()
    }
}

/// A connected piece of a network and the original indices of its tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub tensors: Vec<usize>,
    pub network: TensorNetwork,
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

fn bfs_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([from]);
    prev[from] = from;
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        for &y in &adj[x] {
            if prev[y] == usize::MAX {
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    let mut path = vec![to];
    while *path.last().unwrap() != from {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    path
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn ones(shape: &[usize]) -> SparseTensor {
        let cells: usize = shape.iter().product();
        SparseTensor::from_dense(shape.to_vec(), &vec![1.0; cells]).unwrap()
    }

    /// Four tensors of orders 1, 2, 3, 2 with E = {(1,5),(3,4),(6,7)}.
    pub fn example_network(n: usize) -> TensorNetwork {
        TensorNetwork::new(
            vec![ones(&[n]), ones(&[n, n]), ones(&[n, n, n]), ones(&[n, n])],
            vec![(1, 5), (3, 4), (6, 7)],
        )
    }

    /// Seven-tensor tree rooted naturally at tensor 0.
    pub fn tree_network(n: usize) -> TensorNetwork {
        TensorNetwork::new(
            vec![
                ones(&[n, n, n]),
                ones(&[n, n, n]),
                ones(&[n]),
                ones(&[n, n]),
                ones(&[n]),
                ones(&[n]),
                ones(&[n]),
            ],
            vec![(1, 4), (2, 7), (3, 8), (5, 10), (6, 11), (9, 12)],
        )
    }
}
