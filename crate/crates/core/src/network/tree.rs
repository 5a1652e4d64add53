use std::collections::VecDeque;

use super::TensorNetwork;
use crate::error::{Error, Result};
use crate::tensor::SparseTensor;

/// A spanning tree of a connected acyclic full network, hung from a root.
///
/// Each non-root tensor is viewed through a mode permutation that puts the
/// mode contracted with its parent first; the remaining modes keep their
/// relative order and line up with `children(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    perms: Vec<Vec<usize>>,
    bfs_order: Vec<usize>,
}

impl RootedTree {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, k: usize) -> Option<usize> {
        self.parent[k]
    }

    /// Children of `k`, ordered like the tensor's non-parent modes.
    pub fn children(&self, k: usize) -> &[usize] {
        &self.children[k]
    }

    /// 1-based permutation applied to tensor `k` (new mode `j` is old mode
    /// `perm[j]`).
    pub fn permutation(&self, k: usize) -> &[usize] {
        &self.perms[k]
    }

    /// Tensors in breadth-first order from the root.
    pub fn bfs_order(&self) -> &[usize] {
        &self.bfs_order
    }

    pub fn num_edges(&self) -> usize {
        self.parent.iter().filter(|p| p.is_some()).count()
    }

    pub fn permuted_tensors(&self, net: &TensorNetwork) -> Result<Vec<SparseTensor>> {
        net.tensors().iter().zip(&self.perms).map(|(t, p)| t.permute_modes(p)).collect()
    }

    /// The same network with every tensor permuted as in the tree.
    pub fn permuted_network(&self, net: &TensorNetwork) -> Result<TensorNetwork> {
        let mut renumber = vec![0; net.num_modes() + 1];
        for (k, perm) in self.perms.iter().enumerate() {
            for (j, &old) in perm.iter().enumerate() {
                renumber[net.global_mode(k, old)] = net.global_mode(k, j + 1);
            }
        }
        let contractions = net.contractions().iter().map(|&(u, v)| (renumber[u], renumber[v])).collect();
        Ok(TensorNetwork::new(self.permuted_tensors(net)?, contractions))
    }
}

/// Tensor of maximum order, lowest index on ties.
pub fn default_root(net: &TensorNetwork) -> usize {
    let mut best = 0;
    for (k, t) in net.tensors().iter().enumerate() {
        if t.order() > net.tensor(best).order() {
            best = k;
        }
    }
    best
}

/// Roots a normalized, connected, acyclic, full network at tensor `root`.
pub fn build_rooted_tree(net: &TensorNetwork, root: usize) -> Result<RootedTree> {
    let p = net.num_tensors();
    if root >= p {
        return Err(Error::Config(format!("root {root} is not a tensor of a {p}-tensor network")));
    }
    let free = net.free_modes();
    if !free.is_empty() {
        return Err(Error::PartialNetwork(free));
    }
    if let Some(cycle) = net.find_cycle() {
        return Err(Error::Cyclic { cycle });
    }
    if let Some(issue) = net.normalization_issue().filter(|s| !s.starts_with("mode sizes")) {
        return Err(Error::NotNormalized(issue));
    }
    let partner = |u: usize| -> usize {
        net.contractions().iter().find_map(|&(a, b)| if a == u { Some(b) } else if b == u { Some(a) } else { None }).unwrap()
    };

    let mut parent = vec![None; p];
    let mut children = vec![Vec::new(); p];
    let mut perms = vec![Vec::new(); p];
    let mut visited = vec![false; p];
    let mut bfs_order = Vec::with_capacity(p);
    let mut queue = VecDeque::from([root]);
    visited[root] = true;
    while let Some(k) = queue.pop_front() {
        bfs_order.push(k);
        let mut parent_local = None;
        let mut rest = Vec::new();
        for u in net.modes_of(k) {
            let local = u - net.global_mode(k, 0);
            let (l, _) = net.mode_owner(partner(u)).unwrap();
            if Some(l) == parent[k] {
                parent_local = Some(local);
            } else {
                rest.push(local);
                children[k].push(l);
                parent[l] = Some(k);
                visited[l] = true;
                queue.push_back(l);
            }
        }
        perms[k] = parent_local.into_iter().chain(rest).collect();
    }
    if visited.iter().any(|v| !v) {
        return Err(Error::Disconnected);
    }
    Ok(RootedTree { root, parent, children, perms, bfs_order })
}
