//! Value-preserving rewrites that bring a network into the form the
//! estimators expect:
//!
//! 1. no contraction joins two modes of the same tensor (traces are taken
//!    exactly),
//! 2. at most one contraction joins any two tensors (parallel contractions
//!    are fused into one mode by lexicographic reshaping),
//! 3. every mode takes part in at most one contraction (a shared mode is
//!    replaced by diagonal copies of itself, one per contraction),
//! 4. all modes have the same size (zero padding).
//!
//! The rules run in that order, repeatedly, until none fires. Tensors keep
//! their positions, so tensor `k` of the output derives from tensor `k` of the
//! input; [`Provenance`] records the per-tensor index maps so that individual
//! input entries can be mapped into the output (streaming updates rely on
//! this).

use std::collections::BTreeMap;

use serde::Serialize;

use super::TensorNetwork;
use crate::error::{Error, Result};
use crate::tensor::{linear_index_unchecked, SparseTensor};

/// One applied rewrite. Mode labels are the input's global mode numbers;
/// modes created during normalization get fresh labels above them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum NormalizationStep {
    SelfContraction { tensor: usize, modes: (usize, usize), summed_out: bool },
    ParallelFusion { tensors: (usize, usize), pairs: Vec<(usize, usize)> },
    DiagonalCopies { tensor: usize, mode: usize, copies: usize },
    Padding { size: usize },
}

/// Index rewrite on one tensor. Positions are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
enum IndexStep {
    /// Keep entries with equal indices at `keep < drop`, remove `drop`, and
    /// with `sum_out` also remove `keep`.
    Trace { keep: usize, drop: usize, sum_out: bool },
    /// Repeat the index at `pos` so it occupies `copies` consecutive modes.
    Diagonal { pos: usize, copies: usize },
    /// Replace the modes at `positions` by their lexicographic rank over
    /// `sizes`, stored at the smallest of the positions.
    Fuse { positions: Vec<usize>, sizes: Vec<usize> },
}

impl IndexStep {
    fn map_index(&self, idx: &[usize]) -> Option<Vec<usize>> {
        match self {
            IndexStep::Trace { keep, drop, sum_out } => {
                if idx[*keep] != idx[*drop] {
                    return None;
                }
                let mut out = idx.to_vec();
                out.remove(*drop);
                if *sum_out {
                    out.remove(*keep);
                }
                Some(out)
            }
            IndexStep::Diagonal { pos, copies } => {
                let mut out = idx.to_vec();
                for _ in 1..*copies {
                    out.insert(pos + 1, idx[*pos]);
                }
                Some(out)
            }
            IndexStep::Fuse { positions, sizes } => Some(fuse(idx, positions, |vals| {
                linear_index_unchecked(vals, sizes) + 1
            })),
        }
    }

    fn map_shape(&self, shape: &[usize]) -> Vec<usize> {
        match self {
            IndexStep::Fuse { positions, sizes } => fuse(shape, positions, |_| sizes.iter().product()),
            _ => self.map_index(shape).expect("shape maps through every step"),
        }
    }
}

fn fuse(idx: &[usize], positions: &[usize], combine: impl Fn(&[usize]) -> usize) -> Vec<usize> {
    let vals: Vec<usize> = positions.iter().map(|&p| idx[p]).collect();
    let first = *positions.iter().min().unwrap();
    let mut out = Vec::with_capacity(idx.len() + 1 - positions.len());
    for (p, &i) in idx.iter().enumerate() {
        if p == first {
            out.push(combine(&vals));
        } else if !positions.contains(&p) {
            out.push(i);
        }
    }
    out
}

/// How a normalized network was derived from its input.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    steps: Vec<NormalizationStep>,
    index_maps: Vec<Vec<IndexStep>>,
    input_shapes: Vec<Vec<usize>>,
    free_modes: Vec<(usize, usize)>,
}

impl Provenance {
    pub fn steps(&self) -> &[NormalizationStep] {
        &self.steps
    }

    /// Pairs `(input free mode, output free mode)`, in increasing order.
    /// Free modes keep their relative order.
    pub fn free_modes(&self) -> &[(usize, usize)] {
        &self.free_modes
    }

    /// Position in output tensor `k` that input entry `index` of tensor `k`
    /// contributes to, or `None` if normalization discards it (an
    /// off-diagonal entry of a trace).
    pub fn map_entry(&self, k: usize, index: &[usize]) -> Result<Option<Vec<usize>>> {
        let shape = self.input_shapes.get(k).ok_or(Error::Config(format!("no tensor {k} in network")))?;
        if index.len() != shape.len() || index.iter().zip(shape).any(|(&i, &n)| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: index.to_vec(), shape: shape.clone() });
        }
        let mut idx = index.to_vec();
        for step in &self.index_maps[k] {
            match step.map_index(&idx) {
                Some(next) => idx = next,
                None => return Ok(None),
            }
        }
        Ok(Some(idx))
    }
}

struct Work {
    tensors: Vec<SparseTensor>,
    ids: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    next_id: usize,
    index_maps: Vec<Vec<IndexStep>>,
    steps: Vec<NormalizationStep>,
}

impl Work {
    fn owner(&self, id: usize) -> (usize, usize) {
        for (k, ids) in self.ids.iter().enumerate() {
            if let Some(p) = ids.iter().position(|&x| x == id) {
                return (k, p);
            }
        }
        unreachable!("mode label {id} has no owner")
    }

    fn degree(&self, id: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == id || b == id).count()
    }

    fn canonicalize_edges(&mut self) {
        for e in &mut self.edges {
            *e = (e.0.min(e.1), e.0.max(e.1));
        }
        self.edges.retain(|&(a, b)| a != b);
        self.edges.sort_unstable();
        self.edges.dedup();
    }

    fn apply(&mut self, k: usize, step: IndexStep) {
        let shape = step.map_shape(self.tensors[k].shape());
        self.tensors[k] = self.tensors[k].remap(shape, |idx| step.map_index(idx));
        self.index_maps[k].push(step);
    }

    fn fresh(&mut self) -> usize {
        self.next_id += 1;
        self.next_id
    }

    fn trace_once(&mut self) -> bool {
        let Some(pos) = self.edges.iter().position(|&(a, b)| self.owner(a).0 == self.owner(b).0) else {
            return false;
        };
        let (a, b) = self.edges.remove(pos);
        let ((k, pa), (_, pb)) = (self.owner(a), self.owner(b));
        let (keep, drop) = (pa.min(pb), pa.max(pb));
        let (kept_id, dropped_id) = (self.ids[k][keep], self.ids[k][drop]);
        for e in &mut self.edges {
            if e.0 == dropped_id {
                e.0 = kept_id;
            }
            if e.1 == dropped_id {
                e.1 = kept_id;
            }
        }
        self.canonicalize_edges();
        let sum_out = self.degree(kept_id) == 0;
        self.apply(k, IndexStep::Trace { keep, drop, sum_out });
        self.ids[k].remove(drop);
        if sum_out {
            self.ids[k].remove(keep);
        }
        self.steps.push(NormalizationStep::SelfContraction { tensor: k, modes: (a, b), summed_out: sum_out });
        true
    }

    fn fuse_once(&mut self) -> bool {
        let mut groups: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for &(x, y) in &self.edges {
            let ((kx, _), (ky, _)) = (self.owner(x), self.owner(y));
            let (a, b) = if kx < ky { (x, y) } else { (y, x) };
            groups.entry((kx.min(ky), kx.max(ky))).or_default().push((a, b));
        }
        let found = groups.into_iter().find(|(_, pairs)| {
            pairs.len() > 1 && pairs.iter().all(|&(a, b)| self.degree(a) == 1 && self.degree(b) == 1)
        });
        let Some(((ka, kb), mut pairs)) = found else {
            return false;
        };
        pairs.sort_by_key(|&(a, _)| self.owner(a).1);
        let pos_a: Vec<usize> = pairs.iter().map(|&(a, _)| self.owner(a).1).collect();
        let pos_b: Vec<usize> = pairs.iter().map(|&(_, b)| self.owner(b).1).collect();
        let sizes: Vec<usize> = pos_a.iter().map(|&p| self.tensors[ka].shape()[p]).collect();
        let (fa, fb) = (self.fresh(), self.fresh());
        for (k, positions, fid) in [(ka, pos_a, fa), (kb, pos_b, fb)] {
            let first = *positions.iter().min().unwrap();
            self.apply(k, IndexStep::Fuse { positions: positions.clone(), sizes: sizes.clone() });
            let ids = std::mem::take(&mut self.ids[k]);
            self.ids[k] = ids
                .into_iter()
                .enumerate()
                .filter_map(|(p, id)| if p == first { Some(fid) } else if positions.contains(&p) { None } else { Some(id) })
                .collect();
        }
        self.edges.retain(|e| !pairs.iter().any(|&(a, b)| *e == (a.min(b), a.max(b))));
        self.edges.push((fa, fb));
        self.canonicalize_edges();
        self.steps.push(NormalizationStep::ParallelFusion { tensors: (ka, kb), pairs });
        true
    }

    fn copy_once(&mut self) -> bool {
        let mut shared: Option<usize> = None;
        'outer: for ids in &self.ids {
            for &id in ids {
                if self.degree(id) > 1 {
                    shared = Some(id);
                    break 'outer;
                }
            }
        }
        let Some(id) = shared else {
            return false;
        };
        let (k, pos) = self.owner(id);
        let incident: Vec<usize> =
            self.edges.iter().enumerate().filter(|(_, &(a, b))| a == id || b == id).map(|(i, _)| i).collect();
        let copies = incident.len();
        self.apply(k, IndexStep::Diagonal { pos, copies });
        for (j, &e) in incident.iter().enumerate().skip(1) {
            let fid = self.fresh();
            self.ids[k].insert(pos + j, fid);
            let (a, b) = self.edges[e];
            self.edges[e] = if a == id { (fid, b) } else { (a, fid) };
        }
        self.canonicalize_edges();
        self.steps.push(NormalizationStep::DiagonalCopies { tensor: k, mode: id, copies });
        true
    }

    fn pad(&mut self) -> bool {
        let Some(size) = self.tensors.iter().flat_map(|t| t.shape().iter().copied()).max() else {
            return false;
        };
        let mut changed = false;
        for t in &mut self.tensors {
            if t.shape().iter().any(|&n| n != size) {
                *t = t.pad_modes(&vec![size; t.order()]).expect("padding only grows");
                changed = true;
            }
        }
        if changed {
            self.steps.push(NormalizationStep::Padding { size });
        }
        changed
    }
}

/// Rewrites `net` into normal form. See the module documentation.
pub fn normalize_wlog(net: &TensorNetwork) -> Result<(TensorNetwork, Provenance)> {
    net.validate().map_err(Error::Validation)?;
    let q = net.num_modes();
    let mut w = Work {
        tensors: net.tensors().to_vec(),
        ids: (0..net.num_tensors()).map(|k| net.modes_of(k).collect()).collect(),
        edges: net.contractions().to_vec(),
        next_id: q,
        index_maps: vec![Vec::new(); net.num_tensors()],
        steps: Vec::new(),
    };
    w.canonicalize_edges();
    loop {
        let mut changed = false;
        while w.trace_once() {
            changed = true;
        }
        while w.fuse_once() {
            changed = true;
        }
        while w.copy_once() {
            changed = true;
        }
        changed |= w.pad();
        if !changed {
            break;
        }
    }

    let mut global = BTreeMap::new();
    for ids in &w.ids {
        for &id in ids {
            let next = global.len() + 1;
            global.insert(id, next);
        }
    }
    let contractions = w.edges.iter().map(|(a, b)| (global[a], global[b])).collect();
    let free_modes = net.free_modes().into_iter().map(|u| (u, global[&u])).collect();
    let provenance = Provenance {
        steps: w.steps,
        index_maps: w.index_maps,
        input_shapes: net.tensors().iter().map(|t| t.shape().to_vec()).collect(),
        free_modes,
    };
    Ok((TensorNetwork::new(w.tensors, contractions), provenance))
}

impl TensorNetwork {
    /// Describes the first way in which the network is not in normal form.
    pub fn normalization_issue(&self) -> Option<String> {
        let degree = self.mode_degrees();
        if let Some(u) = (1..degree.len()).find(|&u| degree[u] > 1) {
            return Some(format!("mode {u} takes part in {} contractions", degree[u]));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (a, b, u, v) in self.tensor_edges() {
            if a == b {
                return Some(format!("contraction ({u}, {v}) is within one tensor"));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Some(format!("tensors {} and {} share several contractions", a + 1, b + 1));
            }
        }
        let sizes: std::collections::BTreeSet<usize> =
            self.tensors().iter().flat_map(|t| t.shape().iter().copied()).collect();
        if sizes.len() > 1 {
            return Some(format!("mode sizes {sizes:?} are not uniform"));
        }
        None
    }

    pub fn is_normalized(&self) -> bool {
        self.normalization_issue().is_none()
    }
}
