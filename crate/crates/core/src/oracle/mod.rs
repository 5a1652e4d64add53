//! Exact reference computations.
//!
//! Two independent contraction routes are provided: [`contract_exact`]
//! enumerates consistent combinations of nonzeros directly from the
//! definition of contraction, and [`contract_exact_pairwise`] folds tensors
//! together one at a time with hash joins. On integer-valued data both are
//! exact while every partial sum stays below `2^53`.

mod pairwise;

use std::collections::{BTreeMap, HashMap};

pub use pairwise::contract_exact_pairwise;

use crate::apps::JoinQuery;
use crate::error::{Error, Result};
use crate::network::{TensorNetwork, UnionFind};
use crate::tensor::SparseTensor;

/// Default cap on enumeration work.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Maximum number of enumeration steps an oracle may take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget(pub u64);

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget(DEFAULT_BUDGET)
    }
}

/// Groups the global modes of `net` into index classes: modes joined by a
/// chain of contractions share one summation index. Returns the class of
/// every mode (indexed by global mode, slot 0 unused) and the class count.
pub(crate) fn mode_classes(net: &TensorNetwork) -> (Vec<usize>, usize) {
    let q = net.num_modes();
    let mut uf = UnionFind::new(q + 1);
    for &(u, v) in net.contractions() {
        uf.union(u, v);
    }
    let mut ids = HashMap::new();
    let mut class = vec![usize::MAX; q + 1];
    for (u, c) in class.iter_mut().enumerate().skip(1) {
        let r = uf.find(u);
        let next = ids.len();
        *c = *ids.entry(r).or_insert(next);
    }
    (class, ids.len())
}

/// Output shape and per-free-mode class, in increasing free-mode order.
pub(crate) fn free_layout(net: &TensorNetwork, class: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let free = net.free_modes();
    let shape = free.iter().map(|&u| net.mode_size(u).unwrap()).collect();
    (shape, free.iter().map(|&u| class[u]).collect())
}

/// How one local mode of a planned tensor is handled during enumeration.
#[derive(Clone, Copy)]
enum Slot {
    /// Class bound by an earlier tensor; matched through the lookup key.
    Key,
    /// Repeats the class of an earlier local position.
    Same(usize),
    /// First sight of the class: binds it.
    Bind(usize),
}

struct Step<'a> {
    slots: Vec<Slot>,
    key_classes: Vec<usize>,
    groups: HashMap<Vec<usize>, Vec<(&'a [usize], f64)>>,
}

struct Plan<'a> {
    steps: Vec<Step<'a>>,
}

fn plan<'a>(net: &'a TensorNetwork, class: &[usize], num_classes: usize) -> Plan<'a> {
    let p = net.num_tensors();
    let mut bound = vec![false; num_classes];
    let mut done = vec![false; p];
    let mut steps = Vec::with_capacity(p);
    let classes_of = |k: usize| -> Vec<usize> { net.modes_of(k).map(|u| class[u]).collect() };
    for _ in 0..p {
        // Most already-bound modes first, then fewest nonzeros, then index.
        let k = (0..p)
            .filter(|&k| !done[k])
            .max_by_key(|&k| {
                let b = classes_of(k).iter().filter(|&&c| bound[c]).count();
                (b, std::cmp::Reverse(net.tensor(k).nnz()), std::cmp::Reverse(k))
            })
            .unwrap();
        done[k] = true;
        let cls = classes_of(k);
        let key_pos: Vec<usize> = (0..cls.len()).filter(|&j| bound[cls[j]]).collect();
        let slots = (0..cls.len())
            .map(|j| match cls[..j].iter().position(|&d| d == cls[j]) {
                _ if bound[cls[j]] => Slot::Key,
                Some(f) => Slot::Same(f),
                None => Slot::Bind(cls[j]),
            })
            .collect();
        let mut groups: HashMap<Vec<usize>, Vec<(&[usize], f64)>> = HashMap::new();
        for (idx, v) in net.tensor(k).iter() {
            groups.entry(key_pos.iter().map(|&j| idx[j]).collect()).or_default().push((idx, v));
        }
        let key_classes = key_pos.iter().map(|&j| cls[j]).collect();
        for &c in &cls {
            bound[c] = true;
        }
        steps.push(Step { slots, key_classes, groups });
    }
    Plan { steps }
}

/// Exact `tc(X_1 x ... x X_p, E)` by enumerating combinations of nonzeros
/// that agree on every shared index. Free modes index the result in
/// increasing global order; a full network gives an order-0 tensor.
pub fn contract_exact(net: &TensorNetwork, budget: OracleBudget) -> Result<SparseTensor> {
    net.validate().map_err(Error::Validation)?;
    let (class, num_classes) = mode_classes(net);
    let (shape, free_classes) = free_layout(net, &class);
    let plan = plan(net, &class, num_classes);
    let mut state = Enum {
        plan: &plan,
        assign: vec![0; num_classes],
        free_classes: &free_classes,
        out: BTreeMap::new(),
        work: 0,
        budget: budget.0,
    };
    state.descend(0, 1.0)?;
    let entries = state.out.into_iter().collect::<Vec<_>>();
    let mut result = SparseTensor::zeros(shape)?;
    for (idx, v) in entries {
        result.add(&idx, v)?;
    }
    Ok(result)
}

struct Enum<'p, 'a> {
    plan: &'p Plan<'a>,
    assign: Vec<usize>,
    free_classes: &'p [usize],
    out: BTreeMap<Vec<usize>, f64>,
    work: u64,
    budget: u64,
}

impl Enum<'_, '_> {
    fn tick(&mut self) -> Result<()> {
        self.work += 1;
        if self.work > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        Ok(())
    }

    fn descend(&mut self, step: usize, acc: f64) -> Result<()> {
        if step == self.plan.steps.len() {
            self.tick()?;
            let idx: Vec<usize> = self.free_classes.iter().map(|&c| self.assign[c]).collect();
            *self.out.entry(idx).or_insert(0.0) += acc;
            return Ok(());
        }
        let plan = self.plan;
        let st = &plan.steps[step];
        let key: Vec<usize> = st.key_classes.iter().map(|&c| self.assign[c]).collect();
        let Some(candidates) = st.groups.get(&key) else {
            return Ok(());
        };
        'entry: for &(idx, v) in candidates {
            self.tick()?;
            for (j, slot) in st.slots.iter().enumerate() {
                match *slot {
                    Slot::Key => {}
                    Slot::Same(f) => {
                        if idx[j] != idx[f] {
                            continue 'entry;
                        }
                    }
                    Slot::Bind(c) => self.assign[c] = idx[j],
                }
            }
            self.descend(step + 1, acc * v)?;
        }
        Ok(())
    }
}

/// Number of tuples in the equi-join of `query`, by nested loops over the
/// relations with predicates checked as soon as both sides are bound.
pub fn join_size_nested_loop(query: &JoinQuery) -> u64 {
    let rels = query.relations();
    let preds = query.predicates();
    if rels.iter().any(|r| r.rows.is_empty()) {
        return 0;
    }
    type Check = ((usize, usize), (usize, usize));
    // Predicates become checkable once the later relation is chosen.
    let mut checks: Vec<Vec<Check>> = vec![Vec::new(); rels.len()];
    for &(a, b) in preds {
        let later = a.0.max(b.0);
        checks[later].push((a, b));
    }
    fn go(
        depth: usize,
        rels: &[crate::apps::Relation],
        checks: &[Vec<Check>],
        chosen: &mut Vec<usize>,
    ) -> u64 {
        if depth == rels.len() {
            return 1;
        }
        let mut count = 0;
        for row in 0..rels[depth].rows.len() {
            chosen.push(row);
            let ok = checks[depth].iter().all(|&((ra, ca), (rb, cb))| {
                rels[ra].rows[chosen[ra]][ca] == rels[rb].rows[chosen[rb]][cb]
            });
            if ok {
                count += go(depth + 1, rels, checks, chosen);
            }
            chosen.pop();
        }
        count
    }
    go(0, rels, &checks, &mut Vec::with_capacity(rels.len()))
}

/// `tr(A^3)` for a square adjacency matrix: the number of closed directed
/// walks of length three, i.e. each directed triangle counted once per
/// starting vertex.
pub fn triangle_count_exact(adjacency: &SparseTensor) -> Result<f64> {
    let shape = adjacency.shape();
    if shape.len() != 2 || shape[0] != shape[1] {
        return Err(Error::InvalidShape(format!("adjacency must be square, got {shape:?}")));
    }
    let mut rows: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (idx, v) in adjacency.iter() {
        rows.entry(idx[0]).or_default().push((idx[1], v));
    }
    let mut total = 0.0;
    for (idx, a) in adjacency.iter() {
        let (i, j) = (idx[0], idx[1]);
        for &(k, b) in rows.get(&j).map_or(&[][..], Vec::as_slice) {
            total += a * b * adjacency.get(&[k, i]);
        }
    }
    Ok(total)
}
