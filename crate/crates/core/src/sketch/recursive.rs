use super::{CountSketchSpec, TensorSketchSpec};
use crate::error::{Error, Result};
use crate::hashing::{derive_seed, tags};
use crate::tensor::SparseTensor;

/// A recursive sketch `R = Q_2 Q_4 ... Q_q S` of logical order `c`.
///
/// `S` is the Kronecker product of `q` leaf count sketches, where `q` is the
/// padded order (the next power of two at least `max(c, 2)`). Leaves beyond
/// `c` act on a one-element domain, which realizes the `e_1` embedding of
/// order-`c` inputs. Each level `l in {q, q/2, ..., 2}` holds `l/2` tensor
/// sketches over `[m]^2` that reduce adjacent pairs of buckets.
///
/// Logical order 0 is the `1 x 1` identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursiveSketchSpec {
    c: usize,
    q: usize,
    m: usize,
    leaves: Vec<CountSketchSpec>,
    /// `levels[0]` is level `q`, the last entry is level 2.
    levels: Vec<Vec<TensorSketchSpec>>,
}

impl RecursiveSketchSpec {
    /// Fresh sketch whose leaf `k` acts on `[domains[k]]`.
    pub fn new(m: usize, domains: &[usize], seed: u64) -> Self {
        let c = domains.len();
        let leaf = |k: usize, n: usize| CountSketchSpec::new(m, n, derive_seed(seed, tags::LEAF, k as u64));
        Self::assemble(m, c, seed, domains.iter().enumerate().map(|(k, &n)| leaf(k, n)).collect())
    }

    /// Recursive sketch with caller-supplied leaves for the first `c` slots.
    /// Padding leaves and internal nodes are drawn from `seed`.
    pub fn from_leaves(m: usize, leaves: Vec<CountSketchSpec>, seed: u64) -> Result<Self> {
        if let Some(l) = leaves.iter().find(|l| l.m() != m) {
            return Err(Error::LengthMismatch { left: l.m(), right: m });
        }
        Ok(Self::assemble(m, leaves.len(), seed, leaves))
    }

    /// Fully explicit construction, used for fixtures. `levels[0]` is the
    /// widest level.
    pub fn from_parts(
        m: usize,
        c: usize,
        leaves: Vec<CountSketchSpec>,
        levels: Vec<Vec<TensorSketchSpec>>,
    ) -> Result<Self> {
        let q = padded_order(c);
        let bad = |msg: &str| Err(Error::Config(format!("recursive sketch: {msg}")));
        if c == 0 {
            return if leaves.is_empty() && levels.is_empty() { Ok(Self::identity(m)) } else { bad("order 0 takes no parts") };
        }
        if leaves.len() != q || leaves.iter().any(|l| l.m() != m) || leaves[c..].iter().any(|l| l.n() != 1) {
            return bad("expected q leaves over m, padding leaves over a single index");
        }
        let mut width = q / 2;
        for level in &levels {
            if level.len() != width || level.iter().any(|t| t.m() != m || t.order() != 2) {
                return bad("level shapes do not match the padded order");
            }
            width /= 2;
        }
        if width != 0 {
            return bad("wrong number of levels");
        }
        Ok(RecursiveSketchSpec { c, q, m, leaves, levels })
    }

    fn identity(m: usize) -> Self {
        RecursiveSketchSpec { c: 0, q: 0, m, leaves: Vec::new(), levels: Vec::new() }
    }

    fn assemble(m: usize, c: usize, seed: u64, mut leaves: Vec<CountSketchSpec>) -> Self {
        if c == 0 {
            return Self::identity(m);
        }
        let q = padded_order(c);
        for k in c..q {
            leaves.push(CountSketchSpec::new(m, 1, derive_seed(seed, tags::LEAF, k as u64)));
        }
        let mut levels = Vec::new();
        let mut l = q;
        while l >= 2 {
            let level_seed = derive_seed(seed, tags::NODE, l as u64);
            levels.push(
                (0..l / 2)
                    .map(|k| TensorSketchSpec::new(m, &[m, m], derive_seed(level_seed, tags::NODE_PART, k as u64)))
                    .collect(),
            );
            l /= 2;
        }
        RecursiveSketchSpec { c, q, m, leaves, levels }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Logical order `c`.
    pub fn order(&self) -> usize {
        self.c
    }

    pub fn padded_order(&self) -> usize {
        self.q
    }

    /// Length of sketched vectors: `m`, or 1 for the order-0 identity.
    pub fn output_dim(&self) -> usize {
        if self.c == 0 { 1 } else { self.m }
    }

    /// Leaf count sketch `k` (0-based), including padding leaves.
    pub fn leaf(&self, k: usize) -> &CountSketchSpec {
        &self.leaves[k]
    }

    pub fn leaves(&self) -> &[CountSketchSpec] {
        &self.leaves
    }

    /// Tensor sketch nodes of each level, widest level first.
    pub fn levels(&self) -> &[Vec<TensorSketchSpec>] {
        &self.levels
    }

    /// Leaf domain sizes of the logical modes.
    pub fn domains(&self) -> Vec<usize> {
        self.leaves[..self.c].iter().map(CountSketchSpec::n).collect()
    }

    /// `(sign, 1-based bucket)` of column `index`.
    pub fn hash(&self, index: &[usize]) -> Result<(f64, usize)> {
        if index.len() != self.c {
            return Err(Error::OrderMismatch { expected: self.c, found: index.len() });
        }
        if index.iter().zip(&self.leaves).any(|(&i, l)| i == 0 || i > l.n()) {
            return Err(Error::IndexOutOfRange { index: index.to_vec(), shape: self.domains() });
        }
        let (s, b) = self.hash0(index);
        Ok((s, b + 1))
    }

    /// Binary-tree reduction of leaf buckets. Padding indices are 1.
    pub(crate) fn hash0(&self, index: &[usize]) -> (f64, usize) {
        if self.c == 0 {
            return (1.0, 0);
        }
        if self.q <= 64 {
            let mut buf = [0usize; 64];
            self.reduce(index, &mut buf[..self.q])
        } else {
            self.reduce(index, &mut vec![0; self.q])
        }
    }

    fn reduce(&self, index: &[usize], b: &mut [usize]) -> (f64, usize) {
        let mut sign = 1.0;
        for (k, leaf) in self.leaves.iter().enumerate() {
            let i = index.get(k).copied().unwrap_or(1);
            sign *= leaf.sign_unchecked(i);
            b[k] = leaf.row0(i);
        }
        for level in &self.levels {
            for (k, node) in level.iter().enumerate() {
                let (s, h) = node.hash0(&[b[2 * k] + 1, b[2 * k + 1] + 1]);
                sign *= s;
                b[k] = h;
            }
        }
        (sign, b[0])
    }

    /// `R vec(X)` accumulated over the nonzeros of `X`.
    pub fn apply_tensor(&self, x: &SparseTensor) -> Result<Vec<f64>> {
        if x.order() != self.c {
            return Err(Error::OrderMismatch { expected: self.c, found: x.order() });
        }
        if x.shape().iter().zip(&self.leaves).any(|(&n, l)| n > l.n()) {
            return Err(Error::InvalidShape(format!("tensor shape {:?} exceeds sketch domain", x.shape())));
        }
        let mut y = vec![0.0; self.output_dim()];
        for (idx, v) in x.iter() {
            let (s, b) = self.hash0(idx);
            y[b] += s * v;
        }
        Ok(y)
    }

    /// `Q (x_1 (x) ... (x) x_c (x) C_{c+1} e_1 (x) ... (x) C_q e_1)` for
    /// already leaf-sketched children `x_k = C_k v_k`.
    pub fn apply_children(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        if xs.len() != self.c {
            return Err(Error::OrderMismatch { expected: self.c, found: xs.len() });
        }
        if self.c == 0 {
            return Ok(vec![1.0]);
        }
        if let Some(x) = xs.iter().find(|x| x.len() != self.m) {
            return Err(Error::LengthMismatch { left: x.len(), right: self.m });
        }
        let mut current: Vec<Vec<f64>> = xs.to_vec();
        for leaf in &self.leaves[self.c..] {
            current.push(leaf.basis_column(1)?);
        }
        for level in &self.levels {
            current = level
                .iter()
                .enumerate()
                .map(|(k, node)| node.combine_pair(&current[2 * k], &current[2 * k + 1]))
                .collect::<Result<_>>()?;
        }
        Ok(current.swap_remove(0))
    }
}

/// Padded order for `c` logical modes.
pub fn padded_order(c: usize) -> usize {
    if c == 0 { 0 } else { c.next_power_of_two().max(2) }
}
