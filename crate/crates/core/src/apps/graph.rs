use std::path::Path;

use crate::error::{Error, Result};
use crate::network::TensorNetwork;
use crate::tensor::SparseTensor;

/// Directed graph on nodes `1..=n`; repeated edges add up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeList {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl EdgeList {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parse("graph needs at least one node".into()));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u == 0 || v == 0 || u > n || v > n) {
            return Err(Error::Parse(format!("edge ({u}, {v}) outside nodes 1..={n}")));
        }
        Ok(EdgeList { n, edges })
    }

    /// Parses `n` on the first line, then one `u v` pair per line. Blank
    /// lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).enumerate().filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, first) = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let n = first.parse().map_err(|_| Error::Parse(format!("bad node count {first:?}")))?;
        let edges = lines
            .map(|(no, line)| {
                let bad = || Error::Parse(format!("line {}: expected `u v`, got {line:?}", no + 1));
                let mut it = line.split_whitespace();
                let u = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                let v = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                if it.next().is_some() {
                    return Err(bad());
                }
                Ok((u, v))
            })
            .collect::<Result<Vec<_>>>()?;
        EdgeList::new(n, edges)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        EdgeList::parse(&std::fs::read_to_string(path)?)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacency(&self) -> SparseTensor {
        SparseTensor::from_entries(vec![self.n, self.n], self.edges.iter().map(|&(u, v)| (vec![u, v], 1.0)))
            .expect("edges validated")
    }
}

/// Contraction set closing three adjacency copies into `tr(A A A)`.
pub const TRIANGLE_CONTRACTIONS: [(usize, usize); 3] = [(1, 6), (2, 3), (4, 5)];

/// Three copies of the adjacency matrix contracted into `tr(A^3)`.
pub fn triangles_to_network(graph: &EdgeList) -> TensorNetwork {
    let a = graph.adjacency();
    TensorNetwork::new(vec![a.clone(), a.clone(), a], TRIANGLE_CONTRACTIONS.to_vec())
}

/// Unit updates `(tensor, index)` for streaming the edges into all three
/// copies.
pub fn edge_updates(graph: &EdgeList) -> Vec<(usize, Vec<usize>)> {
    graph.edges.iter().flat_map(|&(u, v)| (0..3).map(move |k| (k, vec![u, v]))).collect()
}
