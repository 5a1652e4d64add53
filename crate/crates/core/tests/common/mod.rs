//! Fixture networks shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnsketch::apps::{JoinQuery, Relation};
use tnsketch::{SparseTensor, TensorNetwork};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ones(shape: &[usize]) -> SparseTensor {
    let cells: usize = shape.iter().product();
    SparseTensor::from_dense(shape.to_vec(), &vec![1.0; cells]).unwrap()
}

/// Dense tensor with integer entries drawn from `lo..=hi`.
pub fn int_tensor(rng: &mut ChaCha8Rng, shape: &[usize], lo: i64, hi: i64) -> SparseTensor {
    let cells: usize = shape.iter().product();
    let values: Vec<f64> = (0..cells).map(|_| rng.gen_range(lo..=hi) as f64).collect();
    SparseTensor::from_dense(shape.to_vec(), &values).unwrap()
}

/// Three `n x n` matrices closed into a cycle: `tr(X Y Z)` up to mode order.
pub fn triangle(rng: &mut ChaCha8Rng, n: usize) -> TensorNetwork {
    let t: Vec<SparseTensor> = (0..3).map(|_| int_tensor(rng, &[n, n], -3, 3)).collect();
    TensorNetwork::new(t, vec![(2, 3), (4, 5), (1, 6)])
}

/// Seven-tensor tree: two order-3 tensors, one order-2, four vectors.
pub fn tree(rng: &mut ChaCha8Rng, n: usize) -> TensorNetwork {
    let shapes: [&[usize]; 7] = [&[n, n, n], &[n, n, n], &[n], &[n, n], &[n], &[n], &[n]];
    TensorNetwork::new(
        shapes.iter().map(|s| int_tensor(rng, s, -2, 2)).collect(),
        vec![(1, 4), (2, 7), (3, 8), (5, 10), (6, 11), (9, 12)],
    )
}

/// Vector, matrix, vector chain.
pub fn short_chain(rng: &mut ChaCha8Rng, n: usize) -> TensorNetwork {
    TensorNetwork::new(
        vec![int_tensor(rng, &[n], -3, 3), int_tensor(rng, &[n, n], -3, 3), int_tensor(rng, &[n], -3, 3)],
        vec![(1, 2), (3, 4)],
    )
}

/// Four tensors of orders 1, 2, 3, 2 with free modes 2 and 8.
pub fn example_network(rng: &mut ChaCha8Rng, n: usize) -> TensorNetwork {
    TensorNetwork::new(
        vec![
            int_tensor(rng, &[n], -3, 3),
            int_tensor(rng, &[n, n], -3, 3),
            int_tensor(rng, &[n, n, n], -3, 3),
            int_tensor(rng, &[n, n], -3, 3),
        ],
        vec![(1, 5), (3, 4), (6, 7)],
    )
}

/// Direct summation `Y(i2, i8) = sum X1(i1) X2(i2,i3) X3(i3,i1,i6) X4(i6,i8)`.
pub fn example_network_oracle(net: &TensorNetwork) -> SparseTensor {
    let n = net.tensor(0).shape()[0];
    let [x1, x2, x3, x4] = [0, 1, 2, 3].map(|k| net.tensor(k));
    let mut y = SparseTensor::zeros(vec![n, n]).unwrap();
    for i2 in 1..=n {
        for i8 in 1..=n {
            let mut s = 0.0;
            for i1 in 1..=n {
                for i3 in 1..=n {
                    for i6 in 1..=n {
                        s += x1.get(&[i1]) * x2.get(&[i2, i3]) * x3.get(&[i3, i1, i6]) * x4.get(&[i6, i8]);
                    }
                }
            }
            y.set(&[i2, i8], s).unwrap();
        }
    }
    y
}

/// Random valid network with at most `max_modes` modes of size at most
/// `max_n`. Contractions may pair modes of the same tensor, repeat a tensor
/// pair, or share a mode between several contractions. With `full`, every
/// mode ends up contracted.
pub fn random_network(rng: &mut ChaCha8Rng, max_modes: usize, max_n: usize, full: bool) -> TensorNetwork {
    loop {
        let q = rng.gen_range(1..=max_modes);
        // split q modes into tensors of order 1..=3, plus an occasional scalar
        let mut orders = Vec::new();
        let mut left = q;
        while left > 0 {
            let o = rng.gen_range(1..=left.min(3));
            orders.push(o);
            left -= o;
        }
        if rng.gen_bool(0.15) {
            orders.push(0);
        }
        let mut edges = Vec::new();
        let extra = rng.gen_range(0..=q);
        for _ in 0..extra {
            let u = rng.gen_range(1..=q);
            let v = rng.gen_range(1..=q);
            if u != v {
                edges.push((u.min(v), u.max(v)));
            }
        }
        if full {
            // contract every still-free mode with a random partner
            let mut degree = vec![0; q + 1];
            for &(u, v) in &edges {
                degree[u] += 1;
                degree[v] += 1;
            }
            if q < 2 {
                continue;
            }
            for u in 1..=q {
                if degree[u] == 0 {
                    let mut v = rng.gen_range(1..=q);
                    while v == u {
                        v = rng.gen_range(1..=q);
                    }
                    edges.push((u.min(v), u.max(v)));
                    degree[u] += 1;
                    degree[v] += 1;
                }
            }
        }
        // modes joined by contractions share a size
        let mut class: Vec<usize> = (0..=q).collect();
        fn find(c: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while c[r] != r {
                r = c[r];
            }
            c[x] = r;
            r
        }
        for &(u, v) in &edges {
            let (a, b) = (find(&mut class, u), find(&mut class, v));
            class[a] = b;
        }
        let class_size: Vec<usize> = (0..=q).map(|_| rng.gen_range(1..=max_n)).collect();
        let sizes: Vec<usize> = (0..=q).map(|u| class_size[find(&mut class, u)]).collect();
        let mut next = 1;
        let mut tensors = Vec::new();
        for &o in &orders {
            let shape: Vec<usize> = (next..next + o).map(|u| sizes[u]).collect();
            next += o;
            let cells: usize = shape.iter().product();
            let values: Vec<f64> =
                (0..cells).map(|_| if rng.gen_bool(0.7) { rng.gen_range(-3..=3) as f64 } else { 0.0 }).collect();
            tensors.push(SparseTensor::from_dense(shape, &values).unwrap());
        }
        return TensorNetwork::try_new(tensors, edges).expect("generator builds valid networks");
    }
}

fn relation(name: &str, attrs: &[&str], rows: Vec<Vec<i64>>) -> Relation {
    Relation::new(
        name,
        attrs.iter().map(|s| s.to_string()).collect(),
        rows.into_iter().map(|r| r.into_iter().map(|v| v.to_string()).collect()).collect(),
    )
    .unwrap()
}

/// `R1(a) R2(b, c, extra) R3(d) R4(e)` joined on `a = b`, `d = b`, `e = c`,
/// with `rows` random tuples per relation over small domains.
pub fn four_way_join(rng: &mut ChaCha8Rng, rows: usize) -> JoinQuery {
    let mut col = |d: i64| -> Vec<i64> { (0..rows).map(|_| rng.gen_range(1..=d)).collect() };
    let (a, b, c, extra, d, e) = (col(4), col(4), col(3), col(9), col(4), col(3));
    JoinQuery::new(
        vec![
            relation("R1", &["a"], a.into_iter().map(|x| vec![x]).collect()),
            relation("R2", &["b", "c", "extra"], (0..rows).map(|i| vec![b[i], c[i], extra[i]]).collect()),
            relation("R3", &["d"], d.into_iter().map(|x| vec![x]).collect()),
            relation("R4", &["e"], e.into_iter().map(|x| vec![x]).collect()),
        ],
        &[("R1.a", "R2.b"), ("R3.d", "R2.b"), ("R4.e", "R2.c")],
    )
    .unwrap()
}

/// Directed graph on `n` nodes with each ordered pair present with
/// probability `p` (no self loops).
pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> tnsketch::apps::EdgeList {
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in 1..=n {
            if u != v && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    tnsketch::apps::EdgeList::new(n, edges).unwrap()
}

pub fn complete_digraph(n: usize) -> tnsketch::apps::EdgeList {
    random_digraph(&mut rng(0), n, 1.0)
}

/// Sample mean, unbiased variance and standard error of the mean.
pub fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, var, (var / k).sqrt())
}

/// Same entries, allowing `b` to have a zero-padded shape.
pub fn same_entries(a: &SparseTensor, b: &SparseTensor) -> bool {
    a.order() == b.order()
        && a.shape().iter().zip(b.shape()).all(|(x, y)| x <= y)
        && a.nnz() == b.nnz()
        && a.iter().all(|(idx, v)| b.get(idx) == v)
}
