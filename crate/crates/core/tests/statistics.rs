//! Monte-Carlo checks of the estimators against exact oracles.

mod common;

use rayon::prelude::*;
use tnsketch::apps::{relations_to_network, triangles_to_network};
use tnsketch::estimators::{
    chain_network, estimate_general_once, variance_experiment, AcyclicPlan, Estimator,
};
use tnsketch::hashing::derive_seed;
use tnsketch::network::{default_root, normalize_wlog};
use tnsketch::oracle::{contract_exact, join_size_nested_loop, triangle_count_exact, OracleBudget};
use tnsketch::{SparseTensor, TensorNetwork};

use common::*;

fn sample(k: usize, f: impl Fn(u64) -> f64 + Sync) -> Vec<f64> {
    (0..k as u64).into_par_iter().map(|s| f(derive_seed(77, 3, s))).collect()
}

fn exact(net: &TensorNetwork) -> f64 {
    contract_exact(net, OracleBudget::default()).unwrap().scalar_value()
}

#[test]
fn general_dot_product_variance() {
    let mut r = rng(20);
    let (x, y) = (int_tensor(&mut r, &[8], -4, 4), int_tensor(&mut r, &[8], -4, 4));
    let bound_scale = x.frobenius_norm_sq() * y.frobenius_norm_sq();
    let net = TensorNetwork::new(vec![x, y], vec![(1, 2)]);
    for m in [2, 8] {
        let values = sample(20_000, |s| estimate_general_once(&net, m, s).unwrap());
        let (mean, var, se) = moments(&values);
        assert!((mean - exact(&net)).abs() <= 4.0 * se, "m={m}: mean {mean}");
        assert!(var <= 1.2 * 3.0 / m as f64 * bound_scale, "m={m}: variance {var}");
    }
}

#[test]
fn acyclic_short_chain_unbiased() {
    let net = short_chain(&mut rng(21), 4);
    let plan = AcyclicPlan::new(&net, default_root(&net)).unwrap();
    let values = sample(20_000, |s| plan.estimate_once(32, s).unwrap());
    let (mean, _, se) = moments(&values);
    assert!((mean - exact(&net)).abs() <= 4.0 * se, "mean {mean} vs {}", exact(&net));
}

#[test]
fn acyclic_matrix_path_variance() {
    let mut r = rng(22);
    let mut tensors = vec![int_tensor(&mut r, &[3], -2, 2)];
    tensors.extend((0..3).map(|_| int_tensor(&mut r, &[3, 3], -2, 2)));
    tensors.push(int_tensor(&mut r, &[3], -2, 2));
    let net = chain_network(tensors).unwrap();
    let stats = variance_experiment(&net, Estimator::Acyclic, 16, 20_000, 5, true).unwrap();
    assert!(stats.ratio.unwrap() <= 1.2, "{stats:?}");
    assert!((stats.mean - stats.exact.unwrap()).abs() <= 4.0 * stats.std_err, "{stats:?}");
}

#[test]
fn acyclic_roots_agree_in_mean() {
    let net = tree(&mut rng(23), 2);
    let want = exact(&net);
    for root in [1, 4] {
        let plan = AcyclicPlan::new(&net, root).unwrap();
        let values = sample(10_000, |s| plan.estimate_once(16, s).unwrap());
        let (mean, _, se) = moments(&values);
        assert!((mean - want).abs() <= 4.0 * se, "root {root}: {mean} vs {want}");
    }
}

#[test]
fn general_on_acyclic_network_unbiased() {
    let net = tree(&mut rng(24), 2);
    let values = sample(10_000, |s| estimate_general_once(&net, 64, s).unwrap());
    let (mean, _, se) = moments(&values);
    assert!((mean - exact(&net)).abs() <= 4.0 * se);
}

#[test]
fn variance_experiment_general_dot_product() {
    let mut r = rng(25);
    let net = TensorNetwork::new(vec![int_tensor(&mut r, &[8], -4, 4), int_tensor(&mut r, &[8], -4, 4)], vec![(1, 2)]);
    let stats = variance_experiment(&net, Estimator::General, 4, 20_000, 1, true).unwrap();
    assert_eq!(stats.t, 1);
    assert!(stats.ratio.unwrap() <= 1.2, "{stats:?}");
    let exact = variance_experiment(&net, Estimator::Exact, 4, 2, 1, false).unwrap();
    assert_eq!(exact.variance, 0.0);
}

#[test]
fn baseline_exceeds_lower_bound_while_acyclic_stays_below() {
    let chain = vec![ones(&[2]), ones(&[2, 2]), ones(&[2, 2]), ones(&[2, 2]), ones(&[2])];
    let net = chain_network(chain).unwrap();
    let base = variance_experiment(&net, Estimator::BaselineChain, 4, 20_000, 2, true).unwrap();
    assert!(base.variance >= 0.8 * base.bound_lower.unwrap(), "{base:?}");
    assert!((base.mean - 16.0).abs() <= 4.0 * base.std_err, "{base:?}");
    let ours = variance_experiment(&net, Estimator::Acyclic, 4, 20_000, 2, true).unwrap();
    assert!(ours.ratio.unwrap() <= 1.2, "{ours:?}");
}

#[test]
fn join_estimates_match_nested_loops() {
    for seed in 0..3 {
        let q = four_way_join(&mut rng(30 + seed), 20);
        let want = join_size_nested_loop(&q) as f64;
        let (net, _) = relations_to_network(&q).unwrap();
        assert_eq!(exact(&net), want);
        let (normalized, _) = normalize_wlog(&net).unwrap();
        let values = sample(10_000, |s| estimate_general_once(&normalized, 64, s).unwrap());
        let (mean, _, se) = moments(&values);
        assert!((mean - want).abs() <= 4.0 * se, "seed {seed}: {mean} vs {want}");
    }
}

#[test]
fn triangle_estimates_on_random_digraph() {
    let g = random_digraph(&mut rng(40), 50, 0.1);
    let want = triangle_count_exact(&g.adjacency()).unwrap();
    let net = triangles_to_network(&g);
    assert_eq!(exact(&net), want);
    let values = sample(5_000, |s| estimate_general_once(&net, 64, s).unwrap());
    let (mean, _, se) = moments(&values);
    assert!((mean - want).abs() <= 4.0 * se, "{mean} vs {want}");
}

#[test]
fn scalar_only_networks_are_exact() {
    let m = SparseTensor::from_dense(vec![3, 3], &[1., 2., 3., 4., 5., 6., 7., 8., 9.]).unwrap();
    let (normalized, _) = normalize_wlog(&TensorNetwork::new(vec![m], vec![(1, 2)])).unwrap();
    for s in 0..10 {
        assert_eq!(estimate_general_once(&normalized, 4, s).unwrap(), 15.0);
    }
}
