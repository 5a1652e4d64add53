use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use tnsketch::estimators::{chain_network, variance_experiment, Estimator, VarianceStats, DEFAULT_SEED};
use tnsketch::hashing::derive_seed;
use tnsketch::{Error, SparseTensor, TensorNetwork};

use crate::{set_threads, write_output};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// All-ones chain: chain baseline against the acyclic estimator.
    LowerboundChain,
    /// Unit-norm random-sign chain under the general estimator.
    MomentsGeneral,
    /// Unit-norm random-sign chain under the acyclic estimator.
    MomentsAcyclic,
}

#[derive(Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    fixture: Fixture,
    /// Sketch sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
    m: Vec<usize>,
    /// Chain lengths (number of contractions), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    q: Vec<usize>,
    /// Mode size [default: 2 for lowerbound-chain, 4 otherwise].
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, env = "TNC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    fixture: Fixture,
    q: usize,
    n: usize,
    #[serde(flatten)]
    stats: VarianceStats,
    /// The acyclic estimator on the same chain, for comparison with the baseline.
    #[serde(skip_serializing_if = "Option::is_none")]
    acyclic: Option<VarianceStats>,
}

/// Vector, `q - 1` matrices, vector, all `n`-sized and joined end to end.
fn chain(q: usize, n: usize, entries: impl Fn(usize, &[usize]) -> SparseTensor) -> Result<TensorNetwork, Error> {
    let shapes: Vec<Vec<usize>> =
        (0..=q).map(|k| if k == 0 || k == q { vec![n] } else { vec![n, n] }).collect();
    chain_network(shapes.iter().enumerate().map(|(k, s)| entries(k, s)).collect())
}

fn ones(shape: &[usize]) -> SparseTensor {
    let cells: usize = shape.iter().product();
    SparseTensor::from_dense(shape.to_vec(), &vec![1.0; cells]).expect("positive shape")
}

/// Entries `±1/sqrt(cells)` with hashed signs, so the Frobenius norm is one.
fn unit_signs(seed: u64, k: usize, shape: &[usize]) -> SparseTensor {
    let cells: usize = shape.iter().product();
    let scale = 1.0 / (cells as f64).sqrt();
    let values: Vec<f64> = (0..cells as u64)
        .map(|i| if derive_seed(seed, k as u64, i) & 1 == 0 { scale } else { -scale })
        .collect();
    SparseTensor::from_dense(shape.to_vec(), &values).expect("positive shape")
}

pub fn run(args: &ExperimentArgs) -> Result<(), Error> {
    set_threads(args.parallel)?;
    let parallel = args.parallel > 1;
    let n = args.n.unwrap_or(if args.fixture == Fixture::LowerboundChain { 2 } else { 4 });
    if n == 0 || args.q.contains(&0) || args.m.is_empty() || args.q.is_empty() {
        return Err(Error::Config("--n, --q and --m need positive values".into()));
    }
    let mut text = String::new();
    for &q in &args.q {
        let net = match args.fixture {
            Fixture::LowerboundChain => chain(q, n, |_, s| ones(s))?,
            _ => chain(q, n, |k, s| unit_signs(args.seed, k, s))?,
        };
        for &m in &args.m {
            let run = |e| variance_experiment(&net, e, m, args.trials, args.seed, parallel);
            let (stats, acyclic) = match args.fixture {
                Fixture::LowerboundChain => (run(Estimator::BaselineChain)?, Some(run(Estimator::Acyclic)?)),
                Fixture::MomentsGeneral => (run(Estimator::General)?, None),
                Fixture::MomentsAcyclic => (run(Estimator::Acyclic)?, None),
            };
            let row = Row { fixture: args.fixture, q, n, stats, acyclic };
            text.push_str(&serde_json::to_string(&row)?);
            text.push('\n');
        }
    }
    write_output(args.output.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sign_tensors_have_unit_norm() {
        for shape in [[4].as_slice(), &[4, 4], &[2, 2]] {
            assert_eq!(unit_signs(9, 1, shape).frobenius_norm_sq(), 1.0);
        }
    }

    #[test]
    fn chain_shapes() {
        let net = chain(3, 2, |_, s| ones(s)).unwrap();
        assert_eq!(net.num_tensors(), 4);
        assert_eq!(net.contractions(), &[(1, 2), (3, 4), (5, 6)]);
        assert_eq!(net.norm_product_sq(), 2.0 * 4.0 * 4.0 * 2.0);
    }
}
