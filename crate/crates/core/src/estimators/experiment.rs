use rayon::prelude::*;
use serde::Serialize;

use super::{baseline_chain_once, chain_tensors, estimate_general_once, AcyclicPlan};
use crate::error::{Error, Result};
use crate::hashing::{derive_seed, tags};
use crate::network::{default_root, normalize_wlog, TensorNetwork};
use crate::oracle::{contract_exact, OracleBudget};

/// Single-shot estimator studied by [`variance_experiment`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Exact,
    General,
    Acyclic,
    /// The earlier chain estimator built from circular cross-correlations.
    BaselineChain,
}

/// Monte-Carlo moments of one estimator on one network.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceStats {
    pub estimator: Estimator,
    pub m: usize,
    pub trials: usize,
    /// Number of contractions.
    pub t: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of `mean`.
    pub std_err: f64,
    /// Exact contraction value, when the oracle fits its default budget.
    pub exact: Option<f64>,
    pub norm_product_sq: f64,
    /// Upper bound on the variance, for estimators that have one.
    pub bound_upper: Option<f64>,
    /// Lower bound on the variance, for the chain baseline.
    pub bound_lower: Option<f64>,
    /// `variance / bound`.
    pub ratio: Option<f64>,
}

/// Runs `trials` independent single-shot estimates with seeds derived from
/// `seed` and summarizes them against the variance bound for the estimator.
///
/// The general bound is `3^t / m` and the acyclic bound `(1 + 8/m)^{2t} - 1`,
/// both times `prod ||X_k||_F^2`. The chain baseline has the lower bound
/// `(3^t / (2 m^2) - 1) prod ||X_k||_F^2` on all-ones chains with `t` even.
pub fn variance_experiment(
    net: &TensorNetwork,
    estimator: Estimator,
    m: usize,
    trials: usize,
    seed: u64,
    parallel: bool,
) -> Result<VarianceStats> {
    if trials < 2 {
        return Err(Error::Config("a variance needs at least two trials".into()));
    }
    net.validate().map_err(Error::Validation)?;
    let (normalized, _) = normalize_wlog(net)?;
    let target = if estimator == Estimator::BaselineChain { net } else { &normalized };
    let exact = contract_exact(target, OracleBudget::default()).ok().map(|t| t.scalar_value());
    let t = target.contractions().len();
    let norms = target.norm_product_sq();

    let chain = if estimator == Estimator::BaselineChain { chain_tensors(net)? } else { Vec::new() };
    let plan = if estimator == Estimator::Acyclic {
        Some(AcyclicPlan::new(&normalized, default_root(&normalized))?)
    } else {
        None
    };
    let exact_value = if estimator == Estimator::Exact {
        exact.ok_or(Error::BudgetExceeded { budget: OracleBudget::default().0 })?
    } else {
        0.0
    };
    let sample = |i: usize| -> Result<f64> {
        let s = derive_seed(seed, tags::TRIAL, i as u64);
        match estimator {
            Estimator::Exact => Ok(exact_value),
            Estimator::General => estimate_general_once(&normalized, m, s),
            Estimator::Acyclic => plan.as_ref().unwrap().estimate_once(m, s),
            Estimator::BaselineChain => baseline_chain_once(&chain, m, s),
        }
    };
    let values = if parallel {
        (0..trials).into_par_iter().map(sample).collect::<Result<Vec<_>>>()?
    } else {
        (0..trials).map(sample).collect::<Result<Vec<_>>>()?
    };

    let (mean, variance) = moments(&values);
    let mf = m as f64;
    let (bound_upper, bound_lower) = match estimator {
        Estimator::Exact => (Some(0.0), None),
        Estimator::General => (Some(3f64.powi(t as i32) / mf * norms), None),
        Estimator::Acyclic => (Some(((1.0 + 8.0 / mf).powi(2 * t as i32) - 1.0) * norms), None),
        Estimator::BaselineChain => (None, Some((3f64.powi(t as i32) / (2.0 * mf * mf) - 1.0) * norms)),
    };
    let ratio = bound_upper.or(bound_lower).filter(|&b| b != 0.0).map(|b| variance / b);
    Ok(VarianceStats {
        estimator,
        m,
        trials,
        t,
        mean,
        variance,
        std_err: (variance / trials as f64).sqrt(),
        exact,
        norm_product_sq: norms,
        bound_upper,
        bound_lower,
        ratio,
    })
}

/// Mean and unbiased variance, accumulated in order (Welford).
fn moments(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    (mean, m2 / (values.len() - 1) as f64)
}
