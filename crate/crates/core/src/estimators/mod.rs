//! Randomized contraction estimators and the driver that boosts them.
//!
//! [`estimate`] validates and normalizes a network, picks the estimator,
//! derives the sketch size and repetition count, estimates each connected
//! component independently and reports the median over repetitions.

mod acyclic;
mod baseline;
mod experiment;
mod general;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use acyclic::{estimate_acyclic_once, sketched_matvec, AcyclicPlan};
pub use baseline::{baseline_chain_once, chain_network, chain_tensors};
pub use experiment::{variance_experiment, Estimator, VarianceStats};
pub use general::{estimate_general_once, GeneralSketchState, StreamingSketch, IMAG_TOLERANCE};

use crate::error::{Error, Result};
use crate::hashing::{derive_seed, tags};
use crate::network::{default_root, normalize_wlog, TensorFile, TensorNetwork};
use crate::oracle::{contract_exact, OracleBudget};
use crate::tensor::{multi_index, SparseTensor};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    General,
    Acyclic,
    /// Acyclic when every component is acyclic, general otherwise.
    Auto,
}

/// Sketch size and repetitions, given directly or through an accuracy
/// target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SketchSize {
    Fixed { m: usize, reps: usize },
    Target { epsilon: f64, delta: f64 },
}

impl Default for SketchSize {
    fn default() -> Self {
        SketchSize::Fixed { m: 256, reps: 5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub method: Method,
    pub size: SketchSize,
    pub seed: u64,
    /// Root tensor (0-based, input numbering) for the acyclic estimator.
    pub root: Option<usize>,
    /// Work limit for the exact oracle and for enumerating free-mode entries.
    pub budget: OracleBudget,
    /// Run repetitions on the rayon pool.
    pub parallel: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            method: Method::Auto,
            size: SketchSize::default(),
            seed: DEFAULT_SEED,
            root: None,
            budget: OracleBudget::default(),
            parallel: false,
        }
    }
}

/// Sketch size `m` and repetitions `R` for an `(epsilon, delta)` target on a
/// network with `t` contractions.
///
/// A single estimate is within `epsilon prod ||X_k||_F` with probability at
/// least 3/4 once its variance is below `epsilon^2 / 4` times the squared
/// norm product; the median of `R = ceil(8 ln(1/delta))` such estimates
/// fails with probability at most `delta`.
pub fn derive_parameters(method: Method, t: usize, epsilon: f64, delta: f64) -> Result<(usize, usize)> {
    if !(epsilon > 0.0 && epsilon.is_finite()) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("need epsilon > 0 and 0 < delta < 1, got ({epsilon}, {delta})")));
    }
    let chebyshev = 0.25 * epsilon * epsilon;
    let m = match method {
        Method::Acyclic => (16.0 * t as f64).max(32.0 * t as f64 / chebyshev),
        _ => 3f64.powi(t as i32) / chebyshev,
    };
    let reps = (8.0 * (1.0 / delta).ln()).ceil().max(1.0) as usize;
    Ok((round_up_pow2(m.ceil() as usize), reps))
}

fn round_up_pow2(m: usize) -> usize {
    m.max(1).next_power_of_two()
}

/// Lower median: element `(R - 1) / 2` of the sorted values.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[(sorted.len() - 1) / 2]
}

/// Median of `reps` single-shot estimates with seeds derived from `seed`.
/// Returns the median and the per-repetition values in repetition order.
pub fn median_boost<F>(once: F, reps: usize, seed: u64, parallel: bool) -> Result<(f64, Vec<f64>)>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if reps == 0 {
        return Err(Error::Config("at least one repetition is needed".into()));
    }
    let rep_seed = |r: usize| derive_seed(seed, tags::REPETITION, r as u64);
    let values = if parallel {
        (0..reps).into_par_iter().map(|r| once(rep_seed(r))).collect::<Result<Vec<_>>>()?
    } else {
        (0..reps).map(|r| once(rep_seed(r))).collect::<Result<Vec<_>>>()?
    };
    Ok((median(&values), values))
}

/// Scalar result or, for a partial contraction, the output tensor.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ReportValue {
    Scalar(f64),
    Tensor(TensorFile),
}

impl ReportValue {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            ReportValue::Scalar(v) => Some(*v),
            ReportValue::Tensor(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub value: ReportValue,
    pub method: Method,
    /// Sketch size; absent for the exact method.
    pub m: Option<usize>,
    pub reps: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Per-repetition values for a full contraction.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rep_values: Vec<f64>,
    /// Roots used by the acyclic estimator, one per connected component.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub roots: Vec<usize>,
    /// Exact reference values by name, when requested.
    #[serde(skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub oracles: std::collections::BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub elapsed_ms: f64,
}

impl EstimateReport {
    pub fn scalar(&self) -> Option<f64> {
        self.value.as_scalar()
    }
}

/// Estimates the contraction of `net` as configured. Partial networks are
/// handled entry by entry through [`estimate_partial`].
pub fn estimate(net: &TensorNetwork, config: &EstimatorConfig) -> Result<EstimateReport> {
    net.validate().map_err(Error::Validation)?;
    if !net.is_full() {
        return estimate_partial(net, config);
    }
    let start = Instant::now();
    let mut report = estimate_full(net, config)?;
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// One connected component prepared for repeated sampling.
enum Prepared {
    Constant(f64),
    General(TensorNetwork),
    Acyclic(AcyclicPlan),
}

impl Prepared {
    fn sample(&self, m: usize, seed: u64) -> Result<f64> {
        match self {
            Prepared::Constant(v) => Ok(*v),
            Prepared::General(net) => estimate_general_once(net, m, seed),
            Prepared::Acyclic(plan) => plan.estimate_once(m, seed),
        }
    }
}

fn blank_report(config: &EstimatorConfig) -> EstimateReport {
    EstimateReport {
        value: ReportValue::Scalar(0.0),
        method: config.method,
        m: None,
        reps: 1,
        seed: config.seed,
        epsilon: None,
        delta: None,
        rep_values: Vec::new(),
        roots: Vec::new(),
        oracles: Default::default(),
        notes: Vec::new(),
        elapsed_ms: 0.0,
    }
}

fn estimate_full(net: &TensorNetwork, config: &EstimatorConfig) -> Result<EstimateReport> {
    if let Some(r) = config.root.filter(|&r| r >= net.num_tensors()) {
        return Err(Error::Config(format!("root {r} is not a tensor of a {}-tensor network", net.num_tensors())));
    }
    let (normalized, provenance) = normalize_wlog(net)?;
    let mut report = blank_report(config);
    if !provenance.steps().is_empty() {
        report.notes.push(format!("normalization applied {} step(s)", provenance.steps().len()));
    }
    if config.method == Method::Exact {
        report.value = ReportValue::Scalar(contract_exact(&normalized, config.budget)?.scalar_value());
        return Ok(report);
    }

    let components = normalized.connected_components();
    let method = match config.method {
        Method::Auto if components.iter().all(|c| c.network.is_acyclic()) => Method::Acyclic,
        Method::Auto => Method::General,
        other => other,
    };
    report.method = method;
    let mut prepared = Vec::with_capacity(components.len());
    for comp in &components {
        let cnet = &comp.network;
        if cnet.contractions().is_empty() {
            // a lone order-0 tensor
            prepared.push(Prepared::Constant(cnet.tensor(0).scalar_value()));
        } else if method == Method::Acyclic {
            let root = match config.root {
                Some(r) if comp.tensors.contains(&r) => comp.tensors.iter().position(|&k| k == r).unwrap(),
                _ => default_root(cnet),
            };
            report.roots.push(comp.tensors[root]);
            prepared.push(Prepared::Acyclic(AcyclicPlan::new(cnet, root)?));
        } else {
            prepared.push(Prepared::General(cnet.clone()));
        }
    }
    let sketched = prepared.iter().filter(|p| !matches!(p, Prepared::Constant(_))).count();
    if sketched > 1 {
        report.notes.push(format!(
            "{sketched} connected components estimated with independent sketches and multiplied; \
             sketch size derived from the total contraction count"
        ));
    }

    let (m, reps) = match config.size {
        SketchSize::Fixed { m, reps } => {
            if m == 0 || reps == 0 {
                return Err(Error::Config("m and reps must be positive".into()));
            }
            (round_up_pow2(m), reps)
        }
        SketchSize::Target { epsilon, delta } => {
            report.epsilon = Some(epsilon);
            report.delta = Some(delta);
            derive_parameters(method, normalized.contractions().len(), epsilon, delta)?
        }
    };
    let once = |rep_seed: u64| -> Result<f64> {
        let mut value = 1.0;
        for (c, p) in prepared.iter().enumerate() {
            value *= p.sample(m, derive_seed(rep_seed, tags::COMPONENT, c as u64))?;
        }
        Ok(value)
    };
    let (value, values) = median_boost(once, reps, config.seed, config.parallel)?;
    report.value = ReportValue::Scalar(value);
    report.m = Some(m);
    report.reps = reps;
    report.rep_values = values;
    Ok(report)
}

/// Estimates every entry of a partial contraction: each assignment of the
/// free modes fixes a full network, estimated with its own derived seed.
pub fn estimate_partial(net: &TensorNetwork, config: &EstimatorConfig) -> Result<EstimateReport> {
    net.validate().map_err(Error::Validation)?;
    let free = net.free_modes();
    if free.is_empty() {
        return estimate(net, config);
    }
    let start = Instant::now();
    let shape: Vec<usize> = free.iter().map(|&u| net.mode_size(u).unwrap()).collect();
    let cells = shape.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n as u64));
    if cells.is_none_or(|c| c > config.budget.0) {
        return Err(Error::BudgetExceeded { budget: config.budget.0 });
    }
    let cells = cells.unwrap() as usize;

    let mut report;
    let mut out = SparseTensor::zeros(shape.clone())?;
    if config.method == Method::Exact {
        out = contract_exact(net, config.budget)?;
        report = blank_report(config);
    } else {
        let entry = |cell: usize| -> Result<(Vec<usize>, EstimateReport)> {
            let idx = multi_index(cell + 1, &shape)?;
            let assignment: Vec<(usize, usize)> = free.iter().copied().zip(idx.iter().copied()).collect();
            let sliced = net.slice_free_modes(&assignment)?;
            let cfg = EstimatorConfig {
                seed: derive_seed(config.seed, tags::ENTRY, cell as u64),
                parallel: false,
                ..config.clone()
            };
            Ok((idx, estimate_full(&sliced, &cfg)?))
        };
        let entries = if config.parallel {
            (0..cells).into_par_iter().map(entry).collect::<Result<Vec<_>>>()?
        } else {
            (0..cells).map(entry).collect::<Result<Vec<_>>>()?
        };
        report = entries[0].1.clone();
        for (idx, r) in entries {
            out.set(&idx, r.scalar().unwrap())?;
        }
    }
    report.value = ReportValue::Tensor(TensorFile::from(&out));
    report.seed = config.seed;
    report.rep_values.clear();
    report.notes.push(format!("{cells} entries over free modes {free:?}"));
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}
