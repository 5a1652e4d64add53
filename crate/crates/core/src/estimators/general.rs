use crate::error::{Error, Result};
use crate::fft::{dft_real, Complex64};
use crate::hashing::{derive_seed, tags};
use crate::network::{normalize_wlog, Provenance, TensorNetwork};
use crate::sketch::{CountSketchSpec, TensorSketchSpec};
use crate::tensor::SparseTensor;

/// Relative tolerance on the imaginary part of a single estimate.
pub const IMAG_TOLERANCE: f64 = 1e-6;

/// Sketched form of a full network for the general estimator.
///
/// Every contraction `(u, v)` draws a count sketch `C_u` and gives mode `v`
/// its complement, so the product of the tensors' spectra has the
/// contracted pairs conjugated against each other. Each tensor of order at
/// least one holds the bucket vector `T_k vec(X_k)` of the tensor sketch over
/// its modes; order-0 tensors are kept as exact scalar factors.
#[derive(Clone, Debug)]
pub struct GeneralSketchState {
    m: usize,
    shapes: Vec<Vec<usize>>,
    sketches: Vec<Option<TensorSketchSpec>>,
    buckets: Vec<Vec<f64>>,
    scalars: Vec<f64>,
}

impl GeneralSketchState {
    /// Zero state for the schema of `net` (its shapes and contractions);
    /// entry values are ignored.
    pub fn empty(net: &TensorNetwork, m: usize, seed: u64) -> Result<Self> {
        if !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m));
        }
        net.validate().map_err(Error::Validation)?;
        let free = net.free_modes();
        if !free.is_empty() {
            return Err(Error::PartialNetwork(free));
        }
        if let Some(u) = net.mode_degrees().iter().skip(1).position(|&d| d != 1) {
            return Err(Error::NotNormalized(format!("mode {} is not in exactly one contraction", u + 1)));
        }
        let mut mode_sketch: Vec<Option<CountSketchSpec>> = vec![None; net.num_modes() + 1];
        for (e, &(u, v)) in net.contractions().iter().enumerate() {
            let n = net.mode_size(u).unwrap();
            let c = CountSketchSpec::new(m, n, derive_seed(seed, tags::CONTRACTION, e as u64));
            mode_sketch[v] = Some(c.complement());
            mode_sketch[u] = Some(c);
        }
        let mut sketches = Vec::with_capacity(net.num_tensors());
        let mut buckets = Vec::with_capacity(net.num_tensors());
        for k in 0..net.num_tensors() {
            if net.tensor(k).order() == 0 {
                sketches.push(None);
                buckets.push(Vec::new());
            } else {
                let comps = net.modes_of(k).map(|u| mode_sketch[u].take().unwrap()).collect();
                sketches.push(Some(TensorSketchSpec::from_components(m, comps)?));
                buckets.push(vec![0.0; m]);
            }
        }
        Ok(GeneralSketchState {
            m,
            shapes: net.tensors().iter().map(|t| t.shape().to_vec()).collect(),
            sketches,
            buckets,
            scalars: vec![0.0; net.num_tensors()],
        })
    }

    /// State built from the tensors of `net` in one pass per tensor.
    pub fn from_network(net: &TensorNetwork, m: usize, seed: u64) -> Result<Self> {
        let mut state = Self::empty(net, m, seed)?;
        for (k, t) in net.tensors().iter().enumerate() {
            match &state.sketches[k] {
                Some(ts) => state.buckets[k] = ts.apply_tensor(t)?,
                None => state.scalars[k] = t.scalar_value(),
            }
        }
        Ok(state)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Bucket vector of tensor `k` (empty for an order-0 tensor).
    pub fn buckets(&self, k: usize) -> &[f64] {
        &self.buckets[k]
    }

    /// Adds `delta` at `index` of tensor `k`.
    pub fn turnstile_update(&mut self, k: usize, index: &[usize], delta: f64) -> Result<()> {
        let shape = self.shapes.get(k).ok_or_else(|| Error::Config(format!("no tensor {k} in network")))?;
        if index.len() != shape.len() || index.iter().zip(shape).any(|(&i, &n)| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: index.to_vec(), shape: shape.clone() });
        }
        match &self.sketches[k] {
            Some(ts) => {
                let (s, b) = ts.hash0(index);
                self.buckets[k][b] += s * delta;
            }
            None => self.scalars[k] += delta,
        }
        Ok(())
    }

    /// `e_1^T idft(dft x_1 . ... . dft x_p)` times the scalar factors.
    pub fn estimate(&self) -> Result<f64> {
        let mut scale = 1.0;
        let mut product: Option<Vec<Complex64>> = None;
        for (k, sketch) in self.sketches.iter().enumerate() {
            if sketch.is_none() {
                scale *= self.scalars[k];
                continue;
            }
            let f = dft_real(&self.buckets[k])?;
            product = Some(match product {
                None => f,
                Some(mut acc) => {
                    acc.iter_mut().zip(&f).for_each(|(a, b)| *a *= b);
                    acc
                }
            });
        }
        let Some(z) = product else {
            return Ok(scale);
        };
        let sum: Complex64 = z.iter().sum::<Complex64>() / self.m as f64;
        if sum.im.abs() > IMAG_TOLERANCE * (1.0 + sum.re.abs()) {
            return Err(Error::ImaginaryResidue { real: sum.re, imag: sum.im });
        }
        Ok(scale * sum.re)
    }
}

/// One sample of the general estimator on a normalized full network.
pub fn estimate_general_once(net: &TensorNetwork, m: usize, seed: u64) -> Result<f64> {
    GeneralSketchState::from_network(net, m, seed)?.estimate()
}

/// General-estimator state fed with updates addressed to the tensors of an
/// unnormalized network; each update is routed through the normalization.
#[derive(Clone, Debug)]
pub struct StreamingSketch {
    provenance: Provenance,
    state: GeneralSketchState,
}

impl StreamingSketch {
    /// Sketch for the schema of `input`; its entry values are ignored.
    pub fn new(input: &TensorNetwork, m: usize, seed: u64) -> Result<Self> {
        let zeroed = TensorNetwork::new(
            input.tensors().iter().map(|t| SparseTensor::zeros(t.shape().to_vec())).collect::<Result<_>>()?,
            input.contractions().to_vec(),
        );
        let (normalized, provenance) = normalize_wlog(&zeroed)?;
        Ok(StreamingSketch { provenance, state: GeneralSketchState::empty(&normalized, m, seed)? })
    }

    pub fn update(&mut self, k: usize, index: &[usize], delta: f64) -> Result<()> {
        match self.provenance.map_entry(k, index)? {
            Some(idx) => self.state.turnstile_update(k, &idx, delta),
            None => Ok(()),
        }
    }

    pub fn state(&self) -> &GeneralSketchState {
        &self.state
    }

    pub fn estimate(&self) -> Result<f64> {
        self.state.estimate()
    }
}
