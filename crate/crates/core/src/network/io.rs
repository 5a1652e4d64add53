use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TensorNetwork;
use crate::error::Result;
use crate::tensor::SparseTensor;

/// JSON layout of a network file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub tensors: Vec<TensorFile>,
    #[serde(default)]
    pub contractions: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub shape: Vec<usize>,
    #[serde(default)]
    pub entries: Vec<(Vec<usize>, f64)>,
}

impl NetworkFile {
    /// Builds the network; repeated entries are summed. Does not validate
    /// contractions.
    pub fn into_network(self) -> Result<TensorNetwork> {
        let tensors = self
            .tensors
            .into_iter()
            .map(|t| SparseTensor::from_entries(t.shape, t.entries))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorNetwork::new(tensors, self.contractions))
    }
}

impl From<&TensorNetwork> for NetworkFile {
    fn from(net: &TensorNetwork) -> Self {
        NetworkFile {
            tensors: net.tensors().iter().map(TensorFile::from).collect(),
            contractions: net.contractions().to_vec(),
        }
    }
}

impl From<&SparseTensor> for TensorFile {
    fn from(t: &SparseTensor) -> Self {
        TensorFile { shape: t.shape().to_vec(), entries: t.iter().map(|(i, v)| (i.to_vec(), v)).collect() }
    }
}

impl TensorFile {
    pub fn to_tensor(&self) -> Result<SparseTensor> {
        SparseTensor::from_entries(self.shape.clone(), self.entries.iter().cloned())
    }
}

impl TensorNetwork {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<NetworkFile>(text)?.into_network()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&NetworkFile::from(self)).expect("network serializes")
    }
}

pub fn read_network(path: impl AsRef<Path>) -> Result<TensorNetwork> {
    TensorNetwork::from_json(&std::fs::read_to_string(path)?)
}
