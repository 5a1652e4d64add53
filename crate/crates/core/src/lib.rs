//! Sketching estimators for tensor network contraction.
//!
//! A tensor network is a list of sparse tensors plus a set of contracted mode
//! pairs. This crate contracts such networks exactly (for small sizes) and
//! approximately, with two randomized estimators:
//!
//! * [`estimators::general`]: complement count sketches combined in the
//!   frequency domain; works for any full network, cyclic or not.
//! * [`estimators::acyclic`]: recursive sketches following a rooted spanning
//!   tree; its variance grows polynomially in the number of contractions.
//!
//! Both are boosted with a median over independent repetitions. The
//! [`apps`] module turns equi-join queries and edge lists into networks.

pub mod apps;
pub mod error;
pub mod estimators;
pub mod fft;
pub mod hashing;
pub mod network;
pub mod oracle;
pub mod sketch;
pub mod tensor;

pub use error::{Error, Result};

pub use network::TensorNetwork;
pub use tensor::SparseTensor;
