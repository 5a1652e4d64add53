//! Count, complement, tensor, and recursive sketches.
//!
//! Every sketch is a seeded spec object. The hash form evaluates one column
//! at a time and accumulates over nonzeros; [`dense`] materializes the same
//! spec as an explicit matrix for small-size cross-checks.

mod count;
pub mod dense;
mod recursive;
mod tensor;

pub use count::CountSketchSpec;
pub use dense::{cs_dense, rs_dense, ts_dense};
pub use recursive::{padded_order, RecursiveSketchSpec};
pub use tensor::TensorSketchSpec;
