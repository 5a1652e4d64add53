//! Builders that turn relations and graphs into tensor networks.

mod graph;
mod relations;

pub use graph::{edge_updates, triangles_to_network, EdgeList, TRIANGLE_CONTRACTIONS};
pub use relations::{relation_updates, relations_to_network, AttrRef, Dictionary, JoinEncoding, JoinQuery, Relation};
