//! Distance-based phylogenetic inference: pairwise distances from typing
//! profiles, agglomerative clustering, the neighbor-joining family,
//! greedy minimum-evolution addition, spanning-tree methods and the
//! property checkers tying them together.

pub mod dendrogram;
pub mod distance;
pub mod error;
pub mod fhp;
pub mod gcp;
pub mod io;
pub mod matrix;
pub mod me;
pub mod mst;
pub mod nj;
pub mod phylo;
pub mod profile;
pub mod properties;
pub mod registry;
pub mod sim;

pub use error::{Error, Result};
