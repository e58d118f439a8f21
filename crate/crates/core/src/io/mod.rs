//! Text formats: typing-profile TSV, PHYLIP matrices, Newick trees,
//! edge lists (TSV/DOT) and character sequences.

pub mod edges;
pub mod newick;
pub mod phylip;
pub mod profiles;
pub mod sequences;

pub use edges::{write_forest_edges, write_steiner_edges, EdgeFormat};
pub use newick::{dendrogram_to_newick, phylo_to_newick};
pub use phylip::{read_phylip_matrix, write_phylip_matrix};
pub use profiles::{read_profiles, DEFAULT_MISSING_MARKERS};
pub use sequences::read_sequences;
