//! Fixture generators: a Bickley-jet transfer operator, graph Laplacians,
//! block Markov chains, and a k-means baseline.

mod bickley;
mod block_markov;
mod graph;
mod kmeans;
mod ulam;

pub use bickley::{advect, flow_map, BickleyFlow, VelocityField};
pub use block_markov::{block_markov_demo, BlockMarkovDemo};
pub use graph::{graph_laplacian_demo, plus_blob_cloud, radius_graph_laplacian, GraphDemo};
pub use kmeans::{kmeans_baseline, KMeans};
pub use ulam::{normalize_transition, ulam_build, BoxGrid, UlamOperator};
