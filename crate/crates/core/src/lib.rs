//! Categorical clustering that learns, per cluster and attribute, a distance
//! between attribute values from the cluster's value frequencies, jointly with
//! the partition itself.
//!
//! ```
//! use disc_core::{fit, synth_generate, FitConfig};
//!
//! let data = synth_generate(60, 4, 3, 2, 1).unwrap();
//! let model = fit(&data, &FitConfig::new(2, 0)).unwrap();
//! assert!(model.converged);
//! ```

pub mod cluster;
pub mod data;
pub mod error;
pub mod eval;
pub mod mixed;
pub mod relation;

pub use cluster::{
    assign_step, fit, fit_from_partition, init_kmodes, objective, predict, sample_cluster_distance,
    update_centers, write_trace_csv, Centers, DiscModel, FitConfig, Metric, Partition, TraceRow,
    Variant,
};
pub use data::{
    encode, encode_with, load_csv, parse_csv, synth_generate, synth_generate_with, write_csv,
    CsvOptions, Dataset, Encoding, RawTable, Schema, SynthSpec, MISSING,
};
pub use error::{DiscError, Result};
pub use eval::{acc, acc_labels, ari, ari_labels, cmp, export_encoded, Contingency, EncodedTable};
pub use mixed::{fit_mixed, mixed_distance, MixedConfig};
pub use relation::{
    conditional_distribution, infer_all, infer_tree, mst_generic, tree_distances, weight_matrix,
    Cpd, DistanceMatrix, Edge, RelationModel, RelationTree, SquareMatrix, WeightMatrix,
};
