//! Cascade analytics: reconstruct potential propagation graphs from social
//! interaction logs, extract structural and evolution features, and run
//! imbalance-aware early/final stage classification experiments.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] domain records, the friendship store and propagation graphs
//! * [`io`] JSONL/CSV ingestion and the graph dump format
//! * [`builder`] final and snapshot propagation-graph construction
//! * [`topology`] and [`features`] the high-level and topological features
//! * [`evolution`] snapshot time series and their summary statistics
//! * [`classify`] linear discriminant, random forest and MLP classifiers
//! * [`eval`] metrics, stratified folds, undersampling and experiment drivers
//! * [`synth`] synthetic friendship graphs and labelled cascades
//!
//! Data-parallel work (per post, per fold, per time step) goes through
//! [`exec`], which uses rayon when the `parallel` feature is enabled and a
//! plain sequential loop otherwise. Both schedules produce bit-identical
//! results.

pub mod builder;
pub mod classify;
pub mod error;
pub mod eval;
pub mod evolution;
pub mod exec;
pub mod features;
pub mod io;
pub mod model;
pub mod seed;
pub mod synth;
pub mod topology;

pub use error::{CascadeError, Result};
pub use exec::Execution;
pub use model::{
    CascadeDataset, EdgeType, FeatureVector, FriendshipStore, InteractionKind, InteractionRecord,
    Label, PostRecord, PropEdge, PropagationGraph, Schema,
};
