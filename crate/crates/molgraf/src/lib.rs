//! Molecular property prediction with attention- and gate-augmented
//! graph convolutions.
//!
//! The crate takes SMILES strings end to end: parsing into a molecular
//! graph, featurization into node features and an adjacency matrix,
//! training graph convolutional models with optional attention heads and
//! gated skip connections on a built-in reverse-mode autodiff tape, and
//! inspecting what the trained models learned (atom clustering, latent
//! distance matrices, principal component projections).

pub mod analysis;
pub mod autodiff;
pub mod checkpoint;
pub mod cli;
pub mod datagen;
pub mod dataset;
pub mod featurize;
pub mod loss;
pub mod model;
pub mod rng;
pub mod smiles;
pub mod training;

pub use analysis::{
    distance_matrix, export_colored_graph, extract_features, kmeans, pca_project,
    stack_node_states, AnalysisError, DistanceMatrix, KmeansResult, MoleculeFeatures,
    PcaProjection, DEFAULT_PALETTE,
};
pub use autodiff::{grad_check, AutodiffError, NodeId, ScalarProgram, Tape, Tensor};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use datagen::{gen_dataset, gen_molecule};
pub use dataset::{load_dataset, parse_dataset, pseudo_property, write_dataset, DatasetError};
pub use featurize::{batch, featurize, GraphBatch, FEATURE_DIM};
pub use loss::{nudge_biases_off_relu_kinks, squared_error_on_tape, SquaredErrorProgram};
pub use rng::SplitMix64;
pub use smiles::{parse, Atom, Bond, BondOrder, Element, MolecularGraph, SmilesError};
pub use training::{
    evaluate, lr_schedule, predict_batch, predict_one, split_dataset, train, AdamState,
    EpochStats, History, TrainConfig, TrainError, TrainOutcome, DEFAULT_SPLIT,
};
