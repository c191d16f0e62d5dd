//! Feature attribution with monotonicity auditing.
//!
//! This crate pairs two baseline attribution engines — integrated gradients
//! and exact baseline Shapley values — with samplers that certify or falsify
//! monotonicity properties of models and monotonicity axioms of the
//! attributions themselves. It also ships constructively monotone additive
//! models whose architecture guarantees the audited properties, a trainer
//! for them, and a small data pipeline (credit-scoring CSV ingestion,
//! synthetic generation, canonical report emission).
//!
//! Entry points:
//!
//! - [`attribution::integrated_gradients`] / [`attribution::baseline_shapley`]
//! - [`monotonicity::check_individual`] and the pairwise checks
//! - [`axioms::audit_matrix`] for the full method-by-axiom verdict table
//! - [`zoo::get_example`] for worked models with closed-form oracles
//! - [`additive::build_model`] / [`train::train`] for monotone models
//! - [`data::gen_synthetic`] / [`data::ingest_csv`] for datasets

pub mod additive;
pub mod attribution;
pub mod axioms;
pub mod data;
mod error;
pub mod model;
pub mod monotonicity;
pub mod report;
mod sampling;
pub mod space;
pub mod train;
pub mod zoo;

pub use error::{Error, Result};
pub use model::{ModelHandle, ModelRegistry, MonotoneSpec};
pub use space::{FeatureSpace, Point};
