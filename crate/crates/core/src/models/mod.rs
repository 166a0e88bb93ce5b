//! Planted models, their samplers, the two non-Gaussian measure
//! constructions, and label-producing reductions.

pub mod batch_io;
mod measure;
mod problem;
mod reduction;
mod sample;

pub use measure::{
    build_bounded_llr_measure, build_mog_measure, BoundedLlr, GaussMixture, MeasureKind, NonGaussMeasure,
    REJECTION_LIMIT_PER_DRAW,
};
pub use problem::{cca_lambda_k, Hidden, ModelSpec, Problem};
pub use reduction::{cca_to_parity, ngca_to_glm};
pub use sample::{sample, sample_atpca, sample_cca, sample_ngca, sample_tpca, SampleBatch, SHARD_SIZE};
