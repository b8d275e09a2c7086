//! Cross-channel coordination analysis for multivariate physiological time
//! series.
//!
//! The pipeline quantifies how tightly the channels of a recording (vocal
//! tract variables, facial action units, or anything similar) move together,
//! and at what timing structure:
//!
//! 1. [`ingest`] — parse channel CSVs and diarization manifests, slice out a
//!    speaker's segments, drop segments at or under a minimum duration.
//! 2. [`embedding`] — time-delay embed each segment at a fixed delay scale
//!    and compute the channel-delay correlation matrix.
//! 3. [`spectrum`] — eigendecompose, rank-order, trace-normalize, average,
//!    pool index ranges into features, and emit plot/difference curves.
//! 4. [`classify`] — standardize features, train an RBF SVM by sequential
//!    minimal optimization, evaluate with leave-one-subject-out folds.
//! 5. [`fusion`] — stack the per-modality SVMs under a logistic meta-model.
//! 6. [`synth`] — seeded synthetic cohorts with controllable coordination
//!    complexity, used to validate the whole chain without clinical data.
//!
//! [`presets`] pins the standard TV/FAU configurations; [`rng`] houses the
//! portable generator behind [`synth`].

pub mod classify;
pub mod embedding;
pub mod fusion;
pub mod ingest;
pub mod presets;
pub mod rng;
pub mod spectrum;
pub mod synth;
pub mod types;
pub mod util;

pub use classify::{CvReport, Gamma, StandardizationMode, Standardizer, SvmModel, SvmParams};
pub use embedding::{channel_delay_correlation, embed, CorrelationMatrix, EmbeddingConfig};
pub use fusion::{fused_loso_cv, StackingModel};
pub use ingest::{
    extract_segments, parse_channel_csv, parse_segment_manifest, ChannelSet, Segment,
    SegmentManifest,
};
pub use spectrum::{
    average_spectra, difference_curves, pool_features, Eigenspectrum, FeatureInstance, IndexRange,
};
pub use synth::{generate, generate_cohort, SynthSpec};
pub use types::{ClassLabel, Modality};
