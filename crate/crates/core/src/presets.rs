//! Modality presets: sampling rates, embedding geometry, and pooling ranges.

use crate::embedding::EmbeddingConfig;
use crate::spectrum::IndexRange;
use crate::types::Modality;

/// Everything the pipeline needs to know about one modality's configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityPreset {
    pub modality: Modality,
    pub sample_rate_hz: f64,
    pub embedding: EmbeddingConfig,
    pub ranges: Vec<IndexRange>,
}

/// Vocal-tract variables: 100 Hz, delay scale 7 samples (70 ms), 15 delays
/// per channel, pooling ranges [0, 0.03] and [0.95, 1].
pub fn tv() -> ModalityPreset {
    ModalityPreset {
        modality: Modality::Tv,
        sample_rate_hz: 100.0,
        embedding: EmbeddingConfig::new(7, 15).expect("valid constants"),
        ranges: vec![
            IndexRange::new(0.0, 0.03).expect("valid constants"),
            IndexRange::new(0.95, 1.0).expect("valid constants"),
        ],
    }
}

/// Facial action units: 28 Hz, delay scale 3 samples (107 ms), 15 delays
/// per channel, pooling ranges [0, 0.02] and [0.96, 1].
pub fn fau() -> ModalityPreset {
    ModalityPreset {
        modality: Modality::Fau,
        sample_rate_hz: 28.0,
        embedding: EmbeddingConfig::new(3, 15).expect("valid constants"),
        ranges: vec![
            IndexRange::new(0.0, 0.02).expect("valid constants"),
            IndexRange::new(0.96, 1.0).expect("valid constants"),
        ],
    }
}

/// Look up a preset by name (`"tv"` or `"fau"`, case-insensitive).
pub fn by_name(name: &str) -> Option<ModalityPreset> {
    match name.to_ascii_lowercase().as_str() {
        "tv" => Some(tv()),
        "fau" => Some(fau()),
        _ => None,
    }
}
