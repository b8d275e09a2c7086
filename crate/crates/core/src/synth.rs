//! Deterministic synthetic multichannel signals with controllable
//! coordination complexity.
//!
//! Each channel is a fixed random mixture of `latent_rank` independent
//! AR(1) processes plus optional white observation noise, so the effective
//! dimensionality of cross-channel coordination is the latent rank: rank 1
//! makes every channel a scaled copy of one process, higher ranks spread
//! correlation mass into more eigendirections. This is the verification
//! fixture standing in for clinical recordings.

use std::collections::BTreeMap;

use ndarray::Array2;
use thiserror::Error;

use crate::ingest::{ChannelSet, ManifestEntry, SegmentManifest};
use crate::rng::{SplitMix64, Xoshiro256StarStar};
use crate::types::{ClassLabel, Modality};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("channels must be at least 1")]
    NoChannels,
    #[error("length_samples must be at least 2, got {0}")]
    TooShort(usize),
    #[error("sample rate must be positive and finite, got {0}")]
    BadSampleRate(f64),
    #[error("latent rank {rank} must lie in [1, {channels}]")]
    BadRank { rank: usize, channels: usize },
    #[error("noise amplitude must be nonnegative and finite, got {0}")]
    BadNoise(f64),
    #[error("smoothing halflife must be nonnegative and finite, got {0}")]
    BadHalflife(f64),
    #[error("cohort needs at least one subject per class")]
    EmptyClass,
    #[error("cohort needs segments_per_subject >= 1")]
    NoSegments,
    #[error("no generator spec for class {0}")]
    MissingClassSpec(ClassLabel),
}

/// Generator parameters. Fully determines the output together with `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub channels: usize,
    pub length_samples: usize,
    pub sample_rate_hz: f64,
    pub latent_rank: usize,
    pub noise_amplitude: f64,
    /// AR(1) smoothing of the latent processes: autocorrelation halves
    /// every this many samples. 0 means white latents.
    pub smoothing_halflife_samples: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.channels == 0 {
            return Err(SynthError::NoChannels);
        }
        if self.length_samples < 2 {
            return Err(SynthError::TooShort(self.length_samples));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(SynthError::BadSampleRate(self.sample_rate_hz));
        }
        if self.latent_rank == 0 || self.latent_rank > self.channels {
            return Err(SynthError::BadRank {
                rank: self.latent_rank,
                channels: self.channels,
            });
        }
        if !(self.noise_amplitude.is_finite() && self.noise_amplitude >= 0.0) {
            return Err(SynthError::BadNoise(self.noise_amplitude));
        }
        if !(self.smoothing_halflife_samples.is_finite() && self.smoothing_halflife_samples >= 0.0) {
            return Err(SynthError::BadHalflife(self.smoothing_halflife_samples));
        }
        Ok(())
    }
}

/// Generate one recording.
///
/// Mixing rows are drawn from a standard normal and scaled to unit norm, so
/// every channel carries unit signal variance regardless of the latent rank
/// and `noise_amplitude` means the same signal-to-noise ratio at every rank.
///
/// Draw order is fixed so the output is reproducible from the seed alone:
/// mixing matrix first (row-major, channels x rank), then each latent
/// series in full, then per-sample noise in row-major (time, channel)
/// order. Noise draws are skipped entirely when the amplitude is zero.
pub fn generate(spec: &SynthSpec) -> Result<ChannelSet, SynthError> {
    spec.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);

    let mut mixing = Array2::zeros((spec.channels, spec.latent_rank));
    for c in 0..spec.channels {
        for r in 0..spec.latent_rank {
            mixing[[c, r]] = rng.next_normal();
        }
        let norm = mixing.row(c).dot(&mixing.row(c)).sqrt();
        for r in 0..spec.latent_rank {
            mixing[[c, r]] /= norm;
        }
    }

    // stationary unit-variance AR(1): x_t = phi x_{t-1} + sqrt(1-phi^2) e_t
    let phi = if spec.smoothing_halflife_samples > 0.0 {
        0.5f64.powf(1.0 / spec.smoothing_halflife_samples)
    } else {
        0.0
    };
    let innovation = (1.0 - phi * phi).sqrt();
    let mut latents = Array2::zeros((spec.latent_rank, spec.length_samples));
    for r in 0..spec.latent_rank {
        let mut x = rng.next_normal();
        latents[[r, 0]] = x;
        for t in 1..spec.length_samples {
            x = phi * x + innovation * rng.next_normal();
            latents[[r, t]] = x;
        }
    }

    let mut samples = Array2::zeros((spec.length_samples, spec.channels));
    for t in 0..spec.length_samples {
        for c in 0..spec.channels {
            let mut v = 0.0;
            for r in 0..spec.latent_rank {
                v += mixing[[c, r]] * latents[[r, t]];
            }
            samples[[t, c]] = v;
        }
    }
    if spec.noise_amplitude > 0.0 {
        for t in 0..spec.length_samples {
            for c in 0..spec.channels {
                samples[[t, c]] += spec.noise_amplitude * rng.next_normal();
            }
        }
    }

    let names = (0..spec.channels).map(|i| format!("ch{i:02}")).collect();
    Ok(ChannelSet::new(spec.sample_rate_hz, names, samples, Modality::Other)
        .expect("generated samples are finite"))
}

/// One generated subject: a continuous recording plus the manifest marking
/// its speech segments.
#[derive(Debug, Clone)]
pub struct CohortSubject {
    pub subject_id: String,
    pub label: ClassLabel,
    pub channels: ChannelSet,
    pub manifest: SegmentManifest,
}

/// Generate a labeled cohort.
///
/// `class_specs[label].length_samples` is the per-segment length; segments
/// are separated by one second of filler within a continuous per-subject
/// recording. Latent rank and noise are fixed per class; the mixing matrix
/// and latent draws are re-drawn per subject from seeds split off the
/// master seed with SplitMix64 (one per subject, in subject order).
pub fn generate_cohort(
    subjects_per_class: &BTreeMap<ClassLabel, usize>,
    segments_per_subject: usize,
    class_specs: &BTreeMap<ClassLabel, SynthSpec>,
    seed: u64,
) -> Result<Vec<CohortSubject>, SynthError> {
    if segments_per_subject == 0 {
        return Err(SynthError::NoSegments);
    }
    if subjects_per_class.is_empty() || subjects_per_class.values().any(|&n| n == 0) {
        return Err(SynthError::EmptyClass);
    }
    for label in subjects_per_class.keys() {
        let spec = class_specs
            .get(label)
            .ok_or(SynthError::MissingClassSpec(*label))?;
        spec.validate()?;
    }

    let mut seeder = SplitMix64::new(seed);
    let mut subjects = Vec::new();
    let mut subject_index = 0usize;
    for (&label, &count) in subjects_per_class {
        let template = class_specs[&label];
        let gap = template.sample_rate_hz.round().max(1.0) as usize;
        let seg_len = template.length_samples;
        let total = segments_per_subject * seg_len + (segments_per_subject - 1) * gap;
        for _ in 0..count {
            let subject_id = format!("s{subject_index:02}");
            subject_index += 1;
            let spec = SynthSpec {
                length_samples: total,
                seed: seeder.next_u64(),
                ..template
            };
            let channels = generate(&spec)?;
            let rate = spec.sample_rate_hz;
            let entries = (0..segments_per_subject)
                .map(|i| {
                    let start = (i * (seg_len + gap)) as f64 / rate;
                    ManifestEntry {
                        speaker: subject_id.clone(),
                        start_s: start,
                        end_s: start + seg_len as f64 / rate,
                    }
                })
                .collect();
            let manifest = SegmentManifest::from_entries(entries).expect("generated entries are valid");
            subjects.push(CohortSubject {
                subject_id,
                label,
                channels,
                manifest,
            });
        }
    }
    Ok(subjects)
}
