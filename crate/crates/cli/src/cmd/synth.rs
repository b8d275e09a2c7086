use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use tdec_core::synth::{generate_cohort, SynthSpec};
use tdec_core::types::ClassLabel;

use crate::errors::CliError;
use crate::fsio;

use super::write_labels_csv;

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output directory for channel CSVs, manifests, and labels.csv
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Master seed; outputs are byte-identical for the same seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Subjects per class, e.g. 6,6
    #[arg(long, value_delimiter = ',', default_value = "6,6")]
    pub subjects: Vec<usize>,
    /// Class label per entry of --subjects
    #[arg(long, value_delimiter = ',', default_value = "SZ,HC")]
    pub classes: Vec<String>,
    /// Latent rank (coordination complexity) per class
    #[arg(long, value_delimiter = ',', default_value = "5,2")]
    pub rank: Vec<usize>,
    /// Channels per recording
    #[arg(long, default_value_t = 6)]
    pub channels: usize,
    /// Speech segments per subject
    #[arg(long, default_value_t = 3)]
    pub segments: usize,
    /// Segment duration in seconds
    #[arg(long, default_value_t = 10.0)]
    pub segment_s: f64,
    /// White observation-noise amplitude
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Latent AR(1) smoothing halflife in samples (0 = white latents)
    #[arg(long, default_value_t = 10.0)]
    pub halflife_samples: f64,
    /// Sampling rate in Hz
    #[arg(long, default_value_t = 100.0)]
    pub rate: f64,
}

pub fn run(args: &SynthArgs) -> Result<(), CliError> {
    if args.subjects.len() != args.classes.len() || args.subjects.len() != args.rank.len() {
        return Err(CliError::format(format!(
            "--subjects, --classes and --rank must have the same number of entries (got {}, {}, {})",
            args.subjects.len(),
            args.classes.len(),
            args.rank.len()
        )));
    }
    if !(args.segment_s.is_finite() && args.segment_s > 0.0) {
        return Err(CliError::format(format!(
            "--segment-s must be positive, got {}",
            args.segment_s
        )));
    }

    let mut per_class = BTreeMap::new();
    let mut specs = BTreeMap::new();
    for ((class, &count), &rank) in args.classes.iter().zip(&args.subjects).zip(&args.rank) {
        let label: ClassLabel = class.parse()?;
        if per_class.insert(label, count).is_some() {
            return Err(CliError::format(format!("class {label} listed twice")));
        }
        let spec = SynthSpec {
            channels: args.channels,
            length_samples: (args.segment_s * args.rate).round() as usize,
            sample_rate_hz: args.rate,
            latent_rank: rank,
            noise_amplitude: args.noise,
            smoothing_halflife_samples: args.halflife_samples,
            seed: 0, // reseeded per subject by the cohort generator
        };
        spec.validate()?;
        specs.insert(label, spec);
    }

    let cohort = generate_cohort(&per_class, args.segments, &specs, args.seed)?;
    let mut labels = BTreeMap::new();
    for subject in &cohort {
        let csv_path = args.out_dir.join(format!("{}_channels.csv", subject.subject_id));
        fsio::write_atomic(&csv_path, &subject.channels.to_csv())?;
        let manifest_path = args.out_dir.join(format!("{}_segments.json", subject.subject_id));
        let mut manifest_json = subject.manifest.to_json();
        manifest_json.push('\n');
        fsio::write_atomic(&manifest_path, &manifest_json)?;
        labels.insert(subject.subject_id.clone(), subject.label);
    }
    fsio::write_atomic(&args.out_dir.join("labels.csv"), &write_labels_csv(&labels))?;

    println!(
        "synth: wrote {} subjects ({} classes, {} segments each) to {}",
        cohort.len(),
        per_class.len(),
        args.segments,
        args.out_dir.display()
    );
    Ok(())
}
