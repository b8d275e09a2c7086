use std::path::PathBuf;

use clap::Args;
use tdec_core::embedding::{channel_delay_correlation, EmbeddingConfig};
use tdec_core::ingest::{extract_segments, parse_channel_csv, parse_segment_manifest};
use tdec_core::presets;
use tdec_core::types::Modality;

use crate::errors::CliError;
use crate::fsio;

use super::segment_stem;

#[derive(Args, Debug)]
pub struct CorrArgs {
    /// Channel CSV (header of channel names, one sample row per tick)
    #[arg(long)]
    pub channels: PathBuf,
    /// Segment manifest JSON
    #[arg(long)]
    pub manifest: PathBuf,
    /// Speaker id whose segments to analyze
    #[arg(long)]
    pub speaker: String,
    /// Output directory for matrix CSVs and sidecars
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Configuration preset (tv: 100 Hz, scale 7; fau: 28 Hz, scale 3)
    #[arg(long)]
    pub preset: Option<String>,
    /// Sampling rate in Hz (overrides the preset)
    #[arg(long)]
    pub rate: Option<f64>,
    /// Delay scale in samples (overrides the preset)
    #[arg(long)]
    pub delay_scale: Option<usize>,
    /// Delayed copies per channel (overrides the preset; default 15)
    #[arg(long)]
    pub num_delays: Option<usize>,
    /// Keep only segments strictly longer than this many seconds
    #[arg(long, default_value_t = 5.0)]
    pub min_segment_s: f64,
}

pub struct ResolvedConfig {
    pub sample_rate_hz: f64,
    pub embedding: EmbeddingConfig,
}

pub fn resolve_config(
    preset: &Option<String>,
    rate: Option<f64>,
    delay_scale: Option<usize>,
    num_delays: Option<usize>,
) -> Result<ResolvedConfig, CliError> {
    let preset = match preset {
        Some(name) => Some(
            presets::by_name(name)
                .ok_or_else(|| CliError::format(format!("unknown preset {name:?} (try tv or fau)")))?,
        ),
        None => None,
    };
    let sample_rate_hz = rate
        .or(preset.as_ref().map(|p| p.sample_rate_hz))
        .ok_or_else(|| CliError::format("missing --rate (or use --preset)"))?;
    let delay_scale = delay_scale
        .or(preset.as_ref().map(|p| p.embedding.delay_scale()))
        .ok_or_else(|| CliError::format("missing --delay-scale (or use --preset)"))?;
    let num_delays = num_delays
        .or(preset.as_ref().map(|p| p.embedding.num_delays()))
        .unwrap_or(15);
    Ok(ResolvedConfig {
        sample_rate_hz,
        embedding: EmbeddingConfig::new(delay_scale, num_delays)?,
    })
}

pub fn run(args: &CorrArgs) -> Result<(), CliError> {
    let config = resolve_config(&args.preset, args.rate, args.delay_scale, args.num_delays)?;

    let text = fsio::read_to_string(&args.channels)?;
    let cs = parse_channel_csv(&text, config.sample_rate_hz, Modality::Other)
        .map_err(|e| CliError::from(e).context(args.channels.display()))?;
    let manifest_text = fsio::read_to_string(&args.manifest)?;
    let manifest = parse_segment_manifest(&manifest_text)
        .map_err(|e| CliError::from(e).context(args.manifest.display()))?;

    let total_entries = manifest
        .entries()
        .iter()
        .filter(|e| e.speaker == args.speaker)
        .count();
    let segments = extract_segments(&cs, &manifest, &args.speaker, args.min_segment_s);
    if segments.is_empty() {
        println!(
            "warning: no qualifying segments for speaker {:?} ({} manifest entries, threshold {} s)",
            args.speaker, total_entries, args.min_segment_s
        );
        return Ok(());
    }

    let mut written = 0usize;
    for (index, segment) in segments.iter().enumerate() {
        let stem = segment_stem(&args.speaker, index);
        let matrix = channel_delay_correlation(segment, &config.embedding)
            .map_err(|e| CliError::from(e).context(format!("segment {stem}")))?;
        fsio::write_atomic(&args.out_dir.join(format!("{stem}.corr.csv")), &matrix.to_csv())?;
        let mut sidecar = matrix.sidecar_json();
        sidecar.push('\n');
        fsio::write_atomic(&args.out_dir.join(format!("{stem}.meta.json")), &sidecar)?;
        written += 1;
    }
    println!(
        "corr: speaker {:?}: {} of {} segments qualified, wrote {} matrices ({}x{}) to {}",
        args.speaker,
        segments.len(),
        total_entries,
        written,
        cs.num_channels() * config.embedding.num_delays(),
        cs.num_channels() * config.embedding.num_delays(),
        args.out_dir.display()
    );
    Ok(())
}
