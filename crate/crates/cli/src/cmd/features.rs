use std::path::PathBuf;

use clap::Args;
use tdec_core::presets;
use tdec_core::spectrum::{parse_spectra_csv, pool_features, Eigenspectrum, IndexRange};

use crate::errors::CliError;
use crate::fsio;

use super::write_features_csv;

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    /// Spectra CSV produced by `eig`
    #[arg(long)]
    pub spectra: PathBuf,
    /// Output feature CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Pooling ranges as lo:hi pairs, e.g. 0:0.03,0.95:1
    #[arg(long)]
    pub ranges: Option<String>,
    /// Take the pooling ranges from a preset (tv or fau)
    #[arg(long)]
    pub preset: Option<String>,
}

pub fn resolve_ranges(
    ranges: &Option<String>,
    preset: &Option<String>,
) -> Result<Vec<IndexRange>, CliError> {
    if let Some(spec) = ranges {
        return tdec_core::spectrum::parse_ranges(spec).map_err(CliError::from);
    }
    if let Some(name) = preset {
        return presets::by_name(name)
            .map(|p| p.ranges)
            .ok_or_else(|| CliError::format(format!("unknown preset {name:?} (try tv or fau)")));
    }
    Err(CliError::format("missing --ranges (or use --preset)"))
}

pub fn run(args: &FeaturesArgs) -> Result<(), CliError> {
    let ranges = resolve_ranges(&args.ranges, &args.preset)?;
    let text = fsio::read_to_string(&args.spectra)?;
    let rows = parse_spectra_csv(&text).map_err(|e| CliError::from(e).context(args.spectra.display()))?;
    if rows.is_empty() {
        return Err(CliError::data(format!("{}: no spectra rows", args.spectra.display())));
    }

    let mut instances = Vec::with_capacity(rows.len());
    for row in &rows {
        let spectrum = Eigenspectrum::from_values(row.eigenvalues.clone(), false)
            .and_then(|s| s.normalize())
            .map_err(|e| CliError::from(e).context(&row.segment_id))?;
        let instance = pool_features(
            &spectrum,
            &ranges,
            &row.subject_id,
            row.label,
            row.modality,
            &row.segment_id,
        )
        .map_err(|e| CliError::from(e).context(&row.segment_id))?;
        instances.push(instance);
    }

    fsio::write_atomic(&args.out, &write_features_csv(&instances))?;
    println!(
        "features: pooled {} spectra over {} ranges into {}",
        instances.len(),
        ranges.len(),
        args.out.display()
    );
    Ok(())
}
