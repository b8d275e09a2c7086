use std::path::PathBuf;

use clap::Args;
use tdec_core::spectrum::{group_mean_spectra, parse_spectra_csv, plot_data_csv, SpectrumRow};
use tdec_core::types::ClassLabel;

use crate::errors::CliError;
use crate::fsio;

#[derive(Args, Debug)]
pub struct PlotdataArgs {
    /// Spectra CSVs to pool (repeat the flag to merge files)
    #[arg(long, required = true, num_args = 1)]
    pub spectra: Vec<PathBuf>,
    /// Output plot-data CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Reference group for the difference curves
    #[arg(long, default_value = "HC")]
    pub reference: String,
}

pub fn run(args: &PlotdataArgs) -> Result<(), CliError> {
    let reference: ClassLabel = args.reference.parse()?;
    let mut rows: Vec<SpectrumRow> = Vec::new();
    for path in &args.spectra {
        let text = fsio::read_to_string(path)?;
        rows.extend(parse_spectra_csv(&text).map_err(|e| CliError::from(e).context(path.display()))?);
    }
    if rows.is_empty() {
        return Err(CliError::data("no spectra rows in the given files"));
    }

    let groups = group_mean_spectra(&rows).map_err(CliError::from)?;
    let csv = plot_data_csv(&groups, reference)?;
    fsio::write_atomic(&args.out, &csv)?;
    println!(
        "plotdata: {} groups x dim {} (reference {}) in {}",
        groups.len(),
        groups.values().next().map_or(0, |s| s.dim()),
        reference,
        args.out.display()
    );
    Ok(())
}
