use std::path::PathBuf;

use clap::Args;
use tdec_core::embedding::CorrelationMatrix;
use tdec_core::spectrum::{write_spectra_csv, Eigenspectrum, SpectrumRow};
use tdec_core::types::Modality;

use crate::errors::CliError;
use crate::fsio;

use super::{read_labels_csv, split_segment_stem};

#[derive(Args, Debug)]
pub struct EigArgs {
    /// Directory of <subject>_seg<k>.corr.csv / .meta.json pairs
    #[arg(long)]
    pub corr_dir: PathBuf,
    /// labels.csv mapping subject_id to class label
    #[arg(long)]
    pub labels: PathBuf,
    /// Modality tag recorded in the spectra rows
    #[arg(long, default_value = "other")]
    pub modality: String,
    /// Output spectra CSV
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &EigArgs) -> Result<(), CliError> {
    let modality: Modality = args.modality.parse()?;
    let labels = read_labels_csv(&args.labels)?;

    let mut stems: Vec<String> = std::fs::read_dir(&args.corr_dir)
        .map_err(|e| CliError::io(&args.corr_dir, e))?
        .filter_map(|entry| {
            let name = entry.ok()?.file_name().to_string_lossy().into_owned();
            name.strip_suffix(".corr.csv").map(str::to_string)
        })
        .collect();
    stems.sort();
    if stems.is_empty() {
        return Err(CliError::data(format!(
            "{}: no *.corr.csv matrices found",
            args.corr_dir.display()
        )));
    }

    let mut rows = Vec::with_capacity(stems.len());
    for stem in &stems {
        let (subject_id, segment_id) = split_segment_stem(stem).ok_or_else(|| {
            CliError::format(format!(
                "{stem}: cannot recover subject from file stem (expected <subject>_seg<digits>)"
            ))
        })?;
        let label = *labels.get(&subject_id).ok_or_else(|| {
            CliError::data(format!(
                "{}: subject {subject_id:?} not present in {}",
                stem,
                args.labels.display()
            ))
        })?;
        let csv = fsio::read_to_string(&args.corr_dir.join(format!("{stem}.corr.csv")))?;
        let sidecar = fsio::read_to_string(&args.corr_dir.join(format!("{stem}.meta.json")))?;
        let matrix = CorrelationMatrix::from_parts(&csv, &sidecar)
            .map_err(|e| CliError::from(e).context(stem))?;
        let spectrum = Eigenspectrum::from_matrix(&matrix)
            .map_err(|e| CliError::from(e).context(stem))?;
        rows.push(SpectrumRow {
            segment_id,
            subject_id,
            label,
            modality,
            eigenvalues: spectrum.values().to_vec(),
        });
    }

    fsio::write_atomic(&args.out, &write_spectra_csv(&rows))?;
    println!(
        "eig: decomposed {} matrices (dim {}) into {}",
        rows.len(),
        rows[0].eigenvalues.len(),
        args.out.display()
    );
    Ok(())
}
