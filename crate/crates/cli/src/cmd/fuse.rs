use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use tdec_core::classify::SvmParams;
use tdec_core::fusion::fused_loso_cv;
use tdec_core::spectrum::FeatureInstance;
use tdec_core::types::Modality;

use crate::errors::CliError;
use crate::fsio;

use super::{print_summary, read_features_csv};

#[derive(Args, Debug)]
pub struct FuseArgs {
    /// Feature CSVs, one per modality (pass the flag twice)
    #[arg(long, required = true, num_args = 1)]
    pub features: Vec<PathBuf>,
    /// Output cross-validation report JSON
    #[arg(long)]
    pub out: PathBuf,
    /// Soft-margin box constraint (applied to every base model)
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// RBF width: "auto" or a positive number
    #[arg(long, default_value = "auto")]
    pub gamma: String,
}

pub fn run(args: &FuseArgs) -> Result<(), CliError> {
    if args.features.len() < 2 {
        return Err(CliError::format(
            "fuse needs at least two --features files (one per modality)",
        ));
    }
    let mut datasets: BTreeMap<Modality, Vec<FeatureInstance>> = BTreeMap::new();
    for path in &args.features {
        let instances = read_features_csv(path)?;
        let modality = instances[0].modality;
        if let Some(mixed) = instances.iter().find(|i| i.modality != modality) {
            return Err(CliError::data(format!(
                "{}: mixes modalities {} and {}",
                path.display(),
                modality,
                mixed.modality
            )));
        }
        if datasets.insert(modality, instances).is_some() {
            return Err(CliError::data(format!(
                "{}: modality {} appears in more than one --features file",
                path.display(),
                modality
            )));
        }
    }

    let params = SvmParams {
        c: args.c,
        gamma: super::cv::parse_gamma(&args.gamma)?,
        ..SvmParams::default()
    };
    let param_map: BTreeMap<Modality, SvmParams> =
        datasets.keys().map(|&m| (m, params)).collect();
    let report = fused_loso_cv(&datasets, &param_map)?;

    let value = serde_json::to_value(&report).expect("report serializes");
    fsio::write_atomic(&args.out, &fsio::json_artifact(value))?;

    print_summary(&[("Multi-modal".to_string(), &report)]);
    println!(
        "fuse: {} folds over {} modalities, report in {}",
        report.folds.len(),
        datasets.len(),
        args.out.display()
    );
    Ok(())
}
