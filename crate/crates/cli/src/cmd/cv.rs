use std::path::PathBuf;

use clap::Args;
use tdec_core::classify::{loso_cv, Gamma, StandardizationMode, SvmParams};

use crate::errors::CliError;
use crate::fsio;

use super::{print_summary, read_features_csv};

#[derive(Args, Debug)]
pub struct CvArgs {
    /// Feature CSV produced by `features`
    #[arg(long)]
    pub features: PathBuf,
    /// Output cross-validation report JSON
    #[arg(long)]
    pub out: PathBuf,
    /// Soft-margin box constraint
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// RBF width: "auto" or a positive number
    #[arg(long, default_value = "auto")]
    pub gamma: String,
    /// Fit the standardizer on all instances instead of per fold (the
    /// literal all-instances protocol; leaks test statistics)
    #[arg(long)]
    pub global_standardization: bool,
}

pub fn parse_gamma(s: &str) -> Result<Gamma, CliError> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Gamma::Auto);
    }
    let g: f64 = s
        .parse()
        .map_err(|_| CliError::format(format!("--gamma must be \"auto\" or a number, got {s:?}")))?;
    Ok(Gamma::Fixed(g))
}

pub fn run(args: &CvArgs) -> Result<(), CliError> {
    let instances = read_features_csv(&args.features)?;
    let params = SvmParams {
        c: args.c,
        gamma: parse_gamma(&args.gamma)?,
        ..SvmParams::default()
    };
    let mode = if args.global_standardization {
        StandardizationMode::Global
    } else {
        StandardizationMode::PerFold
    };
    let report = loso_cv(&instances, &params, mode)?;

    let value = serde_json::to_value(&report).expect("report serializes");
    fsio::write_atomic(&args.out, &fsio::json_artifact(value))?;

    let method = instances[0].modality.to_string();
    print_summary(&[(method, &report)]);
    println!(
        "cv: {} folds over {} instances, report in {}",
        report.folds.len(),
        instances.len(),
        args.out.display()
    );
    Ok(())
}
