//! `tdec` — cross-channel coordination analysis pipeline.
//!
//! Subcommands communicate through files: `synth` emits channel CSVs and
//! segment manifests, `corr` turns a speaker's qualifying segments into
//! channel-delay correlation matrices, `eig` decomposes them into rank-
//! ordered eigenspectra, `features` pools normalized spectra over index
//! ranges, `cv`/`fuse` run leave-one-subject-out evaluation (single modality
//! and stacked fusion), and `plotdata` emits averaged log-spectra with
//! difference curves. Reruns with identical inputs produce byte-identical
//! artifacts.

mod cmd;
mod errors;
mod fsio;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tdec",
    version,
    about = "Coordination analysis of multichannel time series via delay-embedded correlation eigenspectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic synthetic cohort (channels, manifests, labels)
    Synth(cmd::synth::SynthArgs),
    /// Correlation matrices for a speaker's qualifying segments
    Corr(cmd::corr::CorrArgs),
    /// Eigenspectra of stored correlation matrices
    Eig(cmd::eig::EigArgs),
    /// Pool normalized spectra over index ranges into features
    Features(cmd::features::FeaturesArgs),
    /// Leave-one-subject-out cross-validation of one modality
    Cv(cmd::cv::CvArgs),
    /// Stacked fusion of two aligned modality feature sets
    Fuse(cmd::fuse::FuseArgs),
    /// Averaged log-eigenspectra and per-group difference curves
    Plotdata(cmd::plotdata::PlotdataArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(args) => cmd::synth::run(args),
        Command::Corr(args) => cmd::corr::run(args),
        Command::Eig(args) => cmd::eig::run(args),
        Command::Features(args) => cmd::features::run(args),
        Command::Cv(args) => cmd::cv::run(args),
        Command::Fuse(args) => cmd::fuse::run(args),
        Command::Plotdata(args) => cmd::plotdata::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
