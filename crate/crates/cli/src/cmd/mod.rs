//! Subcommand implementations and the small file formats they share.

pub mod corr;
pub mod cv;
pub mod eig;
pub mod features;
pub mod fuse;
pub mod plotdata;
pub mod synth;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use tdec_core::classify::CvReport;
use tdec_core::spectrum::FeatureInstance;
use tdec_core::types::{ClassLabel, Modality};
use tdec_core::util::fmt_sig12;

use crate::errors::CliError;
use crate::fsio;

/// labels.csv: `subject_id,label` with a header row.
pub fn write_labels_csv(labels: &BTreeMap<String, ClassLabel>) -> String {
    let mut out = String::from("subject_id,label\n");
    for (subject, label) in labels {
        let _ = writeln!(out, "{subject},{label}");
    }
    out
}

pub fn read_labels_csv(path: &Path) -> Result<BTreeMap<String, ClassLabel>, CliError> {
    let text = fsio::read_to_string(path)?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line == "subject_id,label" {
            continue;
        }
        let (subject, label) = line.split_once(',').ok_or_else(|| {
            CliError::format(format!("{}: line {}: expected subject_id,label", path.display(), i + 1))
        })?;
        let label: ClassLabel = label.trim().parse().map_err(|e| {
            CliError::format(format!("{}: line {}: {e}", path.display(), i + 1))
        })?;
        out.insert(subject.trim().to_string(), label);
    }
    if out.is_empty() {
        return Err(CliError::format(format!("{}: no label rows", path.display())));
    }
    Ok(out)
}

/// Feature CSV: header `subject_id,label,modality,segment_id,f0..fk`.
pub fn write_features_csv(instances: &[FeatureInstance]) -> String {
    let k = instances.first().map_or(0, |i| i.features.len());
    let mut out = String::from("subject_id,label,modality,segment_id");
    for j in 0..k {
        let _ = write!(out, ",f{j}");
    }
    out.push('\n');
    for inst in instances {
        let _ = write!(
            out,
            "{},{},{},{}",
            inst.subject_id, inst.label, inst.modality, inst.segment_id
        );
        for &f in &inst.features {
            out.push(',');
            out.push_str(&fmt_sig12(f));
        }
        out.push('\n');
    }
    out
}

pub fn read_features_csv(path: &Path) -> Result<Vec<FeatureInstance>, CliError> {
    let text = fsio::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with("subject_id,") {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 5 {
            return Err(CliError::format(format!(
                "{}: line {}: expected subject_id,label,modality,segment_id and features",
                path.display(),
                i + 1
            )));
        }
        let label: ClassLabel = cells[1]
            .trim()
            .parse()
            .map_err(|e| CliError::format(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        let modality: Modality = cells[2]
            .trim()
            .parse()
            .map_err(|e| CliError::format(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        let features = cells[4..]
            .iter()
            .map(|c| {
                c.trim().parse::<f64>().map_err(|_| {
                    CliError::format(format!(
                        "{}: line {}: cannot parse {:?} as a number",
                        path.display(),
                        i + 1,
                        c.trim()
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        out.push(FeatureInstance {
            subject_id: cells[0].trim().to_string(),
            label,
            modality,
            segment_id: cells[3].trim().to_string(),
            features,
        });
    }
    if out.is_empty() {
        return Err(CliError::format(format!(
            "{}: no feature rows",
            path.display()
        )));
    }
    Ok(out)
}

/// Summary table printed by cv/fuse, one row per method.
pub fn print_summary(rows: &[(String, &CvReport)]) {
    println!("{:<14} {:>10}   F1(S)/F1(H)", "Method", "Accuracy");
    for (method, report) in rows {
        let f1 = |label: ClassLabel| -> String {
            report
                .f1_per_class
                .get(&label)
                .map_or_else(|| "-".to_string(), |v| format!("{:.2}", v * 100.0))
        };
        println!(
            "{:<14} {:>9.2}%   {}/{}",
            method,
            report.mean_accuracy * 100.0,
            f1(ClassLabel::Sz),
            f1(ClassLabel::Hc)
        );
    }
}

/// Stem naming for per-segment artifacts: `<speaker>_seg<idx>`.
pub fn segment_stem(speaker: &str, index: usize) -> String {
    format!("{speaker}_seg{index:03}")
}

/// Recover (subject, segment_id) from an artifact stem.
pub fn split_segment_stem(stem: &str) -> Option<(String, String)> {
    let (subject, tail) = stem.rsplit_once("_seg")?;
    if tail.is_empty() || !tail.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((subject.to_string(), stem.to_string()))
}
