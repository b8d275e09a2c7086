//! Acceptance: a fixed-seed run of the full pipeline (synth -> corr -> eig
//! -> features -> cv/fuse -> plotdata) twice over must produce byte-identical
//! artifacts everywhere.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn tdec(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_tdec"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "tdec {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap().flatten() {
        let p = entry.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn run_pipeline(root: &Path) {
    let data = root.join("data");
    let subjects: Vec<String> = (0..12).map(|i| format!("s{i:02}")).collect();

    tdec(&[
        "synth",
        "--out-dir",
        path_str(&data),
        "--seed",
        "42",
        "--subjects",
        "6,6",
        "--rank",
        "5,1",
        "--segments",
        "3",
        "--segment-s",
        "10",
    ]);

    // two analysis views of the same recordings: the TV preset and a
    // shorter delay scale standing in for a second modality
    for (tag, extra) in [
        ("tv", vec!["--preset", "tv"]),
        ("fau", vec!["--rate", "100", "--delay-scale", "3", "--num-delays", "15"]),
    ] {
        let corr_dir = root.join(format!("corr_{tag}"));
        for s in &subjects {
            let channels = data.join(format!("{s}_channels.csv"));
            let manifest = data.join(format!("{s}_segments.json"));
            let mut args = vec![
                "corr",
                "--channels",
                path_str(&channels),
                "--manifest",
                path_str(&manifest),
                "--speaker",
                s,
                "--out-dir",
                path_str(&corr_dir),
            ];
            args.extend(extra.iter().copied());
            tdec(&args);
        }
        let spectra = root.join(format!("spectra_{tag}.csv"));
        let labels = data.join("labels.csv");
        tdec(&[
            "eig",
            "--corr-dir",
            path_str(&corr_dir),
            "--labels",
            path_str(&labels),
            "--modality",
            tag,
            "--out",
            path_str(&spectra),
        ]);
        let features = root.join(format!("features_{tag}.csv"));
        let ranges = if tag == "tv" { "0:0.03,0.95:1" } else { "0:0.02,0.96:1" };
        tdec(&[
            "features",
            "--spectra",
            path_str(&spectra),
            "--ranges",
            ranges,
            "--out",
            path_str(&features),
        ]);
    }

    tdec(&[
        "cv",
        "--features",
        path_str(&root.join("features_tv.csv")),
        "--out",
        path_str(&root.join("report_tv.json")),
    ]);
    tdec(&[
        "fuse",
        "--features",
        path_str(&root.join("features_tv.csv")),
        "--features",
        path_str(&root.join("features_fau.csv")),
        "--out",
        path_str(&root.join("report_fused.json")),
    ]);
    tdec(&[
        "plotdata",
        "--spectra",
        path_str(&root.join("spectra_tv.csv")),
        "--reference",
        "HC",
        "--out",
        path_str(&root.join("plot_tv.csv")),
    ]);
}

#[test]
fn criterion_end_to_end_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let run1 = tmp.path().join("run1");
    let run2 = tmp.path().join("run2");
    run_pipeline(&run1);
    run_pipeline(&run2);

    let mut files1: Vec<String> = walk(&run1)
        .into_iter()
        .map(|p| p.strip_prefix(&run1).unwrap().to_string_lossy().into_owned())
        .collect();
    files1.sort();
    let mut files2: Vec<String> = walk(&run2)
        .into_iter()
        .map(|p| p.strip_prefix(&run2).unwrap().to_string_lossy().into_owned())
        .collect();
    files2.sort();
    assert_eq!(files1, files2, "artifact sets differ");
    assert!(files1.len() > 80, "pipeline produced only {} artifacts", files1.len());

    for rel in &files1 {
        let a = fs::read(run1.join(rel)).unwrap();
        let b = fs::read(run2.join(rel)).unwrap();
        assert_eq!(a, b, "artifact {rel} differs between runs");
    }
    println!(
        "ACCEPTANCE end_to_end_determinism ({} artifacts byte-identical): PASS",
        files1.len()
    );
}
