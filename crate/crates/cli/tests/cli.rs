//! Black-box tests of the `tdec` binary: exit codes, output shapes, and
//! idempotence of each subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tdec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(out),
        stderr(out)
    );
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Generate a small cohort into `dir/data` and return the data dir.
fn small_cohort(dir: &Path, seed: &str) -> PathBuf {
    let data = dir.join("data");
    let out = tdec(&[
        "synth",
        "--out-dir",
        path_str(&data),
        "--seed",
        seed,
        "--subjects",
        "2,2",
        "--rank",
        "5,1",
        "--segments",
        "2",
        "--segment-s",
        "8",
    ]);
    assert_exit(&out, 0);
    data
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = walk(dir)
        .into_iter()
        .map(|p| {
            let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
            (rel, fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    if let Ok(entries) = fs::read_dir(dir) {
        for entry in entries.flatten() {
            let p = entry.path();
            if p.is_dir() {
                out.extend(walk(&p));
            } else {
                out.push(p);
            }
        }
    }
    out
}

#[test]
fn synth_is_deterministic_and_rejects_bad_ranks() {
    let tmp = tempfile::tempdir().unwrap();
    let a = small_cohort(&tmp.path().join("a"), "7");
    let b = small_cohort(&tmp.path().join("b"), "7");
    assert_eq!(snapshot(&a), snapshot(&b), "same seed must give identical bytes");

    let c = small_cohort(&tmp.path().join("c"), "8");
    assert_ne!(snapshot(&a), snapshot(&c), "different seed must change outputs");

    let out = tdec(&[
        "synth",
        "--out-dir",
        path_str(&tmp.path().join("bad")),
        "--rank",
        "9,2",
        "--channels",
        "6",
    ]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("latent rank"));
}

#[test]
fn corr_tv_preset_emits_90x90_matrices() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_cohort(tmp.path(), "11");
    let corr = tmp.path().join("corr");
    let out = tdec(&[
        "corr",
        "--channels",
        path_str(&data.join("s00_channels.csv")),
        "--manifest",
        path_str(&data.join("s00_segments.json")),
        "--speaker",
        "s00",
        "--preset",
        "tv",
        "--out-dir",
        path_str(&corr),
    ]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("wrote 2 matrices (90x90)"));

    let matrix = fs::read_to_string(corr.join("s00_seg000.corr.csv")).unwrap();
    let lines: Vec<&str> = matrix.lines().collect();
    assert_eq!(lines.len(), 90);
    assert_eq!(lines[0].split(',').count(), 90);

    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(corr.join("s00_seg000.meta.json")).unwrap()).unwrap();
    assert_eq!(sidecar["channels"], 6);
    assert_eq!(sidecar["num_delays"], 15);
    assert_eq!(sidecar["delay_scale"], 7);
    assert_eq!(sidecar["sample_rate_hz"], 100.0);
}

#[test]
fn corr_fau_preset_emits_255x255_matrices() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = tdec(&[
        "synth",
        "--out-dir",
        path_str(&data),
        "--seed",
        "29",
        "--subjects",
        "1,1",
        "--rank",
        "4,2",
        "--channels",
        "17",
        "--segments",
        "1",
        "--segment-s",
        "10",
        "--rate",
        "28",
    ]);
    assert_exit(&out, 0);

    let corr = tmp.path().join("corr");
    let out = tdec(&[
        "corr",
        "--channels",
        path_str(&data.join("s00_channels.csv")),
        "--manifest",
        path_str(&data.join("s00_segments.json")),
        "--speaker",
        "s00",
        "--preset",
        "fau",
        "--out-dir",
        path_str(&corr),
    ]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("(255x255)"));
    let matrix = fs::read_to_string(corr.join("s00_seg000.corr.csv")).unwrap();
    assert_eq!(matrix.lines().count(), 255);
    assert_eq!(matrix.lines().next().unwrap().split(',').count(), 255);
}

#[test]
fn corr_with_no_qualifying_segments_warns_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_cohort(tmp.path(), "13");
    let corr = tmp.path().join("corr");
    let out = tdec(&[
        "corr",
        "--channels",
        path_str(&data.join("s00_channels.csv")),
        "--manifest",
        path_str(&data.join("s00_segments.json")),
        "--speaker",
        "s00",
        "--preset",
        "tv",
        "--min-segment-s",
        "60",
        "--out-dir",
        path_str(&corr),
    ]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("no qualifying segments"));
    assert!(walk(&corr).is_empty());
}

/// Run the cohort through corr + eig and return the spectra CSV path.
fn spectra_for(data: &Path, work: &Path, subjects: &[&str]) -> PathBuf {
    let corr = work.join("corr");
    for s in subjects {
        let out = tdec(&[
            "corr",
            "--channels",
            path_str(&data.join(format!("{s}_channels.csv"))),
            "--manifest",
            path_str(&data.join(format!("{s}_segments.json"))),
            "--speaker",
            s,
            "--preset",
            "tv",
            "--out-dir",
            path_str(&corr),
        ]);
        assert_exit(&out, 0);
    }
    let spectra = work.join("spectra.csv");
    let out = tdec(&[
        "eig",
        "--corr-dir",
        path_str(&corr),
        "--labels",
        path_str(&data.join("labels.csv")),
        "--modality",
        "tv",
        "--out",
        path_str(&spectra),
    ]);
    assert_exit(&out, 0);
    spectra
}

#[test]
fn features_full_range_returns_one_over_dim() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_cohort(tmp.path(), "17");
    let spectra = spectra_for(&data, tmp.path(), &["s00", "s01"]);

    let features = tmp.path().join("features.csv");
    let out = tdec(&[
        "features",
        "--spectra",
        path_str(&spectra),
        "--ranges",
        "0:1",
        "--out",
        path_str(&features),
    ]);
    assert_exit(&out, 0);
    let text = fs::read_to_string(&features).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let value: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!((value - 1.0 / 90.0).abs() < 1e-12, "{value}");
        rows += 1;
    }
    assert_eq!(rows, 4);
}

#[test]
fn features_rejects_bad_range_tokens() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_cohort(tmp.path(), "19");
    let spectra = spectra_for(&data, tmp.path(), &["s00"]);
    let out = tdec(&[
        "features",
        "--spectra",
        path_str(&spectra),
        "--ranges",
        "0.5:0.4",
        "--out",
        path_str(&tmp.path().join("f.csv")),
    ]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("[0.5, 0.4]"));
}

fn write_separable_features(path: &Path, modality: &str, flip: bool) {
    let mut text = String::from("subject_id,label,modality,segment_id,f0,f1\n");
    for s in 0..6 {
        for g in 0..2 {
            let j = (s * 2 + g) as f64 * 0.01;
            let (a, b) = if flip { (-2.0 - j, 2.0 + j) } else { (2.0 + j, -2.0 - j) };
            text.push_str(&format!("sz{s:02},SZ,{modality},seg{g:03},{a},{b}\n"));
            text.push_str(&format!("hc{s:02},HC,{modality},seg{g:03},{},{}\n", -a, -b));
        }
    }
    fs::write(path, text).unwrap();
}

#[test]
fn cv_reports_twelve_folds_and_perfect_separable_accuracy() {
    let tmp = tempfile::tempdir().unwrap();
    let features = tmp.path().join("features_tv.csv");
    write_separable_features(&features, "TV", false);

    let report_path = tmp.path().join("report.json");
    let out = tdec(&[
        "cv",
        "--features",
        path_str(&features),
        "--out",
        path_str(&report_path),
    ]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("100.00%"), "{}", stdout(&out));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["folds"].as_array().unwrap().len(), 12);
    assert_eq!(report["mean_accuracy"], 1.0);
    assert_eq!(report["f1_per_class"]["SZ"], 1.0);
    assert_eq!(report["f1_per_class"]["HC"], 1.0);
}

#[test]
fn fuse_rejects_mismatched_keys_and_duplicate_modalities() {
    let tmp = tempfile::tempdir().unwrap();
    let tv = tmp.path().join("tv.csv");
    let fau = tmp.path().join("fau.csv");
    write_separable_features(&tv, "TV", false);
    write_separable_features(&fau, "FAU", true);

    // drop one row from the FAU file
    let text = fs::read_to_string(&fau).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    fs::write(&fau, lines.join("\n")).unwrap();

    let out = tdec(&[
        "fuse",
        "--features",
        path_str(&tv),
        "--features",
        path_str(&fau),
        "--out",
        path_str(&tmp.path().join("r.json")),
    ]);
    assert_exit(&out, 3);
    assert!(stderr(&out).contains("missing instance keys"));
    assert!(stderr(&out).contains("hc05"), "{}", stderr(&out));

    let out = tdec(&[
        "fuse",
        "--features",
        path_str(&tv),
        "--features",
        path_str(&tv),
        "--out",
        path_str(&tmp.path().join("r.json")),
    ]);
    assert_exit(&out, 3);
    assert!(stderr(&out).contains("more than one"));
}

#[test]
fn fused_separable_modalities_reach_full_accuracy() {
    let tmp = tempfile::tempdir().unwrap();
    let tv = tmp.path().join("tv.csv");
    let fau = tmp.path().join("fau.csv");
    write_separable_features(&tv, "TV", false);
    write_separable_features(&fau, "FAU", true);

    let report_path = tmp.path().join("report.json");
    let out = tdec(&[
        "fuse",
        "--features",
        path_str(&tv),
        "--features",
        path_str(&fau),
        "--out",
        path_str(&report_path),
    ]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("Multi-modal"));
    assert!(stdout(&out).contains("100.00%"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["folds"].as_array().unwrap().len(), 12);
}

#[test]
fn plotdata_zero_difference_for_identical_groups() {
    let tmp = tempfile::tempdir().unwrap();
    // two groups with byte-identical spectra rows
    let mut text = String::from("segment_id,subject_id,label,modality,lambda0,lambda1,lambda2\n");
    text.push_str("a_seg000,a,SZ,TV,2.0,0.75,0.25\n");
    text.push_str("b_seg000,b,HC,TV,2.0,0.75,0.25\n");
    let spectra = tmp.path().join("spectra.csv");
    fs::write(&spectra, text).unwrap();

    let plot = tmp.path().join("plot.csv");
    let out = tdec(&[
        "plotdata",
        "--spectra",
        path_str(&spectra),
        "--reference",
        "HC",
        "--out",
        path_str(&plot),
    ]);
    assert_exit(&out, 0);
    let text = fs::read_to_string(&plot).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,normalized_index,log10_SZ,log10_HC,diff_SZ");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        assert_eq!(line.rsplit(',').next().unwrap(), "0");
    }
}

#[test]
fn plotdata_single_group_has_no_difference_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("segment_id,subject_id,label,modality,lambda0,lambda1\n");
    text.push_str("a_seg000,a,HC,TV,1.5,0.5\n");
    let spectra = tmp.path().join("spectra.csv");
    fs::write(&spectra, text).unwrap();

    let plot = tmp.path().join("plot.csv");
    let out = tdec(&[
        "plotdata",
        "--spectra",
        path_str(&spectra),
        "--reference",
        "HC",
        "--out",
        path_str(&plot),
    ]);
    assert_exit(&out, 0);
    let text = fs::read_to_string(&plot).unwrap();
    assert_eq!(text.lines().next().unwrap(), "index,normalized_index,log10_HC");

    // missing reference group is a protocol error
    let out = tdec(&[
        "plotdata",
        "--spectra",
        path_str(&spectra),
        "--reference",
        "SZ",
        "--out",
        path_str(&plot),
    ]);
    assert_exit(&out, 3);
}

#[test]
fn commands_are_idempotent_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_cohort(tmp.path(), "23");
    let spectra = spectra_for(&data, tmp.path(), &["s00", "s01", "s02", "s03"]);
    let first = fs::read(&spectra).unwrap();

    // rerun eig over the same matrices into the same path
    let out = tdec(&[
        "eig",
        "--corr-dir",
        path_str(&tmp.path().join("corr")),
        "--labels",
        path_str(&data.join("labels.csv")),
        "--modality",
        "tv",
        "--out",
        path_str(&spectra),
    ]);
    assert_exit(&out, 0);
    assert_eq!(fs::read(&spectra).unwrap(), first);
}
