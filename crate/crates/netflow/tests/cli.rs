use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netflow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netflow"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run netflow")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&netflow(&["generate", "--scenario", "bridge41", "--seed", "2", "--out", "g"], d));
    for run in ["a", "b"] {
        let m = format!("{run}-nld.csv");
        ok(&netflow(&["dist", "g", "--metric", "nld", "--tmax", "10", "--samples", "200", "--out", &m], d));
        ok(&netflow(&["cluster", &m, "--method", "spectral", "--seed", "3", "--out", &format!("{run}-s.csv")], d));
        ok(&netflow(&["cluster", &m, "--method", "kmeans", "--row", "G1", "--out", &format!("{run}-r.csv")], d));
        ok(&netflow(&["heatmap", &m, "--out", &format!("{run}.ppm")], d));
    }
    for suffix in ["-nld.csv", "-s.csv", "-r.csv", ".ppm"] {
        let a = fs::read(d.join(format!("a{suffix}"))).unwrap();
        let b = fs::read(d.join(format!("b{suffix}"))).unwrap();
        assert_eq!(a, b, "{suffix} differs");
    }
    let rows = fs::read_to_string(d.join("a-r.csv")).unwrap();
    assert!(rows.ends_with("0,G1,0\n1,G2,1\n2,G3,0\n3,G4,0\n4,G5,0\n5,G6,1\n6,G7,0\n"), "{rows}");
}

#[test]
fn dist_on_individual_files_uses_file_stems() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("k2.csv"), "0,1\n1,0\n").unwrap();
    fs::write(d.join("empty.tsv"), "n=2\n").unwrap();
    let out = netflow(&["dist", "k2.csv", "empty.tsv", "--metric", "hamming"], d);
    ok(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# metric=hamming\nk2,empty\n"), "{text}");
    assert!(text.contains("1.0000000000000000e0"));
}

#[test]
fn exit_codes_by_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.csv"), "0,1\n0,0\n").unwrap();
    let out = netflow(&["dist", "bad.csv", "bad.csv"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cell (1,0)"));

    assert_eq!(netflow(&["dist", "missing.csv"], d).status.code(), Some(1));
    assert_eq!(netflow(&["generate", "--scenario", "nope", "--out", "x"], d).status.code(), Some(2));

    // all off-diagonal distances equal: similarity is undefined
    fs::write(d.join("flat.csv"), "# metric=hamming\na,b\n0,1\n1,0\n").unwrap();
    assert_eq!(netflow(&["cluster", "flat.csv"], d).status.code(), Some(3));
}

#[test]
fn reproduce_exit_code_follows_checks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("pass.cfg"), "scenario = bridge41\nseeds = 2\nmetrics = nld, hamming, frobenius\n").unwrap();
    let out = netflow(&["reproduce", "pass.cfg", "--out", "r1"], d);
    ok(&out);
    let report = fs::read_to_string(d.join("r1/report.txt")).unwrap();
    assert!(report.contains("result = PASS"));
    assert!(report.contains("seed-0/nld.csv"));

    // the two-SBM sweep is expected to miss its check on a single seed
    fs::write(d.join("miss.cfg"), "scenario = twosbm43\nseeds = 1\nseed = 0\nmetrics = nld\n").unwrap();
    let out = netflow(&["reproduce", "miss.cfg", "--out", "r2", "--tmax", "4", "--samples", "100"], d);
    let report = fs::read_to_string(d.join("r2/report.txt")).unwrap();
    let passed = report.contains("result = PASS");
    assert_eq!(out.status.code(), Some(if passed { 0 } else { 4 }));

    fs::write(d.join("bad.cfg"), "scenario = bridge41\nn_samples = 1\n").unwrap();
    assert_eq!(netflow(&["reproduce", "bad.cfg"], d).status.code(), Some(2));
}
