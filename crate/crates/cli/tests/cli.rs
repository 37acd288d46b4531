use std::path::Path;
use std::process::Command;

use sts_core::spectral::SpectralMeasure;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn sts(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sts").chain(args.iter().copied());
    let code = sts_cli::run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn two_level(dir: &Path) -> String {
    let path = dir.join("tree.spec");
    std::fs::write(&path, "# two branchings\nL = 1, 5\nk = 2, 2\n").unwrap();
    path.to_str().unwrap().to_string()
}

fn json_number(json: &str, key: &str) -> f64 {
    let start = json.find(&format!("\"{key}\":")).unwrap() + key.len() + 3;
    let rest = json[start..].trim_start();
    let end = rest.find([',', '\n']).unwrap();
    rest[..end].trim().parse().unwrap()
}

#[test]
fn info_prints_plan() {
    let dir = tempfile::tempdir().unwrap();
    let spec = two_level(dir.path());
    let r = sts(&["info", "--spec", &spec, "--depth", "6"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows: Vec<Vec<&str>> = r
        .stdout
        .lines()
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert!(rows.contains(&vec!["2", "6", "2", "1"]));
    assert!(r.stdout.contains("total 14"));
    assert!(r.stdout.contains("vertex_count 14"));
}

#[test]
fn verify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = two_level(dir.path());
    let out = dir.path().join("report.json");
    let r = sts(&[
        "verify",
        "--spec",
        &spec,
        "--depth",
        "9",
        "--kind",
        "adjacency",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let json = std::fs::read_to_string(&out).unwrap();
    assert!(json_number(&json, "eig_multiset_distance") < 1e-9);
    assert!(json.contains("\"dimension_identity\": true"));
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 2);

    let r = sts(&[
        "verify", "--spec", &spec, "--depth", "9", "--kind", "graphlap",
    ]);
    assert_eq!(r.code, 0);
    assert!(json_number(&r.stdout, "offblock_residual") < 1e-10);
}

#[test]
fn free_spectrum() {
    let r = sts(&["spectrum", "--spec", "none", "--free", "--n", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let measure = SpectralMeasure::from_csv(&r.stdout).unwrap();
    let expected = [(-2f64.sqrt(), 0.25), (0.0, 0.5), (2f64.sqrt(), 0.25)];
    assert_eq!(measure.atoms.len(), 3);
    for ((e, w), (ee, ew)) in measure.atoms.iter().zip(expected) {
        assert!((e - ee).abs() < 1e-12 && (w - ew).abs() < 1e-12);
    }
    assert_eq!(measure.to_csv(), r.stdout);
}

#[test]
fn spectrum_of_a_block_with_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let spec = two_level(dir.path());
    let r = sts(&[
        "spectrum", "--spec", &spec, "--level", "1", "--n", "500", "--delta", "0.05", "--emin",
        "-1.9", "--emax", "1.9", "--grid", "39",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("coverage 1 "), "{}", r.stderr);
    assert_eq!(r.stdout.lines().count(), 501);
}

#[test]
fn scans() {
    let r = sts(&["ssum", "--free", "--n", "4", "--energy", "0"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout, "n,S_n,log_norm\n1,1,0\n2,2,0\n3,3,0\n4,4,0\n");

    let r = sts(&[
        "mfun", "--free", "--energy", "0", "--delta", "0.5", "--n", "2000",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let row: Vec<f64> = r
        .stdout
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    // free m-function: m = (-z + sqrt(z² - 4)) / 2 at z = 0.5i
    let expected = (-0.5 + (0.25f64 + 4.0).sqrt()) / 2.0;
    assert!(row[2].abs() < 1e-12 && (row[3] - expected).abs() < 1e-12);

    let r = sts(&["dim", "--free", "--energy", "0", "--energy", "-0.5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "E,proxy,fit_residual");
    for line in &lines[1..] {
        let proxy: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.9..=1.0).contains(&proxy), "{line}");
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = two_level(dir.path());
    for args in [
        vec!["verify", "--spec", spec.as_str(), "--depth", "7"],
        vec![
            "mfun",
            "--spec",
            spec.as_str(),
            "--emin",
            "-1",
            "--emax",
            "1",
            "--grid",
            "9",
        ],
        vec![
            "ssum",
            "--spec",
            spec.as_str(),
            "--n",
            "300",
            "--energy",
            "0.4",
        ],
    ] {
        assert_eq!(sts(&args).stdout, sts(&args).stdout);
    }
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = two_level(dir.path());
    let bad = dir.path().join("bad.spec");
    std::fs::write(&bad, "L = 3, 2\nk = 2, 2\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["info", "--spec", bad.to_str().unwrap(), "--depth", "4"],
        vec!["info", "--spec", &spec],
        vec!["info", "--spec", "/nonexistent/file"],
        vec!["verify", "--spec", &spec, "--depth", "4", "--kind", "weird"],
        vec!["spectrum", "--free"],
        vec!["ssum", "--free", "--n", "10"],
        vec![
            "ssum", "--free", "--n", "10", "--energy", "0", "--energy", "1",
        ],
        vec!["mfun", "--free", "--energy", "0", "--delta", "-1"],
        vec!["info", "--spec", &spec, "--depth", "4", "--bogus"],
        vec!["frobnicate"],
        vec![],
    ];
    for args in cases {
        let r = sts(&args);
        assert_eq!(r.code, 1, "{args:?}: {}", r.stderr);
        assert!(!r.stderr.is_empty());
    }
    assert_eq!(sts(&["--help"]).code, 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sts");
    let ok = Command::new(bin)
        .args(["spectrum", "--free", "--n", "2"])
        .env("STS_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("eigenvalue,weight\n"));
    let bad = Command::new(bin).args(["info"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
