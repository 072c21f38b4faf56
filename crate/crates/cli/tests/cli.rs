use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qalpha"));
    c.env_remove("QALPHA_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn default_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fubini_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.json");
    let corpus = default_corpus();
    let o = run(&[
        "verify", "fubini", "--alpha", "0.5", "--n", "1", "--size", "64",
        "--corpus", corpus.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("max discrepancy"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(report["max_discrepancy"].as_f64().unwrap() < 1e-12);
    assert!(!report["records"].as_array().unwrap().is_empty());
}

#[test]
fn constant_grid_has_zero_qalpha() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("constant.grid");
    std::fs::write(&grid, "1 8\n2\n2\n2\n2\n2\n2\n2\n2\n").unwrap();
    let o = run(&["norm", "qalpha", "--alpha", "0.5", "--n", "1", "--size", "8", "--input", grid.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["report"]["value"].as_f64(), Some(0.0));
}

#[test]
fn kernel_table_has_one_row_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let o = run(&["kernel", "--alpha", "0.5", "--m", "2", "--n", "1", "--pairs", "100", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let full = headers.iter().position(|h| h == "k_full").unwrap();
    let allowed = headers.iter().position(|h| h == "k_allowed").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 100);
    for r in rows {
        let (a, b): (f64, f64) = (r[full].parse().unwrap(), r[allowed].parse().unwrap());
        assert!(a >= b);
    }
}

#[test]
fn config_errors_exit_2_with_one_line() {
    for args in [
        vec!["verify", "equivalence", "--alpha", "1.5"],
        vec!["norm", "qalpha", "--size", "12"],
        vec!["kernel", "--m", "1.5"],
        vec!["verify", "lemma23", "--K", "9", "--size", "64"],
        vec!["norm", "qalpha", "--input", "does-not-exist.grid"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        let err = stderr(&o);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error:"));
    }
}

#[test]
fn unknown_subcommand_prints_usage() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "4", "4"] {
        let out = dir.path().join(format!("e{}.json", files.len()));
        let o = run(&["--threads", threads, "verify", "equivalence", "--size", "32", "--size", "64", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.push(std::fs::read(out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[1], files[2]);
}

#[test]
fn every_subcommand_documents_its_flags() {
    let cases: &[(&[&str], &[&str])] = &[
        (&["gen"], &["--n", "--size", "--corpus", "--out"]),
        (&["norm"], &["--alpha", "--lambda", "--level-max", "--shifted", "--K", "--j-min", "--profile", "--input", "--corpus", "--n", "--size", "--out", "--format"]),
        (&["decompose"], &["--j-min", "--profile", "--input", "--corpus", "--n", "--size", "--out", "--format"]),
        (&["kernel"], &["--alpha", "--m", "--n", "--pairs", "--seed", "--out", "--format"]),
        (&["verify", "equivalence"], &["--alpha", "--size", "--corpus", "--n", "--out", "--format"]),
        (&["verify", "fubini"], &["--alpha", "--size", "--level-max", "--K", "--corpus", "--n"]),
        (&["verify", "lemma23"], &["--alpha", "--m", "--K", "--size", "--corpus", "--n"]),
        (&["verify", "decay"], &["--alpha", "--m", "--n", "--pairs", "--seed"]),
        (&["verify", "embedding"], &["--alpha", "--size", "--corpus", "--n"]),
    ];
    for (cmd, flags) in cases {
        let mut args = cmd.to_vec();
        args.push("--help");
        let o = run(&args);
        assert!(o.status.success());
        let help = String::from_utf8_lossy(&o.stdout);
        for flag in *flags {
            assert!(help.contains(flag), "{cmd:?} help lacks {flag}");
        }
        assert!(help.contains("--threads"));
    }
}

#[test]
fn out_dir_variable_sets_default_destination() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["verify", "decay", "--pairs", "50"])
        .env("QALPHA_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("decay.json").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("slope"));
}

#[test]
fn generated_grids_feed_back_into_norms() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = default_corpus();
    let o = run(&["gen", "--n", "2", "--size", "16", "--corpus", corpus.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let listed: Vec<&str> = std::str::from_utf8(&o.stdout).unwrap().lines().collect();
    assert_eq!(listed.len(), 9);
    let grid = dir.path().join("02_harmonic-4.grid");
    for kind in ["qalpha", "campanato", "lpmorrey", "dyadiclp", "mb"] {
        let o = run(&["norm", kind, "--input", grid.to_str().unwrap(), "--format", "csv"]);
        assert!(o.status.success(), "{kind}: {}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).lines().count() > 1);
    }
    let o = run(&["decompose", "--input", grid.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v[0]["reconstruction_error"].as_f64().unwrap() < 1e-12);
}
