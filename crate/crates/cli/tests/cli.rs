use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use memlab_cli::config::ExperimentConfig;
use memlab_cli::sweep::{run_sweep, RunOptions, COLUMNS, CSV_VERSION_LINE};
use memlab_core::models::batch_io;

const SMALL: &str = r#"
[experiment]
problem = "tpca"
k = 3
d = [4]
lambda = [1.0]
samples = [32]
seeds = [5, 6, 7]
estimator = "power"
"#;

fn memlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memlab")).args(args).output().expect("binary runs")
}

fn repo_config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn one_point_three_seeds_gives_three_rows() {
    let cfg = ExperimentConfig::parse(SMALL).unwrap();
    let rows = run_sweep(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(rows.len(), 3);
}

#[test]
fn empty_seed_list_is_rejected() {
    let text = SMALL.replace("seeds = [5, 6, 7]", "seeds = []");
    let cfg = ExperimentConfig::parse(&text);
    let rejected = match cfg {
        Err(_) => true,
        Ok(cfg) => run_sweep(&cfg, &RunOptions::default()).is_err(),
    };
    assert!(rejected);
}

#[test]
fn sweep_writes_version_line_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("rows.csv");
    let status = memlab(&["--out", out.to_str().unwrap(), "sweep", cfg.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_VERSION_LINE));
    assert_eq!(lines.next(), Some(COLUMNS.join(",").as_str()));
    assert_eq!(lines.count(), 3);
}

#[test]
fn unknown_suite_exits_with_usage_error() {
    let out = memlab(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("k = 3", "k = 0"));
    let out = memlab(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn hermite_suite_passes_through_binary() {
    let out = memlab(&["verify", "hermite"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("check,status,measured,target"));
    assert!(stdout.lines().skip(1).all(|l| l.contains(",pass,")));
}

#[test]
fn sample_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("batch.bin");
    let status = memlab(&["--out", out.to_str().unwrap(), "sample", cfg.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let bytes = fs::read(&out).unwrap();
    assert_eq!(&bytes[..8], &batch_io::MAGIC);
    let batch = batch_io::read_batch(bytes.as_slice()).unwrap();
    assert_eq!((batch.len(), batch.d, batch.record_len()), (32, 4, 64));
}

#[test]
fn sample_without_destination_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(memlab(&["sample", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn reduce_reports_identical_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("board.txt");
    let cfg = repo_config("quantized_reduce.toml");
    let out = memlab(&["reduce", cfg.to_str().unwrap(), "--transcript", transcript.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("bit-identical"));
    let bits: usize = stdout
        .lines()
        .find_map(|l| l.strip_prefix("transcript:"))
        .and_then(|l| l.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .unwrap();
    assert_eq!(fs::read_to_string(transcript).unwrap().lines().count(), bits);
}

#[test]
fn reduce_rejects_non_quantized_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(memlab(&["reduce", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn master_seed_changes_rows() {
    let cfg = ExperimentConfig::parse(SMALL).unwrap();
    let a = run_sweep(&cfg, &RunOptions::default()).unwrap();
    let b = run_sweep(&cfg, &RunOptions { master_seed: 99, ..RunOptions::default() }).unwrap();
    let overlaps = |rows: &[memlab_cli::sweep::SweepRow]| rows.iter().map(|r| r.fields()[12].clone()).collect::<Vec<_>>();
    assert_ne!(overlaps(&a), overlaps(&b));
}
