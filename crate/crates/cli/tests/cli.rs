use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonlocal"))
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let idx = rows[0].iter().position(|h| h == name).unwrap();
    rows[1..].iter().map(|r| r[idx].parse().unwrap()).collect()
}

#[test]
fn ramp_slope_is_three_halves() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("fit_ramp.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let slope = column(&csv_rows(&dir.path().join("exponent_fit.csv")), "slope")[0];
    assert!((slope - 1.5).abs() <= 0.05, "slope {slope}");
    assert!(dir.path().join("increments.csv").exists());
}

#[test]
fn counterexample_at_one_half_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("counterexample.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("energy.csv"));
    let energy = column(&rows, "energy");
    assert_eq!(energy.len(), 25);
    assert!(energy.windows(2).all(|w| w[1] > w[0]));
    let summary = csv_rows(&dir.path().join("counterexample.csv"));
    assert_eq!(summary[1][5], "true");
}

#[test]
fn fractional_kernel_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("verify_fractional.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("kernel_checks.csv"));
    assert!(column(&rows, "violations").iter().all(|&v| v == 0.0));
}

#[test]
fn reruns_are_byte_identical() {
    for (cfg, files) in [
        ("verify_fractional.toml", &["kernel_checks.csv"][..]),
        ("fit_ramp.toml", &["exponent_fit.csv", "increments.csv"][..]),
        ("parts.toml", &["parts.csv"][..]),
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert_eq!(run(&config(cfg), a.path(), &[]).status.code(), Some(0));
        assert_eq!(run(&config(cfg), b.path(), &["--threads", "2"]).status.code(), Some(0));
        for f in files {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{cfg}: {f}");
        }
    }
}

#[test]
fn manifest_records_hash_and_files() {
    let dir = tempfile::tempdir().unwrap();
    run(&config("verify_fractional.toml"), dir.path(), &["--seed", "3", "--tolerance", "1e-8"]);
    let m = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(m.contains("command = verify-kernel\n"));
    assert!(m.contains("seed = 3\n"));
    assert!(m.contains("tolerance = 0.00000001\n"));
    assert!(m.contains("files = kernel_checks.csv\n"));
    let hash = m.lines().find_map(|l| l.strip_prefix("config_sha256 = ")).unwrap();
    assert_eq!(hash.len(), 64);
}

#[test]
fn bad_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "command = \"solve\"\n",
        "command = \"counterexample\"\n[analysis]\nspeed = 3\n",
        "command = \"counterexample\"\n[analysis]\ns = 0.3\n",
        "command = \"verify-kernel\"\n[kernel]\nfamily = \"fractional\"\ns = 1.4\n",
        "command = \"fit-exponent\"\n[analysis]\nfunction = \"ramp\"\nz_min = 0.01\nz_max = 0.02\n",
        "command = \"caccioppoli\"\n[kernel]\nfamily = \"fractional\"\ns = 0.5\n[domain]\na = 0.0\nb = 1.0\nmesh_size = 8\n[rhs]\nkind = \"constant\"\n[analysis]\nx0 = 0.9\nr = 0.3\n",
        "not toml at all",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{i}.toml"));
        fs::write(&cfg, text).unwrap();
        let out = run(&cfg, &dir.path().join(format!("out{i}")), &[]);
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = run(&config("fit_ramp.toml"), dir.path(), &["--tolerance", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}
