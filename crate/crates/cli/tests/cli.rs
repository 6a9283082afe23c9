use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(format!("{name}.toml"))
}

fn ztel(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ztel"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("ZTEL_THREADS", "2")
        .output()
        .expect("spawn ztel")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn nullity_on_heisenberg_writes_decay_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = ztel(&["run", "nullity", fixture("heisenberg").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("decay.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("family,scale,delta"));
    assert!(csv.lines().any(|l| l.starts_with("t,64,")));
    for f in ["eta.csv", "psi.json", "verdict.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn singular_matrix_exits_2_with_not_unimodular() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[group]\nname = \"bad\"\nmatrix = [[2, 0], [0, 2]]\n").unwrap();
    let o = ztel(&["run", "nullity", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("NotUnimodular"), "{}", stderr(&o));
}

#[test]
fn syntax_error_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.toml");
    std::fs::write(&cfg, "[group]\nname = \"x\"\nmatrix = [[1, 1], [0, 1]\n").unwrap();
    let o = ztel(&["run", "group", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = ztel(&["run", "coarse"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_verdict_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    std::fs::write(
        &cfg,
        "[group]\nname = \"heisenberg\"\nmatrix = [[1, 1], [0, 1]]\n\n[[family]]\nkind = \"t_powers\"\nladder = [4, 8, 16]\nthreshold = 0.001\n",
    )
    .unwrap();
    let o = ztel(&["run", "nullity", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn demo_heisenberg_contrast() {
    let dir = tempfile::tempdir().unwrap();
    let o = ztel(&["run", "demo-heisenberg", "--plot"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let slope = s["slope_final"].as_f64().unwrap();
    let eucl = s["euclidean_final"].as_f64().unwrap();
    assert!(slope < eucl, "{slope} {eucl}");
    assert_eq!(s["slope_compactification"]["deltas"].as_array().unwrap().len(), s["euclidean"]["deltas"].as_array().unwrap().len());
    assert!(dir.path().join("demo.svg").exists());
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = fixture("sol");
    for e in ["group", "telescope", "nullity", "boundary"] {
        for d in [&a, &b] {
            let o = ztel(&["run", e, cfg.to_str().unwrap(), "--seed", "7"], d.path());
            assert_eq!(o.status.code(), Some(0), "{e}: {}", stderr(&o));
        }
    }
    for f in ["growth.csv", "growth_comparison.csv", "domain.csv", "eta.csv", "decay.csv", "boundary.csv", "telescope.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
