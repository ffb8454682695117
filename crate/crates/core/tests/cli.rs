mod common;

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use aimvqe::experiment::{cmd_correlation, cmd_vqe, LoadedConfig};

use common::{config_path, data_path};

fn aimvqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aimvqe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn parse_summarizes_the_six_qubit_listing() {
    let o = aimvqe(&["parse", data_path("hamiltonian_6q.txt").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("17 terms, 6 qubits, hermitian"), "{}", stdout(&o));
}

#[test]
fn malformed_listing_exits_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.txt", "(1+0j) [Z0] +\n(0.5+0j) [Q1]\n");
    let o = aimvqe(&["parse", &p]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn exact_on_single_z() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "z0.txt", "(1+0j) [Z0]\n");
    let o = aimvqe(&["exact", &p, "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("E0 = -1.000000000000"), "{}", stdout(&o));
    assert!(dir.path().join("exact_z0.json").exists());
}

#[test]
fn exact_on_eight_qubits_is_quick_and_matches_golden() {
    let t = Instant::now();
    let o = aimvqe(&["exact", data_path("hamiltonian_8q.txt").to_str().unwrap()]);
    assert!(t.elapsed() < Duration::from_secs(10));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("golden: bitwise match"), "{}", stdout(&o));
}

#[test]
fn missing_hamiltonian_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "experiment = \"x\"\n[hamiltonian]\nfile = \"nowhere.txt\"\n",
    );
    let o = aimvqe(&["vqe", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("hamiltonian.file"), "{}", stderr(&o));
}

#[test]
fn bundled_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = LoadedConfig::load(&path).unwrap();
        cfg.config.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 10);
}

#[test]
fn hardware_efficient_run_stalls_above_ground() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = LoadedConfig::load(&config_path("fig-hea-6q")).unwrap();
    let r = cmd_vqe(&cfg, dir.path()).unwrap();
    assert!(!r.converged);
    assert!(r.final_energy > r.exact_energy + 1e-3, "{} vs {}", r.final_energy, r.exact_energy);
}

#[test]
fn rerun_reproduces_trace_bit_for_bit() {
    let read = |d: &Path| std::fs::read(d.join("fig-hea-6q_trace.csv")).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = aimvqe(&[
            "vqe",
            "--config",
            config_path("fig-hea-6q").to_str().unwrap(),
            "--out-dir",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(read(a.path()), read(b.path()));
    let header = String::from_utf8(read(a.path())).unwrap();
    assert!(header.starts_with("iteration,energy_hartree,evaluations,wall_ms\n"));
}

#[test]
fn result_json_embeds_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = aimvqe(&[
        "vqe",
        "--config",
        config_path("fig-hea-6q").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--seed",
        "42",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("fig-hea-6q_result.json")).unwrap()).unwrap();
    let text = json.to_string();
    assert!(text.contains("\"seed\":42"), "{text}");
    assert!(text.contains("efficient_su2"));
}

#[test]
fn vacuum_correlation_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = LoadedConfig::load(&config_path("vacuum-correlation")).unwrap();
    let r = cmd_correlation(&cfg, dir.path()).unwrap();
    for row in r.rows.iter().skip(1) {
        assert_eq!(row.szsz, 0.0, "{row:?}");
    }
}
