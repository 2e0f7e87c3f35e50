use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccd-lab"))
        .args(args)
        .env_remove("CCD_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn pair(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn ccd_controlled_phase_at_quarter_pi() {
    let out = run(&["ccd", "--example", "cphase", "--t", "0.7854", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let spec: Vec<(f64, f64)> = v["spectrum_a2"].as_array().unwrap().iter().map(pair).collect();
    let want = [(0.0, -1.0), (0.0, -1.0), (0.0, 1.0), (0.0, 1.0)];
    for (got, w) in spec.iter().zip(want) {
        assert!((got.0 - w.0).abs() < 1e-4 && (got.1 - w.1).abs() < 1e-4, "{got:?}");
    }
    assert_eq!(v["factors"]["k1"]["n"], 2);
    assert_eq!(v["factors"]["a"]["entries"].as_array().unwrap().len(), 16);
}

#[test]
fn ccd_random_five_qubits() {
    let out = run(&["ccd", "--random", "--seed", "7", "--n", "5", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert!(v["residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["parity"], "odd");
    assert_eq!(v["reduced"].as_array().unwrap().len(), 16);
}

#[test]
fn malformed_and_non_unitary_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("notunitary.json");
    std::fs::write(&bad, r#"{"n": 1, "entries": [[1,0],[1,0],[0,0],[1,0]]}"#).unwrap();
    let out = run(&["ccd", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"n\": 1, ").unwrap();
    assert_eq!(run(&["ccd", "--input", broken.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["ccd"]).status.code(), Some(1));
    assert_eq!(run(&["ccd", "--nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["capacity", "--example", "ghz"]).status.code(), Some(1));
    assert_eq!(run(&["mc-capacity", "--n", "4", "--samples", "10"]).status.code(), Some(1));
}

#[test]
fn matrix_file_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["ccd", "--random", "--seed", "2", "--n", "3"]);
    let v = json_of(&out);
    let path = dir.path().join("k1.json");
    std::fs::write(&path, v["factors"]["k1"].to_string()).unwrap();
    let out = run(&["capacity", "--input", path.to_str().unwrap(), "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json_of(&out)["capacity"].as_f64().unwrap() < 1e-8);
}

#[test]
fn capacity_examples() {
    let out = run(&["capacity", "--example", "cphase", "--t", "0.39269908169872414", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!((v["capacity"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-4);
    assert_eq!(v["maximal"], false);
    for key in ["points", "reduced", "capacity", "maximal", "witness"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let v = json_of(&run(&["capacity", "--example", "cphase", "--t", "0.7853981633974483"]));
    assert_eq!(v["maximal"], true);
    let dir = tempfile::tempdir().unwrap();
    let id = dir.path().join("id.json");
    std::fs::write(&id, r#"{"n": 1, "entries": [[1,0],[0,0],[0,0],[1,0]]}"#).unwrap();
    let v = json_of(&run(&["capacity", "--input", id.to_str().unwrap()]));
    assert_eq!(v["capacity"].as_f64().unwrap(), 0.0);
}

#[test]
fn capacity_sweep_csv() {
    let out = run(&["capacity", "--example", "cphase", "--t", "0:0.1:0.7", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,capacity,maximal"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').take(2).map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - (2.0 * cols[0]).sin().abs()).abs() < 1e-9);
    }
}

#[test]
fn spinchain_commands() {
    let out = run(&["spinchain", "tmin", "--n", "4", "--jz", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!((v["t_min"].as_f64().unwrap() - std::f64::consts::PI / 16.0).abs() < 1e-15);
    assert_eq!(v["consistent"], true);

    let out = run(&["spinchain", "kramers", "--family", "xxx", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["ground_unique"], true);
    assert!((v["ground_concurrence"].as_f64().unwrap() - 1.0).abs() < 1e-8);

    let out = run(&["spinchain", "sweep", "--g", "0", "--n", "4", "--h", "0:0.1:3", "--format", "csv", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,ground_energy,degeneracy,sz_sector,concurrence"));
    let conc: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!((conc[0] - 1.0).abs() < 1e-8);
    assert!(conc.last().unwrap().abs() < 1e-8);
}

#[test]
fn monte_carlo_is_byte_identical_across_threads() {
    let a = run(&["mc-capacity", "--n", "5", "--samples", "2000", "--seed", "1", "--threads", "1"]);
    let b = Command::new(env!("CARGO_BIN_EXE_ccd-lab"))
        .args(["mc-capacity", "--n", "5", "--samples", "2000", "--seed", "1"])
        .env("CCD_LAB_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json_of(&a);
    assert_eq!(v["points_per_sample"], 16);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sym.csv");
    let out = run(&["symeig", "--ell", "4", "--verify", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn polar_and_spectrum() {
    let out = run(&["polar", "--random", "--n", "3", "--seed", "4", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!(v["residual"].as_f64().unwrap() < 1e-9);
    let out = run(&["spectrum", "--example", "ising", "--n", "2", "--t", "0.3", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["source"], "evolution");
    let v = json_of(&run(&["spectrum", "--example", "w4"]));
    assert!(v["concurrence"].as_f64().unwrap() < 1e-12);
}
