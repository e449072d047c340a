use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use supermaps::channels::SignalingRelation;
use supermaps::io::{write_json, ChannelDoc, CombDoc, SupermapDoc};
use supermaps::rng::rng_from;
use supermaps::supermaps::Comb;
use supermaps::{Channel, Quantum, SystemType};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supermap"))
        .args(args)
        .env_remove("SUPERMAP_CONFIG")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn qubits(labels: &[&str]) -> SystemType {
    SystemType::from_pairs(&labels.iter().map(|l| (*l, 2)).collect::<Vec<_>>()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identity_channel_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("id.json");
    let t = qubits(&["a"]);
    write_json(
        &f,
        &ChannelDoc::from_channel(&Channel::<Quantum>::identity(&t)),
    )
    .unwrap();
    let out = run(&["validate-channel", path_str(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["cp"], true);
    assert_eq!(v["tp"], true);
}

#[test]
fn swap_violates_no_signaling_on_both_edges() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("swap.json");
    let r = dir.path().join("ns.json");
    let t = qubits(&["a", "b"]);
    let swap = Channel::<Quantum>::wire(&t, &t, &[("a", "b"), ("b", "a")]).unwrap();
    write_json(&f, &ChannelDoc::from_channel(&swap)).unwrap();
    write_json(&r, &SignalingRelation::no_signaling(&t, &t).unwrap()).unwrap();
    let out = run(&[
        "validate-channel",
        path_str(&f),
        "--signaling",
        path_str(&r),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let edges = v["signaling"]["edges"].as_array().unwrap();
    let failing: Vec<(String, String)> = edges
        .iter()
        .filter(|e| e["holds"] == false)
        .map(|e| {
            (
                e["from"].as_str().unwrap().into(),
                e["to"].as_str().unwrap().into(),
            )
        })
        .collect();
    assert!(failing.contains(&("a".into(), "b".into())));
    assert!(failing.contains(&("b".into(), "a".into())));
}

#[test]
fn product_channel_obeys_no_signaling() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("prod.json");
    let r = dir.path().join("ns.json");
    let t = qubits(&["a", "b"]);
    let id = Channel::<Quantum>::identity(&t);
    write_json(&f, &ChannelDoc::from_channel(&id)).unwrap();
    write_json(&r, &SignalingRelation::no_signaling(&t, &t).unwrap()).unwrap();
    let out = run(&[
        "validate-channel",
        path_str(&f),
        "--signaling",
        path_str(&r),
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, "{ not json").unwrap();
    assert_eq!(
        run(&["validate-channel", path_str(&f)]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["validate-channel", "/nonexistent/file.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn non_cp_matrix_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("t.json");
    let t = qubits(&["a"]);
    write_json(
        &f,
        &ChannelDoc::from_channel(&Channel::<Quantum>::transpose_map(&t)),
    )
    .unwrap();
    let out = run(&["validate-channel", path_str(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["cp"], false);
}

#[test]
fn identity_oracle_extracts() {
    let out = run(&["extract", "--oracle", "identity", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["supermap"]["body"].is_object());
}

#[test]
fn adversarial_oracles_are_refuted_with_a_seed() {
    for name in ["decorrelating", "nonlinear"] {
        let out = run(&["extract", "--oracle", name, "--trials", "30"]);
        assert_eq!(out.status.code(), Some(1), "{name}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("first_failing_seed"), "{name}: {text}");
        assert!(json(&out).get("supermap").is_none());
    }
}

#[test]
fn comb_file_extraction_matches_library_and_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("comb.json");
    let comb = Comb::<Quantum>::random(
        &qubits(&["a"]),
        &qubits(&["a'"]),
        &qubits(&["b"]),
        &qubits(&["b'"]),
        &qubits(&["e"]),
        &mut rng_from(11),
    )
    .unwrap();
    write_json(&f, &CombDoc::from_comb(&comb)).unwrap();
    let expected = comb.to_supermap().unwrap();

    let mut bodies = Vec::new();
    for i in 0..2 {
        let o = dir.path().join(format!("s{i}.json"));
        let seed = (17 + i).to_string();
        let out = run(&[
            "extract",
            "--oracle",
            path_str(&f),
            "--out",
            path_str(&o),
            "--trials",
            "20",
            "--seed",
            &seed,
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let doc: SupermapDoc = supermaps::io::read_json(&o).unwrap();
        let s = doc.to_supermap::<Quantum>().unwrap();
        assert!(s.body().distance(expected.body()).unwrap() <= 1e-8);
        bodies.push(s);
    }
    assert!(bodies[0].body().distance(bodies[1].body()).unwrap() <= 1e-8);
}

#[test]
fn roundtrip_commands() {
    let out = run(&["roundtrip", "--trials", "25"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);

    let out = run(&["roundtrip", "--classical", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0));

    assert_eq!(run(&["roundtrip", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn oversized_requests_are_refused() {
    let out = run(&["roundtrip", "--dims", "4,4,4,4", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("run.toml");
    std::fs::write(&c, "trials = 4\nseed = 9\n").unwrap();
    let out = run(&["--config", path_str(&c), "roundtrip"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["trials"], 4);
    assert_eq!(v["seed"], 9);
}

#[test]
fn switch_demo_reports_expected_outputs() {
    let out = run(&["switch-demo", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["quantum_xz"]["fidelity_minus"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    assert!((v["quantum_hh"]["fidelity_plus"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    let p = v["classical_xz"]["x_basis_probabilities"]
        .as_array()
        .unwrap();
    assert!((p[0].as_f64().unwrap() - 0.5).abs() <= 1e-10);
}
