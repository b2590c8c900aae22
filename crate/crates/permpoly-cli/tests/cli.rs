//! End-to-end runs of the binary: exit codes, stream shapes, reproducibility.

use std::process::{Command, Output};

fn permpoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permpoly"))
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

#[test]
fn table_1_for_f49_matches_reference_rows() {
    let out = permpoly(&["tables", "--p", "7", "--which", "1", "--out", "csv"]);
    assert!(out.status.success());
    let body = stdout(&out);
    assert!(body.starts_with("# field:"), "reproducibility header missing");
    let rows: Vec<&str> = body.lines().skip(2).collect();
    assert_eq!(rows, vec!["2,252", "3,252", "4,840", "5,252", "6,252"]);
}

#[test]
fn non_coprime_index_is_a_usage_error() {
    let out = permpoly(&["construct", "--family", "rank1", "--p", "7", "--m", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gcd"), "stderr: {}", stderr(&out));
}

#[test]
fn construct_invert_verify_round_trip() {
    let pp = permpoly(&[
        "construct",
        "--family",
        "rank2-kernel-aligned",
        "--p",
        "7",
        "--m",
        "3",
        "--delta-index",
        "4",
    ]);
    assert!(pp.status.success());
    let dir = std::env::temp_dir();
    let pp_path = dir.join("permpoly_cli_pp.json");
    std::fs::write(&pp_path, stdout(&pp)).unwrap();

    let cert = permpoly(&["invert", "--input", pp_path.to_str().unwrap()]);
    assert!(cert.status.success(), "{}", stderr(&cert));
    let body = stdout(&cert);
    assert!(body.contains("\"verified\":true"));
    let cert_path = dir.join("permpoly_cli_cert.json");
    std::fs::write(&cert_path, body).unwrap();

    let ver = permpoly(&[
        "verify",
        "--input",
        pp_path.to_str().unwrap(),
        "--against",
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(ver.status.code(), Some(0), "{}", stderr(&ver));
    assert!(stdout(&ver).contains("ok"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "construct",
        "--family",
        "rank1",
        "--p",
        "5",
        "--m",
        "3",
        "--all",
    ];
    let a = permpoly(&args);
    let b = permpoly(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    // q^2(q-1) = 100 NDJSON lines, each a self-contained document
    let body = stdout(&a);
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), 100);
    for l in &lines {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(v.get("field").is_some());
        assert_eq!(v["family"], "Rank1Coprime");
    }
}

#[test]
fn census_reports_families_and_caps_large_fields() {
    let out = permpoly(&[
        "census", "--p", "7", "--m", "4", "--rank", "2", "--out", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["count"], 840);
    assert_eq!(v["unexplained"], 0);
    assert_eq!(v["families"]["Rank2KernelAligned"], 252);
    assert_eq!(v["families"]["Rank2FromBasePP"], 588);

    let blocked = permpoly(&["census", "--p", "31", "--m", "2"]);
    assert_eq!(blocked.status.code(), Some(2));
    assert!(stderr(&blocked).contains("--cap"));
}

#[test]
fn eligible_counts_match_the_published_cell() {
    let out = permpoly(&["eligible", "--p", "7", "--m", "4", "--out", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["rank2_total"], 840);
    assert_eq!(v["rank1_total"], 0); // gcd(4, 6) != 1
}

#[test]
fn base_pps_facts() {
    let out = permpoly(&["base-pps", "--p", "7", "--out", "json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["count"], 120);
    assert_eq!(v["without_linear_term"], 15);

    let out = permpoly(&["base-pps", "--p", "7", "--m", "4", "--out", "json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let gammas: Vec<u64> = v["gammas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_array().unwrap()[0].as_u64().unwrap())
        .collect();
    assert_eq!(gammas, vec![3, 4]);
}

#[test]
fn list_delta_counts() {
    let out = permpoly(&["list-delta", "--p", "2", "--r", "2", "--out", "json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["deltas"].as_array().unwrap().len(), 5);
}

#[test]
fn field_info_respects_explicit_moduli() {
    let out = permpoly(&[
        "field-info",
        "--p",
        "7",
        "--ext-modulus",
        "3,6,1",
        "--out",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["field"]["ext_modulus"], serde_json::json!([3, 6, 1]));

    // x^2 + 3 has the root 2 in F_7
    let bad = permpoly(&["field-info", "--p", "7", "--ext-modulus", "3,0,1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("reducible"));
}

#[test]
fn verify_rejects_a_tampered_certificate() {
    let pp = permpoly(&[
        "construct",
        "--family",
        "rank1",
        "--p",
        "5",
        "--m",
        "3",
    ]);
    let dir = std::env::temp_dir();
    let pp_path = dir.join("permpoly_cli_tamper_pp.json");
    std::fs::write(&pp_path, stdout(&pp)).unwrap();
    let cert = permpoly(&["invert", "--input", pp_path.to_str().unwrap()]);
    // swap the certificate's linear coefficients to break composition
    let mut v: serde_json::Value = serde_json::from_str(stdout(&cert).trim()).unwrap();
    let a0 = v["L"]["a0"].clone();
    v["L"]["a0"] = v["L"]["a1"].clone();
    v["L"]["a1"] = a0;
    let cert_path = dir.join("permpoly_cli_tamper_cert.json");
    std::fs::write(&cert_path, serde_json::to_string(&v).unwrap()).unwrap();
    let ver = permpoly(&[
        "verify",
        "--input",
        pp_path.to_str().unwrap(),
        "--against",
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(ver.status.code(), Some(1));
    assert!(stderr(&ver).contains("composition breaks at"));
}

#[test]
fn sampled_construction_is_seed_deterministic() {
    let args = [
        "construct",
        "--family",
        "trace-spoly",
        "--p",
        "7",
        "--m",
        "4",
        "--g",
        "2=3",
        "--sample",
        "5",
        "--seed",
        "42",
    ];
    let a = permpoly(&args);
    let b = permpoly(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 5);
}
