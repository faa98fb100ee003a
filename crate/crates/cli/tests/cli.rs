use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pcstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcstar")).args(args).output().unwrap()
}

fn build(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(format!("{}.json", name.replace(':', "_")));
    let path_s = path.to_str().unwrap().to_string();
    let mut args = vec!["build", name];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", &path_s]);
    let out = pcstar(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path_s
}

fn json_file(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn audit(path: &str) -> Value {
    let out = pcstar(&["audit", "--no-timestamp", path]);
    assert_eq!(out.status.code(), Some(0));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn build_examples() {
    let dir = tempfile::tempdir().unwrap();
    let wda = json_file(&build(dir.path(), "weighted_diagonal", &["--k", "3", "--depth", "5"]));
    assert_eq!(wda["algebra"]["sectors"].as_array().unwrap().len(), 3);
    assert_eq!(wda["tower"]["levels"], 5);

    let m2 = json_file(&build(dir.path(), "compact_operator", &["--d", "2"]));
    assert_eq!(m2["algebra"]["sectors"][0]["dim"], 4);

    let cq = json_file(&build(dir.path(), "cq_spectral", &["--blocks", "1,1,2", "--lambdas", "1,2,4"]));
    assert_eq!(cq["meta"]["c_s_dim"], 6);
}

#[test]
fn invalid_params_exit_2() {
    let out = pcstar(&["build", "cq_spectral", "--blocks", "1,2", "--lambdas", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pcstar(&["build", "no_such_builder"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unparsable_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = pcstar(&["audit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_audit_still_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let report = audit(&build(dir.path(), "fixture:scaled_norm", &[]));
    assert_eq!(report["flags"]["cstar_axioms"], false);
    assert!(report["flags"]["representable"].is_null());
    let skipped = report["skipped"][0]["reason"].as_str().unwrap();
    assert!(skipped.starts_with("skipped: precondition failed"));
}

#[test]
fn wda_audit_passes_primary_flags() {
    let dir = tempfile::tempdir().unwrap();
    let report = audit(&build(dir.path(), "weighted_diagonal", &["--k", "3"]));
    for flag in [
        "property_A",
        "property_B",
        "semi_associative",
        "cstar_axioms",
        "semifinite",
        "weakly_semifinite",
        "representable",
        "well_behaved",
        "strongly_nondegenerate",
        "extension_containment",
    ] {
        assert_eq!(report["flags"][flag], true, "{flag}");
    }
    assert_eq!(report["flags"]["finite"], false);
    for (name, r) in report["residuals"].as_object().unwrap() {
        assert!(r.as_f64().unwrap() <= 1e-9, "{name}");
    }
    assert_eq!(report["dimensions"]["np"], 3);
}

#[test]
fn zero_seminorm_dimensions_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let report = audit(&build(dir.path(), "fixture:zero_seminorm", &[]));
    for key in ["domain", "np", "quotient", "hilbert_Pi", "domain_pi", "hilbert_pi", "commutant"] {
        assert_eq!(report["dimensions"][key], 0, "{key}");
    }
    assert_eq!(report["flags"]["cstar_axioms"], true);
}

#[test]
fn reverse_requires_tower() {
    let dir = tempfile::tempdir().unwrap();
    let single = build(dir.path(), "weighted_diagonal", &["--k", "2"]);
    let out = pcstar(&["reverse", &single]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tower required"));
}

#[test]
fn reverse_on_wda_tower() {
    let dir = tempfile::tempdir().unwrap();
    let tower = build(dir.path(), "weighted_diagonal", &["--k", "3", "--depth", "5"]);
    let out = pcstar(&["reverse", "--no-timestamp", &tower]);
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rev = &r["reverse"];
    assert_eq!(rev["heuristic"], true);
    let u = rev["boundedness"].as_array().unwrap().iter().find(|b| b["sector"] == "U").unwrap();
    assert_eq!(u["bounded"], false);
    assert_eq!(rev["rl_domain"], serde_json::json!(["F", "B"]));
    assert_eq!(r["flags"]["natural_rep_agreement"], true);
    assert!(r["residuals"]["natural_rep_agreement_only"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn parallel_audit_writes_one_report_per_file() {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        build(dir.path(), "weighted_diagonal", &["--k", "2"]),
        build(dir.path(), "compact_operator", &["--d", "3"]),
        build(dir.path(), "fixture:np_trivial", &[]),
    ];
    let out_dir = dir.path().join("reports");
    let mut args = vec!["audit", "--jobs", "3", "--no-timestamp", "--out", out_dir.to_str().unwrap()];
    args.extend(files.iter().map(String::as_str));
    assert!(pcstar(&args).status.success());
    let single = audit(&files[1]);
    let parallel: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("compact_operator.audit.json")).unwrap()).unwrap();
    assert_eq!(single, parallel);
    assert_eq!(std::fs::read_dir(&out_dir).unwrap().count(), 3);
}

#[test]
fn timestamp_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let f = build(dir.path(), "compact_operator", &["--d", "2"]);
    let with: Value = serde_json::from_slice(&pcstar(&["audit", &f]).stdout).unwrap();
    assert!(with["timestamp"].is_string());
    assert!(audit(&f).get("timestamp").is_none());
}

#[test]
fn list_instances_names_builders_and_fixtures() {
    let out = String::from_utf8(pcstar(&["list-instances"]).stdout).unwrap();
    assert!(out.lines().any(|l| l == "hermite_number"));
    assert!(out.lines().any(|l| l == "fixture:inconsistent_span"));
}
