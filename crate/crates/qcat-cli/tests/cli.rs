use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcat")).args(args).env_remove("QCAT_TOL").output().expect("run qcat")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fx(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qcat-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn validate_ising() {
    let out = qcat(&["validate", &fx("ising.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(v["pentagon_max"].as_f64().unwrap() < 1e-9);
}

#[test]
fn validate_as_table() {
    let out = qcat(&["validate", &fx("ising.json"), "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("validate"));
    assert!(text.contains("pentagon_max"));
}

#[test]
fn check_qsystem_passes() {
    let out = qcat(&["check-qsystem", &fx("ising.json"), &fx("ising_q.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for k in ["pass_unit", "pass_associativity", "pass_frobenius", "pass_special", "pass_standard"] {
        assert_eq!(v[k], Value::Bool(true), "{k}");
    }
}

#[test]
fn boundary_of_trivial_qsystems() {
    let out = qcat(&["boundary", &fx("ising.json"), "--A", "trivial", "--B", "trivial"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["bimodules"].as_array().unwrap().len(), 3);
    assert_eq!(v["idempotents"].as_array().unwrap().len(), 3);
    assert_eq!(v["cross_check"], "pass");
    assert_eq!(v["smT"]["rows"], 3);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["boundary", &fx("ising.json"), "--A", &fx("ising_q.json"), "--B", "trivial"];
    let a = qcat(&args);
    let b = qcat(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reports_from_two_seeds_agree() {
    let dir = scratch("seeds");
    let q = fx("ising_q.json");
    let a = qcat(&["boundary", &fx("ising.json"), "--A", &q, "--B", &q, "--seed", "1"]);
    let b = qcat(&["boundary", &fx("ising.json"), "--A", &q, "--B", &q, "--seed", "99"]);
    std::fs::write(dir.join("a.json"), &a.stdout).unwrap();
    std::fs::write(dir.join("b.json"), &b.stdout).unwrap();
    let d = qcat(&["diff", dir.join("a.json").to_str().unwrap(), dir.join("b.json").to_str().unwrap()]);
    assert_eq!(d.status.code(), Some(0), "{}", String::from_utf8_lossy(&d.stdout));
}

#[test]
fn diff_detects_corruption_and_schema_changes() {
    let dir = scratch("diff");
    let out = qcat(&["modular", &fx("ising.json")]);
    let mut v = json(&out);
    let a = dir.join("a.json");
    std::fs::write(&a, &out.stdout).unwrap();
    assert_eq!(qcat(&["diff", a.to_str().unwrap(), a.to_str().unwrap()]).status.code(), Some(0));
    v["global_dim"] = Value::from(5.0);
    let b = dir.join("b.json");
    std::fs::write(&b, serde_json::to_string(&v).unwrap()).unwrap();
    let d = qcat(&["diff", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(d.status.code(), Some(3));
    assert_eq!(json(&d)["differences"].as_array().unwrap().len(), 1);
    v.as_object_mut().unwrap().remove("dims");
    std::fs::write(&b, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(qcat(&["diff", a.to_str().unwrap(), b.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn emit_fixture_round_trips() {
    let dir = scratch("emit");
    for name in ["ising", "z2", "trivial"] {
        let out = qcat(&["emit-fixture", name, "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let cat = dir.join(format!("{name}.json"));
        let q = dir.join(format!("{name}_q.json"));
        assert_eq!(qcat(&["validate", cat.to_str().unwrap()]).status.code(), Some(0));
        assert_eq!(qcat(&["check-qsystem", cat.to_str().unwrap(), q.to_str().unwrap()]).status.code(), Some(0));
    }
    let emitted = std::fs::read(dir.join("ising.json")).unwrap();
    assert_eq!(emitted, std::fs::read(fixtures().join("ising.json")).unwrap());
    assert_eq!(qcat(&["emit-fixture", "potts"]).status.code(), Some(1));
}

#[test]
fn z2_is_not_modular() {
    let v = json(&qcat(&["modular", &fx("z2.json")]));
    assert_eq!(v["is_modular"], Value::Bool(false));
    assert_eq!(qcat(&["boundary", &fx("z2.json")]).status.code(), Some(4));
}

#[test]
fn exit_codes() {
    assert_eq!(qcat(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qcat(&["validate"]).status.code(), Some(1));
    assert_eq!(qcat(&["--help"]).status.code(), Some(0));
    let dir = scratch("codes");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{").unwrap();
    assert_eq!(qcat(&["validate", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(qcat(&["validate", dir.join("missing.json").to_str().unwrap()]).status.code(), Some(2));

    let mut q: Value = serde_json::from_slice(&std::fs::read(fixtures().join("ising_q.json")).unwrap()).unwrap();
    for x in q["w"]["blocks"][0]["re"].as_array_mut().unwrap() {
        *x = Value::from(x.as_f64().unwrap() * 1.5);
    }
    let broken = dir.join("broken_q.json");
    std::fs::write(&broken, serde_json::to_string(&q).unwrap()).unwrap();
    let out = qcat(&["check-qsystem", &fx("ising.json"), broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["pass"], Value::Bool(false));
}

#[test]
fn tolerance_flag_and_environment() {
    let v = json(&qcat(&["validate", &fx("ising.json"), "--tol", "1e-6"]));
    assert_eq!(v["tol"].as_f64(), Some(1e-6));
    let out = Command::new(env!("CARGO_BIN_EXE_qcat"))
        .args(["validate", &fx("ising.json")])
        .env("QCAT_TOL", "1e-7")
        .output()
        .unwrap();
    assert_eq!(json(&out)["tol"].as_f64(), Some(1e-7));
}

#[test]
fn analysis_verbs() {
    let (c, q) = (fx("ising.json"), fx("ising_q.json"));
    let z = json(&qcat(&["zmatrix", &c, &q]));
    assert_eq!(z["z"], serde_json::json!([[1, 0, 0], [0, 1, 0], [0, 0, 1]]));
    let m = json(&qcat(&["modules", &c, &q]));
    assert_eq!(m["count"], 3);
    let b = json(&qcat(&["bimodules", &c, &q, &q]));
    assert_eq!(b["count"], 3);
    assert_eq!(b["centre_hom_dim"], 3);
    let f = qcat(&["full-centre", &c, &q]);
    assert_eq!(f.status.code(), Some(0));
    assert!((json(&f)["d_z"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let k = json(&qcat(&["canonical", &c]));
    assert_eq!(k["d_r"].as_f64(), Some(2.0));
    let cen = json(&qcat(&["centre", &c, &q, "--sign", "-"]));
    assert_eq!(cen["centre"]["d"].as_f64(), Some(1.0));
    let d = json(&qcat(&["decompose", &c, &q, "--kind", "irreducible"]));
    assert_eq!(d["summands"].as_array().unwrap().len(), 1);
    let p = json(&qcat(&["braided-product", &c, &q, "trivial"]));
    assert_eq!(p["pass"], Value::Bool(true));
}

#[test]
fn intermediate_with_the_identity_projection() {
    let dir = scratch("intermediate");
    let (c, q) = (fx("ising.json"), fx("ising_q.json"));
    let qf: Value = serde_json::from_slice(&std::fs::read(fixtures().join("ising_q.json")).unwrap()).unwrap();
    let theta = qf["theta"].clone();
    let p = serde_json::json!({
        "dom": theta, "cod": theta,
        "blocks": [
            {"sector": "1", "rows": 1, "cols": 1, "re": [1.0], "im": [0.0]},
            {"sector": "tau", "rows": 1, "cols": 1, "re": [1.0], "im": [0.0]}
        ]
    });
    let path = dir.join("p.json");
    std::fs::write(&path, serde_json::to_string(&p).unwrap()).unwrap();
    let out = qcat(&["intermediate", &c, &q, path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let p = serde_json::json!({
        "dom": theta, "cod": theta,
        "blocks": [{"sector": "tau", "rows": 1, "cols": 1, "re": [1.0], "im": [0.0]}]
    });
    std::fs::write(&path, serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(qcat(&["intermediate", &c, &q, path.to_str().unwrap()]).status.code(), Some(3));
}
