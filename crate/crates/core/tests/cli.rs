use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use hsos::cli::PolyFile;
use hsos::qmaxcut::GapReport;
use hsos::quantize::BoundReport;

fn hsos(args: &[&str]) -> (Value, i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hsos")).args(args).output().unwrap();
    let code = out.status.code().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (json, code, stderr)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn close(v: &Value, expected: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() <= tol
}

#[test]
fn dims_command() {
    let (j, code, _) = hsos(&["dims", "--d", "2", "--n", "4", "--r", "1"]);
    assert_eq!(code, 0);
    assert_eq!(j["sym_dim"], 5);
    assert_eq!(j["exp_dim"], 8);
    let (j, _, _) = hsos(&["dims", "--d", "1", "--n", "3"]);
    assert_eq!(j, serde_json::json!({ "sym_dim": 1 }));
    let (j, _, _) = hsos(&["dims", "--d", "2", "--n", "10", "--k", "1"]);
    assert!(close(&j["definetti_bound"], 0.4, 1e-15));
    let (_, code, _) = hsos(&["dims", "--d", "2", "--n", "3", "--k", "5"]);
    assert_eq!(code, 2);
}

#[test]
fn bound_command() {
    let dir = tempfile::tempdir().unwrap();
    let abs = write(dir.path(), "abs.json", r#"{"d":2,"k":1,"terms":[{"alpha":[1,0],"beta":[1,0],"re":1.0,"im":0.0}]}"#);
    let (j, code, _) = hsos(&["bound", "--poly", s(&abs), "--n", "2"]);
    assert_eq!(code, 0);
    assert!(close(&j["lower"], 0.75, 1e-12) && close(&j["upper"], 1.0, 1e-12));
    let report: BoundReport = serde_json::from_value(j).unwrap();
    assert!(report.is_consistent());

    let konst = write(dir.path(), "const.json", r#"{"d":3,"k":0,"terms":[{"alpha":[0,0,0],"beta":[0,0,0],"re":2.0,"im":0.0}]}"#);
    let (j, code, _) = hsos(&["bound", "--poly", s(&konst), "--n", "3"]);
    assert_eq!(code, 0);
    assert!(close(&j["lower"], 2.0, 1e-12) && close(&j["upper"], 2.0, 1e-12));

    let (j, code, _) = hsos(&["bound", "--poly", s(&abs), "--n", "5", "--round", "--seed", "9"]);
    assert_eq!(code, 0);
    assert!(j["rounded_value"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert!(j["rounded_point"].is_object());
}

#[test]
fn bound_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"d":2,"k":1,"terms":[{"alpha":[1,0],"beta":[0,1],"re":1.0,"im":0.0}]}"#);
    let (_, code, err) = hsos(&["bound", "--poly", s(&bad), "--n", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("alpha=[1, 0]") && err.contains("beta=[0, 1]"), "{err}");
    let garbage = write(dir.path(), "garbage.json", "{not json");
    assert_eq!(hsos(&["bound", "--poly", s(&garbage), "--n", "2"]).1, 2);
    let quartic = write(dir.path(), "q.json", r#"{"d":2,"k":2,"terms":[{"alpha":[2,0],"beta":[2,0],"re":1.0,"im":0.0}]}"#);
    assert_eq!(hsos(&["bound", "--poly", s(&quartic), "--n", "1"]).1, 2);
    assert_eq!(hsos(&["bound", "--poly", "/nonexistent/p.json", "--n", "2"]).1, 2);
}

#[test]
fn bound_reports_capacity_as_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let abs = write(dir.path(), "abs.json", r#"{"d":3,"k":1,"terms":[{"alpha":[1,0,0],"beta":[1,0,0],"re":1.0,"im":0.0}]}"#);
    let (_, code, _) = hsos(&["bound", "--poly", s(&abs), "--n", "4", "--dense-threshold", "5"]);
    assert_eq!(code, 3);
}

#[test]
fn definetti_command() {
    let (j, code, _) = hsos(&["definetti", "--d", "2", "--n", "8", "--k", "1", "--trials", "100"]);
    assert_eq!(code, 0);
    assert_eq!(j["passes"], 100);
    assert_eq!(j["failures"], 0);
    assert!(close(&j["special"]["maximally_mixed"], 0.0, 1e-12));
    let (j, _, _) = hsos(&["definetti", "--d", "2", "--n", "2", "--k", "1", "--trials", "1"]);
    assert!(close(&j["special"]["coherent"], 0.25, 1e-10));
    let (j, code, _) = hsos(&["definetti", "--d", "2", "--n", "3", "--k", "1", "--m", "2", "--trials", "4"]);
    assert_eq!(code, 0);
    assert_eq!(j["variant"], "multi-sym");
    assert_eq!(hsos(&["definetti", "--d", "2", "--n", "3", "--k", "1", "--m", "2", "--variant", "standard"]).1, 2);
}

#[test]
fn qmaxcut_command() {
    let dir = tempfile::tempdir().unwrap();
    let edge = write(dir.path(), "edge.txt", "0 1 1.0\n");
    let (j, code, _) = hsos(&["qmaxcut", "--graph", s(&edge), "--k", "1,2,3,4"]);
    assert_eq!(code, 0);
    let reports: Vec<GapReport> = serde_json::from_value(j["reports"].clone()).unwrap();
    let quantum: Vec<f64> = reports.iter().map(|r| r.quantum).collect();
    for (q, e) in quantum.iter().zip([4.0, 3.0, 8.0 / 3.0, 2.5]) {
        assert!((q - e).abs() < 1e-9, "{quantum:?}");
    }

    let empty = write(dir.path(), "empty.txt", "# no edges\n");
    let (j, code, _) = hsos(&["qmaxcut", "--graph", s(&empty), "--k", "1,2"]);
    assert_eq!(code, 0);
    for r in j["reports"].as_array().unwrap() {
        assert_eq!(r["quantum"], 0.0);
        assert_eq!(r["classical"], 0.0);
        assert_eq!(r["sdp1"], 0.0);
    }

    let tri = write(dir.path(), "tri.txt", "0 1 1\n1 2 1\n2 0 1\n");
    let (j, code, _) = hsos(&["qmaxcut", "--graph", s(&tri), "--k", "1"]);
    assert_eq!(code, 0);
    let r = &j["reports"][0];
    assert!(close(&r["quantum"], 6.0, 1e-9) && close(&r["classical"], 4.5, 1e-4) && close(&r["sdp1"], 4.5, 1e-4));

    let bad = write(dir.path(), "bad.txt", "0 0 1\n");
    assert_eq!(hsos(&["qmaxcut", "--graph", s(&bad)]).1, 2);
}

#[test]
fn out_flag_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dims.json");
    let stdout = Command::new(env!("CARGO_BIN_EXE_hsos")).args(["dims", "--d", "3", "--n", "5", "--k", "1"]).output().unwrap().stdout;
    let status = Command::new(env!("CARGO_BIN_EXE_hsos"))
        .args(["dims", "--d", "3", "--n", "5", "--k", "1", "--out", s(&path)])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}

#[test]
fn poly_file_round_trips_through_library() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let f = hsos::quantize::HermitianPoly::random(3, 2, &mut rng).unwrap();
    let text = serde_json::to_string(&PolyFile::from_poly(&f)).unwrap();
    assert_eq!(PolyFile::parse(&text).unwrap().to_poly().unwrap(), f);
}
