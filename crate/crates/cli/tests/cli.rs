use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mesh(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../meshes").join(name)
}

fn inversive(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inversive")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_json(dir: &Path, name: &str, key: &str, values: &[f64]) -> String {
    let path = dir.join(name);
    let body = format!("{{\"{key}\": {}}}", serde_json::to_string(values).unwrap());
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

#[test]
fn validate_reports_counts_and_exit_codes() {
    let o = inversive(&["validate", &p(&mesh("tetrahedron.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "V=4 E=6 F=4 chi=2 weights:pass");

    let o = inversive(&["validate", &p(&mesh("csaszar_torus.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("chi=0"));

    let o = inversive(&["validate", &p(&mesh("open_disk.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("boundary edge"));

    let o = inversive(&["validate", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_flags_negative_weights_under_the_strict_regime() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(mesh("tetrahedron.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    // One slightly negative edge; the product inequalities still hold.
    let edges = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
    let weights: Vec<_> = edges
        .iter()
        .map(|e| serde_json::json!({"edge": e, "value": if *e == [0, 1] { -0.2 } else { 1.0 }}))
        .collect();
    doc["weights"] = serde_json::Value::from(weights);
    doc.as_object_mut().unwrap().remove("regime");
    let path = dir.path().join("negative.json");
    fs::write(&path, doc.to_string()).unwrap();

    let strict = inversive(&["validate", &p(&path), "--regime", "nonnegative"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(stdout(&strict).contains("weights:fail"));
    let relaxed = inversive(&["validate", &p(&path), "--regime", "extended-note"]);
    assert_eq!(relaxed.status.code(), Some(0), "{}", stdout(&relaxed));
}

#[test]
fn curvature_table_parses_back() {
    let dir = TempDir::new().unwrap();
    let radii = write_json(dir.path(), "r.json", "radii", &[1.0; 4]);
    let out = dir.path().join("k.csv");
    let o = inversive(&["curvature", &p(&mesh("tetrahedron.json")), "--radii", &radii, "--out", &p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,r,K,R,R_alpha"));
    let mut rows = 0;
    for line in lines {
        if let Some(rest) = line.strip_prefix("# gauss_bonnet_residual,") {
            assert!(rest.parse::<f64>().unwrap().abs() <= 1e-10);
            continue;
        }
        let cols: Vec<f64> = line.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - std::f64::consts::PI).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 4);

    let torus = write_json(dir.path(), "t.json", "radii", &[1.0; 7]);
    let o = inversive(&["curvature", &p(&mesh("csaszar_torus.json")), "--radii", &torus]);
    for line in stdout(&o).lines().skip(1).filter(|l| !l.starts_with('#')) {
        let r: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(r.abs() < 1e-12);
    }
}

#[test]
fn flow_writes_artifacts_and_converges() {
    let dir = TempDir::new().unwrap();
    let radii = write_json(dir.path(), "r.json", "radii", &[1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95]);
    let out = dir.path().join("run");
    let o = inversive(&["flow", &p(&mesh("csaszar_torus.json")), "--radii", &radii, "--tmax", "200", "--out", &p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let events: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("events.json")).unwrap()).unwrap();
    assert_eq!(events.as_array().unwrap().last().unwrap()["kind"], "Converged");
    let final_radii: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("final_radii.json")).unwrap()).unwrap();
    let r: Vec<f64> = serde_json::from_value(final_radii["radii"].clone()).unwrap();
    assert!(r.iter().all(|x| (x / r[0] - 1.0).abs() < 1e-6));

    // every value in the trace survives a text round trip
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    for line in trace.lines().skip(1) {
        for cell in line.split(',') {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(format!("{v:.16e}").parse::<f64>().unwrap(), v);
        }
    }
}

#[test]
fn flow_exit_codes() {
    let dir = TempDir::new().unwrap();
    let torus = p(&mesh("csaszar_torus.json"));
    let start = write_json(dir.path(), "r.json", "radii", &[1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95]);
    let short = inversive(&["flow", &torus, "--radii", &start, "--tmax", "0.5", "--out", &p(&dir.path().join("a"))]);
    assert_eq!(short.status.code(), Some(4));

    // On the I = 2 torus a tiny radius breaks six faces.
    let text = fs::read_to_string(&torus).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["weights"] = serde_json::json!({"uniform": 2.0});
    let heavy = dir.path().join("heavy.json");
    fs::write(&heavy, doc.to_string()).unwrap();
    let deflated = write_json(dir.path(), "d.json", "radii", &[0.05, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);

    let genuine = inversive(&["flow", &p(&heavy), "--radii", &deflated, "--out", &p(&dir.path().join("b"))]);
    assert_eq!(genuine.status.code(), Some(2));

    let out = dir.path().join("c");
    let extended = inversive(&[
        "flow", &p(&heavy), "--radii", &deflated, "--kind", "extended-euclidean", "--tmax", "200", "--out", &p(&out),
    ]);
    assert_eq!(extended.status.code(), Some(0));
    let events: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(out.join("events.json")).unwrap()).unwrap();
    let kinds: Vec<&str> = events.iter().map(|e| e["kind"].as_str().unwrap()).collect();
    let back = kinds.iter().position(|k| *k == "ReenteredAdmissible").unwrap();
    let done = kinds.iter().position(|k| *k == "Converged").unwrap();
    assert!(back < done);

    let target = write_json(dir.path(), "target.json", "target", &[-3.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5]);
    let ones = write_json(dir.path(), "ones.json", "radii", &[1.0; 7]);
    let singular = inversive(&[
        "flow", &p(&heavy), "--radii", &ones, "--kind", "modified-euclidean", "--target", &target, "--out",
        &p(&dir.path().join("e")),
    ]);
    assert_eq!(singular.status.code(), Some(3), "{}", stdout(&singular));
}

#[test]
fn sweep_matches_single_runs() {
    let dir = TempDir::new().unwrap();
    let torus = p(&mesh("csaszar_torus.json"));
    let a = write_json(dir.path(), "a.json", "radii", &[1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95]);
    let b = write_json(dir.path(), "b.json", "radii", &[0.9, 1.1, 1.0, 1.2, 0.8, 1.0, 1.05]);
    let sweep = dir.path().join("sweep");
    let o = inversive(&["flow", &torus, "--radii", &a, "--radii", &b, "--jobs", "2", "--tmax", "200", "--out", &p(&sweep)]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert!(lines[0].starts_with(&a) && lines[1].starts_with(&b));

    let single = dir.path().join("single");
    inversive(&["flow", &torus, "--radii", &b, "--tmax", "200", "--out", &p(&single)]);
    assert_eq!(
        fs::read_to_string(sweep.join("run-1/final_radii.json")).unwrap(),
        fs::read_to_string(single.join("final_radii.json")).unwrap()
    );
}

#[test]
fn solve_and_spectrum() {
    let dir = TempDir::new().unwrap();
    let torus = p(&mesh("csaszar_torus.json"));
    let start = write_json(dir.path(), "r.json", "radii", &[1.3, 0.8, 1.1, 1.0, 0.9, 1.2, 0.95]);
    let zero = write_json(dir.path(), "z.json", "target", &[0.0; 7]);
    let out = dir.path().join("solved.json");
    let o = inversive(&["solve", &torus, "--radii", &start, "--target", &zero, "--out", &p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    let r: Vec<f64> = serde_json::from_value(v["radii"].clone()).unwrap();
    assert!(r.iter().all(|x| (x / r[0] - 1.0).abs() < 1e-9));

    let o = inversive(&["spectrum", &torus, "--radii", &start]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let eig: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(eig.len(), 7);
    assert!(eig[0].abs() < 1e-9 && eig[1] > 1e-3);

    let hyper = inversive(&["spectrum", &torus, "--radii", &start, "--geometry", "hyperbolic"]);
    assert_eq!(hyper.status.code(), Some(2));
}

#[test]
fn example_tetra_writes_curve() {
    let dir = TempDir::new().unwrap();
    let o = inversive(&["example-tetra", "--out", &p(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("x0 = 3.81338512359"));
    let csv = fs::read_to_string(dir.path().join("f_curve.csv")).unwrap();
    assert!(csv.starts_with("x,f_x\n"));
    assert_eq!(csv.lines().count(), 752);
}
