use std::fs;

struct Output {
    status: u8,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

fn zipper(args: &[&str]) -> Output {
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let status = super::run(
        std::iter::once("zipper").chain(args.iter().copied()),
        &mut stdout,
        &mut stderr,
    );
    Output {
        status,
        stdout,
        stderr,
    }
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn validate_accepts_presets() {
    let out = zipper(&["validate", "--example2", "h=0.5"]);
    assert_eq!(out.status, 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("valid: 2 maps in dimension 2"));
}

#[test]
fn eval_g_reports_value_and_bound() {
    let out = zipper(&[
        "eval-g",
        "--example1",
        "p=0.3",
        "--t",
        "0.25",
        "--tol",
        "1e-12",
    ]);
    let v = json(&out);
    assert!((v["value"][0].as_f64().unwrap() - 0.00675).abs() < 1e-12);
    assert!(v["errorBound"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn eval_g_undoes_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shifted.json");
    // The split family moved up by 2: f ↦ f + 2, so g ↦ g + 2t.
    fs::write(
        &path,
        r#"{"dimension": 1,
            "maps": [{"linear": [[0.3]], "translation": [1.4]}, {"linear": [[0.7]], "translation": [0.9]}],
            "vertices": [[2], [2.3], [3]], "signature": [0, 0]}"#,
    )
    .unwrap();
    let out = zipper(&["eval-g", path.to_str().unwrap(), "--t", "0.5"]);
    let g = json(&out)["value"][0].as_f64().unwrap();
    assert!((g - (0.045 + 1.0)).abs() < 1e-12, "{g}");
}

#[test]
fn lift_output_validates() {
    let dir = tempfile::tempdir().unwrap();
    let lifted = dir.path().join("w.json");
    for preset in [["--example1", "p=0.3"], ["--example2", "h=0.8"]] {
        let out = zipper(&[
            "lift",
            preset[0],
            preset[1],
            "--out",
            lifted.to_str().unwrap(),
        ]);
        assert_eq!(out.status, 0, "{}", String::from_utf8_lossy(&out.stderr));
        let check = zipper(&["validate", lifted.to_str().unwrap()]);
        assert_eq!(
            check.status,
            0,
            "{}",
            String::from_utf8_lossy(&check.stderr)
        );
    }
}

#[test]
fn render_writes_svg_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("a.svg");
    let csv = dir.path().join("a.csv");
    let out = zipper(&[
        "render",
        "--example1",
        "p=0.3",
        "--depth",
        "3",
        "--svg",
        svg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status, 0);
    let csv = fs::read_to_string(csv).unwrap();
    assert!(csv.starts_with("t,x1,x2\n0,0,0\n"));
    assert_eq!(csv.lines().count(), 1 + 17);
    assert_eq!(
        fs::read_to_string(svg)
            .unwrap()
            .matches("<polyline")
            .count(),
        1
    );
}

#[test]
fn render_rejects_bad_projection() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("a.svg");
    let out = zipper(&[
        "render",
        "--example2",
        "h=0.5",
        "--projection",
        "0,5",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status, 2);
}

#[test]
fn verify_exit_status_tracks_results() {
    let ok = zipper(&["verify", "--example2", "h=0.3", "--suite", "feq"]);
    assert_eq!(ok.status, 0);
    let reports = json(&ok);
    assert_eq!(reports.as_array().unwrap().len(), 2);
    assert!(reports[0]["passed"].as_bool().unwrap());

    // Rough tangents fail the doubling criterion.
    let bad = zipper(&["verify", "--example2", "h=0.8", "--suite", "tangent"]);
    assert_eq!(bad.status, 1);
}

#[test]
fn inverse_design_reconstructs_config() {
    let out = zipper(&[
        "inverse-design",
        "--q1",
        "0.5",
        "--x1",
        "0.5",
        "--g1",
        "0.045",
        "--g2",
        "0.3",
    ]);
    let v = json(&out);
    assert!((v["y1"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert!((v["y2"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(
        v["config"]["vertices"][1][0].as_f64().unwrap(),
        v["y1"].as_f64().unwrap()
    );
}

#[test]
fn example_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.json");
    let out = zipper(&["example", "--example1", "q1=0.4,y1=0.3,y2=1"]);
    fs::write(&path, &out.stdout).unwrap();
    assert_eq!(zipper(&["validate", path.to_str().unwrap()]).status, 0);
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"dimension": 1, "colour": "red"}"#).unwrap();
    let out = zipper(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    assert_eq!(zipper(&["validate", "--example1", "p=1.5"]).status, 2);
    assert_eq!(zipper(&["validate", "--example1", "r=0.5"]).status, 2);
    assert_eq!(zipper(&["eval-f"]).status, 2);
}

#[test]
fn broken_zipper_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(
        &path,
        r#"{"dimension": 1,
            "maps": [{"linear": [[0.5]], "translation": [0]}, {"linear": [[0.5]], "translation": [0.6]}],
            "vertices": [[0], [0.5], [1]], "signature": [0, 0]}"#,
    )
    .unwrap();
    let out = zipper(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("S_2(z_0)"));
}
