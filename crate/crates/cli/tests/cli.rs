use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use sublevel_cli::files::{ComplexFile, DiagramFile, PointEntry, SimplexEntry};

fn sublevel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sublevel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(path: &Path, text: &str) -> String {
    std::fs::write(path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn build(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap().to_string();
    let mut args = vec!["build", "--out", out.as_str()];
    args.extend_from_slice(extra);
    sublevel(&args)
}

#[test]
fn two_landmarks_give_an_edge() {
    let tmp = tempfile::tempdir().unwrap();
    let lm = write(&tmp.path().join("two.csv"), "x,y\n0,0\n1,0\n");
    let out = tmp.path().join("run");
    let o = build(&out, &["--model", "annulus", "--landmarks", &lm]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c: ComplexFile = serde_json::from_str(&std::fs::read_to_string(out.join("complex.json")).unwrap()).unwrap();
    assert_eq!(c.simplices.len(), 3);
    assert_eq!(c.simplices[2].vertices, vec![0, 1]);
    for f in ["diagram.json", "diagram.csv", "diagram_0.svg", "diagram_1.svg", "run_meta.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let csv = std::fs::read_to_string(out.join("diagram.csv")).unwrap();
    assert!(csv.starts_with("dim,birth,death\n") && csv.contains(",inf\n"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = build(dir, &["--model", "ising_interval", "--sites", "3", "--landmarks", "ising-lowest:6", "--seed", "5"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["complex.json", "diagram.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn figure1_build_and_betti_query() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig");
    let o = build(&out, &["--model", "figure1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d: DiagramFile = serde_json::from_str(&std::fs::read_to_string(out.join("diagram.json")).unwrap()).unwrap();
    assert_eq!(d.points.iter().filter(|p| p.dim == 1).count(), 1);
    let diag = out.join("diagram.json");
    let diag = diag.to_str().unwrap();
    let q = sublevel(&["betti", "--diagram", diag, "--k", "0", "--a", "0", "--b", "0"]);
    assert!(q.status.success());
    assert_eq!(stdout(&q).trim(), "1");
    let absent = sublevel(&["betti", "--diagram", diag, "--k", "5", "--a", "-1", "--b", "0"]);
    assert_eq!(stdout(&absent).trim(), "0");
}

#[test]
fn betti_reads_csv_and_rejects_reversed_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write(&tmp.path().join("d.csv"), "dim,birth,death\n0,0,inf\n0,1,3\n1,2,5\n");
    let q = |a: &str, b: &str| sublevel(&["betti", "--diagram", &path, "--k", "0", "--a", a, "--b", b]);
    assert_eq!(stdout(&q("1", "2")).trim(), "2");
    assert_eq!(stdout(&q("1", "3")).trim(), "1");
    let bad = q("2", "1");
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn invalid_inputs_exit_nonzero_with_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    let lm = write(&tmp.path().join("dup.csv"), "0,0\n0,0\n1,1\n");
    let o = build(&tmp.path().join("out"), &["--model", "annulus", "--landmarks", &lm]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate"));
    let missing = sublevel(&["betti", "--diagram", "/nonexistent.json", "--k", "0", "--a", "0", "--b", "1"]);
    assert!(!missing.status.success());
}

#[test]
fn delaunay_check_passes_on_a_generic_set() {
    let tmp = tempfile::tempdir().unwrap();
    let lm = write(
        &tmp.path().join("pts.csv"),
        "0.1,0.2\n0.9,0.1\n0.5,0.8\n0.3,0.55\n0.75,0.6\n0.05,0.95\n",
    );
    let o = sublevel(&["delaunay-check", "--landmarks", &lm]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS"));
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #[test]
    fn files_round_trip_through_json(
        simplices in prop::collection::vec(
            (prop::collection::vec(0usize..50, 1..4), finite(), any::<bool>()), 0..20),
        points in prop::collection::vec((0usize..4, finite(), prop::option::of(finite())), 0..20),
    ) {
        let complex = ComplexFile {
            dim: 2,
            landmarks: vec![vec![0.5, -1.25]],
            simplices: simplices
                .into_iter()
                .map(|(vertices, value, flagged_unbounded)| SimplexEntry { vertices, value, flagged_unbounded })
                .collect(),
        };
        let text = serde_json::to_string(&complex).unwrap();
        prop_assert_eq!(serde_json::from_str::<ComplexFile>(&text).unwrap(), complex);

        let diagram = DiagramFile {
            points: points
                .into_iter()
                .map(|(dim, birth, death)| PointEntry { dim, birth, death: death.unwrap_or(f64::INFINITY) })
                .collect(),
        };
        let text = serde_json::to_string(&diagram).unwrap();
        prop_assert_eq!(&serde_json::from_str::<DiagramFile>(&text).unwrap(), &diagram);
        prop_assert_eq!(DiagramFile::parse_csv(&diagram.to_csv()).unwrap(), diagram);
    }
}
