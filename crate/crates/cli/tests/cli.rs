use std::io::Write;
use std::process::{Command, Output, Stdio};

use seriation_core::spectral::DEFAULT_TOLERANCE;
use seriation_core::*;
use tempfile::TempDir;

fn seriation(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_seriation"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    if let Some(bytes) = stdin {
        pipe.write_all(bytes).unwrap();
    }
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sample_then_seriate_matches_the_library() {
    let graph = stdout(&seriation(&["sample", "--graphon", "affine-distance:a=0.8,b=1", "--n", "150", "--seed", "5"], None));
    let line = stdout(&seriation(&["seriate"], Some(graph.as_bytes())));

    let g = sample_graph(&Graphon::affine_distance(0.8, 1.0).unwrap(), 150, 1.0, 5).unwrap();
    let mut text = Vec::new();
    g.write_edge_list(&mut text).unwrap();
    assert_eq!(graph.as_bytes(), text.as_slice());
    let expected = spectral_seriation(&g, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(Ordering::parse_line(line.trim()).unwrap(), expected);
}

#[test]
fn banded_edge_list_is_recovered() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("band.txt");
    let mut text = Vec::new();
    SampledGraph::banded(60, 4).write_edge_list(&mut text).unwrap();
    std::fs::write(&path, text).unwrap();
    let line = stdout(&seriation(&["seriate", "-i", path.to_str().unwrap()], None));
    let sigma = Ordering::parse_line(line.trim()).unwrap();
    let id = Ordering::identity(60);
    assert!(sigma == id || sigma == id.reverse());
}

#[test]
fn postprocessed_seriation_writes_a_permutation() {
    let graph = stdout(&seriation(&["sample", "--graphon", "rbf:s=0.3", "--n", "120", "--seed", "1"], None));
    let line = stdout(&seriation(&["seriate", "--algorithm", "postprocessed", "--seed", "3"], Some(graph.as_bytes())));
    assert_eq!(Ordering::parse_line(line.trim()).unwrap().len(), 120);
}

#[test]
fn step_graphon_fails_validation_with_exit_code_two() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("step.toml");
    std::fs::write(&config, "family = \"step\"\np = 0.7\nc = 0.5\n").unwrap();
    let csv = dir.path().join("report.csv");
    let out = seriation(
        &["validate", "--graphon-config", config.to_str().unwrap(), "--resolution", "200", "--csv", csv.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("assumption failure") && err.contains("derivative_nonzero"), "{err}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("all_ok = false"));
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 2);
}

#[test]
fn nice_graphon_validates() {
    let out = seriation(&["validate", "--graphon", "affine-distance:a=0.8,b=1", "--resolution", "200"], None);
    assert!(stdout(&out).contains("all_ok = true"));
}

#[test]
fn parse_errors_name_the_line() {
    let out = seriation(&["seriate"], Some(b"3 2 1 0\n1 2\n2 x\n"));
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error: parse") && err.contains("line 3"), "{err}");

    let out = seriation(&["sample", "--graphon", "spline:k=2", "--n", "10"], None);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown graphon family"));
}

#[test]
fn learn_params_prints_a_pair_or_none() {
    let dense = stdout(&seriation(&["sample", "--graphon", "affine-distance:a=1,b=1", "--n", "600", "--seed", "2"], None));
    let text = stdout(&seriation(&["learn-params"], Some(dense.as_bytes())));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() == 2 && lines[0].starts_with("alpha = ") && lines[1].starts_with("beta = "), "{text}");

    let flat = stdout(&seriation(&["sample", "--graphon", "constant:c=0.5", "--n", "300", "--seed", "2"], None));
    assert_eq!(stdout(&seriation(&["learn-params"], Some(flat.as_bytes()))).trim(), "none");
}

#[test]
fn experiment_requires_graphon_without_config() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("x.csv");
    let out = seriation(&["experiment", "--n-list", "50", "--output", out_path.to_str().unwrap()], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("graphon"));
}
