use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gradmap::sampling;
use gradmap::ModelSpace;
use gradmap_cli::{load_measure, write_measure, SCHEMA_VERSION};
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn gradmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradmap")).args(args).env_remove("GRADMAP_OUT_DIR").output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn as_f64(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn measure_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = sampling::seeded_rng(11);
    for (i, model) in [ModelSpace::real(2).unwrap(), ModelSpace::complex(3).unwrap()].iter().enumerate() {
        let nu = sampling::random_measure(model, 7, &mut rng);
        let path = dir.path().join(format!("m{i}.json"));
        write_measure(&path, &nu).unwrap();
        let back = load_measure(&path).unwrap();
        assert_eq!(back.model(), nu.model());
        let bits = |w: &[f64]| w.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.weights()), bits(nu.weights()));
        for (a, b) in back.atoms().iter().zip(nu.atoms()) {
            assert_eq!(a.rep(), b.rep());
        }
    }
}

#[test]
fn bundled_measures_load() {
    for name in ["vertex_rp2.json", "three_atoms_rp2.json", "segment_rp1.json", "heavy_cp1.json", "line_in_rp2.json"] {
        load_measure(&data(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn compute_vertex_uniform_reports_zero() {
    let out = gradmap(&["compute", data("vertex_rp2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_stdout(&out);
    assert_eq!(report["schema"], SCHEMA_VERSION);
    assert_eq!(report["command"], "compute");
    for row in report["outputs"]["gradient"].as_array().unwrap() {
        for entry in row.as_array().unwrap() {
            assert!(as_f64(entry).abs() < 1e-12);
        }
    }
}

#[test]
fn balance_converges_with_exit_zero() {
    let out = gradmap(&["balance", data("three_atoms_rp2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_stdout(&out);
    assert_eq!(report["status"], "Converged");
    assert!(as_f64(&report["residual"]) < 1e-8);
}

#[test]
fn failures_exit_with_one() {
    let unreachable = gradmap(&["balance", "--torus", data("segment_rp1.json").to_str().unwrap()]);
    assert_eq!(unreachable.status.code(), Some(1));
    assert_eq!(json_stdout(&unreachable)["status"], "TargetUnreachable");

    let heavy = gradmap(&["balance", data("heavy_cp1.json").to_str().unwrap()]);
    assert_eq!(heavy.status.code(), Some(1));
    assert_eq!(json_stdout(&heavy)["status"], "NonConvergence");
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"atoms":[{"coords":[1,0],"weight":0.7}]}"#).unwrap();
    let out = gradmap(&["compute", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weights sum"));

    let missing = gradmap(&["compute", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_target = gradmap(&["balance", "--target", "[1,1,1]", data("three_atoms_rp2.json").to_str().unwrap()]);
    assert_eq!(bad_target.status.code(), Some(2));

    let bad_flag = gradmap(&["compute", "--tol", "abc", data("vertex_rp2.json").to_str().unwrap()]);
    assert_eq!(bad_flag.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let path = data("three_atoms_rp2.json");
    let args = ["orbit-image", "--samples", "25", "--seed", "9", path.to_str().unwrap()];
    let first = gradmap(&args);
    let second = gradmap(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let other_seed = gradmap(&["orbit-image", "--samples", "25", "--seed", "10", path.to_str().unwrap()]);
    assert_ne!(first.stdout, other_seed.stdout);
}

#[test]
fn orbit_image_csv_has_one_row_per_sample() {
    let out =
        gradmap(&["orbit-image", "--samples", "40", "--format", "csv", data("three_atoms_rp2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let comments = text.lines().take_while(|l| l.starts_with('#')).count();
    assert!(comments >= 1);
    let mut lines = text.lines().skip(comments);
    assert_eq!(lines.next(), Some("sample,a_0,a_1,a_2"));
    assert_eq!(lines.count(), 40);
}

#[test]
fn out_dir_override_and_explicit_output() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_gradmap"))
        .args(["polytope", "--model", "cp2"])
        .env("GRADMAP_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("polytope.json")).unwrap()).unwrap();
    assert_eq!(report["outputs"]["vertices"].as_array().unwrap().len(), 3);

    let explicit = dir.path().join("nested/vertices.csv");
    let out = gradmap(&["polytope", "--model", "rp3", "--format", "csv", "--output", explicit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(&explicit).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn scenario_files_run() {
    let out = gradmap(&["run", data("torus_scenario.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_stdout(&out);
    assert_eq!(report["status"], "Converged");
    let image: Vec<f64> = report["outputs"]["image"].as_array().unwrap().iter().map(as_f64).collect();
    for (got, want) in image.iter().zip([0.1, 0.0, -0.1]) {
        assert!((got - want).abs() < 1e-10);
    }

    let out = gradmap(&["run", data("reduce_scenario.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_stdout(&out);
    assert_eq!(report["outputs"]["kind"], "MinNormShift");
    assert_eq!(report["outputs"]["reduced_dimension"], 2);
    let center = &report["outputs"]["center"];
    for (i, want) in [1.0 / 6.0, 1.0 / 6.0, -1.0 / 3.0].iter().enumerate() {
        assert!((as_f64(&center[i][i]) - want).abs() < 1e-9);
    }
}

#[test]
fn check_passes_on_one_model() {
    let out = gradmap(&["check", "--model", "rp2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("rp2,")).all(|l| l.contains(",true,")));
}

#[test]
fn wall_time_is_opt_in() {
    let path = data("vertex_rp2.json");
    let plain = json_stdout(&gradmap(&["compute", path.to_str().unwrap()]));
    assert!(plain.get("wall_time_seconds").is_none());
    let timed = json_stdout(&gradmap(&["compute", "--wall-time", path.to_str().unwrap()]));
    assert!(timed["wall_time_seconds"].is_number());
}
