use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mirrorbench::harness::{answer_check, RunManifest};
use mirrorbench::solvers::{solve_exact, SampleSetDocument};
use mirrorbench::{CompositeProblem, SampleSet};

fn mirrorbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mirrorbench")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// gen + compose, returning the composite path.
fn composite(dir: &Path, strength: &str) -> std::path::PathBuf {
    let gen = mirrorbench(&["gen", "--rows", "1", "--cols", "1", "--fields", "--seed", "4", "--out-dir", p(dir)]);
    assert_eq!(code(&gen), 0, "{}", String::from_utf8_lossy(&gen.stderr));
    assert!(dir.join("topology.json").exists());
    let problem = dir.join(format!("composite{strength}.json"));
    let compose = mirrorbench(&[
        "compose",
        "--instance",
        p(&dir.join("instance_00000.json")),
        "--topology",
        p(&dir.join("topology.json")),
        &format!("--strength={strength}"),
        "-o",
        p(&problem),
    ]);
    assert_eq!(code(&compose), 0, "{}", String::from_utf8_lossy(&compose.stderr));
    problem
}

#[test]
fn exact_samples_check_as_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    for strength in ["28", "-28"] {
        let problem = composite(dir.path(), strength);
        let samples = dir.path().join("exact.json");
        let out = mirrorbench(&["sample", "--problem", p(&problem), "--backend", "exact", "-o", p(&samples)]);
        assert_eq!(code(&out), 0);
        let out = mirrorbench(&["check", "--problem", p(&problem), "--samples", p(&samples)]);
        assert_eq!(code(&out), 0);
        assert!(stdout(&out).contains("some symmetric"));
    }
}

#[test]
fn flipped_samples_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let problem_path = composite(dir.path(), "28");
    let problem = CompositeProblem::from_json(&fs::read_to_string(&problem_path).unwrap()).unwrap();
    let exact = solve_exact(&problem).unwrap();
    let right = (0..problem.num_qubits()).find(|&i| !problem.is_left(i)).unwrap();
    let flipped = exact.entries.iter().map(|e| {
        let mut s = e.config.spins.clone();
        s[right] = -s[right];
        s
    });
    let set = SampleSet::from_reads(&problem, flipped, exact.backend.clone(), 0).unwrap();
    let samples = dir.path().join("flipped.json");
    fs::write(&samples, set.to_json()).unwrap();

    let out_dir = dir.path().join("check");
    let out = mirrorbench(&["check", "--problem", p(&problem_path), "--samples", p(&samples), "--out-dir", p(&out_dir)]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("none symmetric"));
    let filtered = SampleSet::from_json(&fs::read_to_string(out_dir.join("symmetric_samples.json")).unwrap(), &problem);
    assert!(filtered.unwrap().is_empty());
}

#[test]
fn corrupt_energy_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let problem = composite(dir.path(), "28");
    let samples = dir.path().join("sa.json");
    let out = mirrorbench(&["sample", "--problem", p(&problem), "--reads", "5", "--sweeps", "50", "-o", p(&samples)]);
    assert_eq!(code(&out), 0);
    let mut doc: SampleSetDocument = serde_json::from_str(&fs::read_to_string(&samples).unwrap()).unwrap();
    doc.entries[0].1 += 2;
    fs::write(&samples, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = mirrorbench(&["check", "--problem", p(&problem), "--samples", p(&samples)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("energy"));
}

/// Samples written by an external process and read back through the files
/// give the same verdicts as the in-process path.
#[test]
fn file_round_trip_matches_in_process_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let problem_path = composite(dir.path(), "28");
    let samples = dir.path().join("sa.json");
    let out = mirrorbench(&[
        "sample", "--problem", p(&problem_path), "--reads", "40", "--sweeps", "20", "--seed", "3", "-o", p(&samples),
    ]);
    assert_eq!(code(&out), 0);
    let out_dir = dir.path().join("check");
    let out = mirrorbench(&["check", "--problem", p(&problem_path), "--samples", p(&samples), "--out-dir", p(&out_dir)]);
    assert!(code(&out) == 0 || code(&out) == 3);

    let problem_text = fs::read_to_string(&problem_path).unwrap();
    let problem = CompositeProblem::from_json(&problem_text).unwrap();
    assert_eq!(problem.to_json(), problem_text.trim_end());
    let report = answer_check(&problem_text, &fs::read_to_string(&samples).unwrap()).unwrap();
    assert_eq!(fs::read_to_string(out_dir.join("check_report.json")).unwrap(), report.to_json());
    assert_eq!(code(&out) == 0, report.some_symmetric());
}

#[test]
fn experiment_commands_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("experiment.json");
    fs::write(
        &config,
        r#"{
  "topology": {"rows": 2, "cols": 4},
  "sizes": [{"rows": 2, "cols": 1}, {"rows": 2, "cols": 2}],
  "instances": 8,
  "fields": true,
  "mirror_strengths": [28, 0],
  "backend": "sa",
  "schedules": [{"sweeps": 50}, {"sweeps": 200}],
  "reads": 5,
  "base_seed": 17,
  "asymmetric_only": false,
  "out_dir": "unused"
}"#,
    )
    .unwrap();
    for cmd in ["psym", "hamming", "sweep"] {
        let runs: Vec<Vec<u8>> = ["a", "b"]
            .iter()
            .map(|sub| {
                let out_dir = dir.path().join(cmd).join(sub);
                let out = mirrorbench(&[cmd, "--config", p(&config), "--out-dir", p(&out_dir), "--workers", "2"]);
                assert_eq!(code(&out), 0, "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
                RunManifest::load(&out_dir).unwrap().verify(&out_dir).unwrap();
                let csv = if cmd == "psym" { "psym.csv" } else { "hamming.csv" };
                fs::read(out_dir.join(csv)).unwrap()
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{cmd}");
    }
    let psym = fs::read_to_string(dir.path().join("psym/a/psym.csv")).unwrap();
    assert_eq!(psym.lines().count(), 3);
}

#[test]
fn validation_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mirrorbench(&["psym"])), 2);
    assert_eq!(code(&mirrorbench(&["sample", "--problem", "x.json", "--backend", "annealer"])), 2);

    let config = dir.path().join("bad.json");
    fs::write(
        &config,
        r#"{"topology": {"rows": 2, "cols": 4}, "sizes": [{"rows": 2, "cols": 3}],
            "instances": 2, "backend": "sa", "reads": 1, "base_seed": 0, "out_dir": "x"}"#,
    )
    .unwrap();
    assert_eq!(code(&mirrorbench(&["psym", "--config", p(&config)])), 2);

    let problem = composite(dir.path(), "28");
    let schedule = dir.path().join("offsets.json");
    fs::write(&schedule, r#"{"sweeps": 10, "offsets": {"left_half": -0.1}}"#).unwrap();
    let out = mirrorbench(&["sample", "--problem", p(&problem), "--schedule", p(&schedule)]);
    assert_eq!(code(&out), 2);
    let out = mirrorbench(&[
        "sample", "--problem", p(&problem), "--schedule", p(&schedule), "--backend", "sqa", "--reads", "2",
    ]);
    assert_eq!(code(&out), 0);

    let missing = mirrorbench(&["check", "--problem", "/nonexistent.json", "--samples", "/nonexistent.json"]);
    assert_eq!(code(&missing), 1);
}
