//! End-to-end checks of the command line binary: exit code conventions,
//! output formats, and the full train/evaluate/predict/analysis pipeline
//! on a tiny generated dataset.

use std::path::Path;
use std::process::{Command, Output};

fn molgraf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molgraf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_code(out: &Output, expected: i32) {
    assert_eq!(
        out.status.code(),
        Some(expected),
        "stdout: {}\nstderr: {}",
        stdout(out),
        stderr(out)
    );
}

fn path_arg(path: &Path) -> &str {
    path.to_str().expect("temp paths are UTF-8")
}

#[test]
fn help_and_version_exit_cleanly() {
    let help = molgraf(&["--help"]);
    assert_code(&help, 0);
    assert!(stdout(&help).contains("Usage"));

    let version = molgraf(&["--version"]);
    assert_code(&version, 0);
}

#[test]
fn bad_invocations_are_usage_errors() {
    assert_code(&molgraf(&[]), 2);
    assert_code(&molgraf(&["no-such-command"]), 2);
    assert_code(&molgraf(&["parse", "CCO", "--frobnicate"]), 2);
    assert_code(&molgraf(&["train"]), 2);
}

#[test]
fn parse_dumps_atoms_then_bonds() {
    let out = molgraf(&["parse", "CCO"]);
    assert_code(&out, 0);
    let expected = "0 C false 3 0\n1 C false 2 0\n2 O false 1 0\n0 1 1\n1 2 1\n";
    assert_eq!(stdout(&out), expected);
}

#[test]
fn parse_marks_aromatic_rings() {
    let out = molgraf(&["parse", "c1ccccc1"]);
    assert_code(&out, 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12, "six atoms and six bonds: {text}");
    for atom in &lines[..6] {
        assert!(atom.contains(" C true 1 0"), "atom line {atom:?}");
    }
    for bond in &lines[6..] {
        assert!(bond.ends_with(" 1.5"), "bond line {bond:?}");
    }
}

#[test]
fn invalid_smiles_is_a_runtime_error() {
    let out = molgraf(&["parse", "C(C"]);
    assert_code(&out, 1);
    assert!(stderr(&out).starts_with("error:"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_output_directory_fails_before_any_work() {
    let out = molgraf(&["parse", "CCO", "--out", "/no/such/dir/dump.txt"]);
    assert_code(&out, 2);
    assert!(stderr(&out).contains("output directory"));
}

#[test]
fn missing_input_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.bin");
    let out = molgraf(&[
        "train",
        "--data",
        "/no/such/data.csv",
        "--out",
        path_arg(&model),
    ]);
    assert_code(&out, 2);
    assert!(stderr(&out).contains("does not exist"));
}

#[test]
fn malformed_datasets_are_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "molecule;value\nCCO;1.0\n").unwrap();
    let model = dir.path().join("model.bin");
    let out = molgraf(&[
        "train",
        "--data",
        path_arg(&data),
        "--out",
        path_arg(&model),
    ]);
    assert_code(&out, 1);
    assert!(stderr(&out).contains("header"));
}

#[test]
fn gen_data_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, seed) in [(&a, "11"), (&b, "11"), (&c, "12")] {
        let out = molgraf(&[
            "gen-data",
            "--count",
            "40",
            "--seed",
            seed,
            "--out",
            path_arg(path),
        ]);
        assert_code(&out, 0);
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    let tc = std::fs::read_to_string(&c).unwrap();
    assert_eq!(ta, tb, "same seed must give byte-identical data");
    assert_ne!(ta, tc, "different seeds must give different data");
    assert!(ta.starts_with("smiles,target\n"));
    assert_eq!(ta.lines().count(), 41);
}

#[test]
fn gen_data_rejects_degenerate_requests() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.csv");
    let zero = molgraf(&["gen-data", "--count", "0", "--out", path_arg(&out_path)]);
    assert_code(&zero, 2);
    let no_atoms = molgraf(&[
        "gen-data",
        "--max-atoms",
        "0",
        "--out",
        path_arg(&out_path),
    ]);
    assert_code(&no_atoms, 2);
}

#[test]
fn dump_config_echoes_flag_overrides_and_round_trips() {
    let defaults = molgraf(&["train", "--dump-config"]);
    assert_code(&defaults, 0);
    let text = stdout(&defaults);
    assert!(text.contains("variant=gcn\n"), "dump: {text}");
    assert!(text.contains("attention_mode=coupling\n"), "dump: {text}");

    let tuned = molgraf(&[
        "train",
        "--variant",
        "gcn+gate",
        "--layers",
        "5",
        "--lr",
        "0.01",
        "--dump-config",
    ]);
    assert_code(&tuned, 0);
    let tuned_text = stdout(&tuned);
    assert!(tuned_text.contains("variant=gcn+gate\n"), "dump: {tuned_text}");
    assert!(tuned_text.contains("layers=5\n"), "dump: {tuned_text}");
    assert!(
        tuned_text.contains("learning_rate=0.01\n"),
        "dump: {tuned_text}"
    );

    // Feeding a dump back in through --config must reproduce it exactly.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, &tuned_text).unwrap();
    let reloaded = molgraf(&["train", "--config", path_arg(&cfg), "--dump-config"]);
    assert_code(&reloaded, 0);
    assert_eq!(stdout(&reloaded), tuned_text);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "variant=gcn # fine\nmomentum=0.9\n").unwrap();
    let out = molgraf(&["train", "--config", path_arg(&cfg), "--dump-config"]);
    assert_code(&out, 2);
    assert!(stderr(&out).contains("unknown config key"));
}

#[test]
fn invalid_thread_override_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_molgraf"))
        .args(["parse", "CCO"])
        .env("MOLGRAF_THREADS", "many")
        .output()
        .expect("binary runs");
    assert_code(&out, 2);
}

/// Generate, train, evaluate, predict, and run both analyses through the
/// real binary, checking every artifact the pipeline leaves on disk.
#[test]
fn pipeline_runs_end_to_end_on_a_tiny_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let model = dir.path().join("model.bin");
    let history = dir.path().join("model.history.csv");

    let gen = molgraf(&[
        "gen-data",
        "--count",
        "30",
        "--seed",
        "5",
        "--out",
        path_arg(&data),
    ]);
    assert_code(&gen, 0);

    let train = molgraf(&[
        "train",
        "--data",
        path_arg(&data),
        "--out",
        path_arg(&model),
        "--variant",
        "gcn",
        "--layers",
        "1",
        "--epochs",
        "2",
        "--batch-size",
        "8",
        "--seed",
        "3",
    ]);
    assert_code(&train, 0);
    assert!(stdout(&train).contains("trained 2 epochs"));
    assert!(model.is_file(), "checkpoint written");
    let history_text = std::fs::read_to_string(&history).expect("history written");
    assert!(history_text.starts_with("epoch,train_loss,val_mae,seconds\n"));
    assert_eq!(history_text.lines().count(), 3);

    let eval = molgraf(&["evaluate", "--model", path_arg(&model), "--data", path_arg(&data)]);
    assert_code(&eval, 0);
    let report = stdout(&eval);
    assert!(report.starts_with("mae "), "report: {report}");
    assert!(report.contains("\nstd "), "report: {report}");

    let preds_path = dir.path().join("preds.csv");
    let predict = molgraf(&[
        "predict",
        "--model",
        path_arg(&model),
        "--data",
        path_arg(&data),
        "--out",
        path_arg(&preds_path),
    ]);
    assert_code(&predict, 0);
    let preds = std::fs::read_to_string(&preds_path).unwrap();
    assert!(preds.starts_with("smiles,prediction\n"));
    assert_eq!(preds.lines().count(), 31, "one row per molecule");
    for row in preds.lines().skip(1) {
        let (_, value) = row.split_once(',').expect("two columns");
        assert!(value.parse::<f64>().unwrap().is_finite());
    }

    let analysis = dir.path().join("analysis");
    let atoms = molgraf(&[
        "analyze-atoms",
        "--model",
        path_arg(&model),
        "--data",
        path_arg(&data),
        "--out",
        path_arg(&analysis),
        "--k",
        "4",
    ]);
    assert_code(&atoms, 0);
    let atoms_csv = std::fs::read_to_string(analysis.join("atoms.csv")).unwrap();
    assert!(atoms_csv.starts_with("molecule_id,atom_index,x,y,label\n"));
    for mi in 0..30 {
        let dot = std::fs::read_to_string(analysis.join(format!("mol{mi}.dot")))
            .unwrap_or_else(|e| panic!("mol{mi}.dot: {e}"));
        assert!(dot.starts_with("graph molecule {"));
    }

    let dist_path = dir.path().join("dist.csv");
    let dist = molgraf(&[
        "latent-distance",
        "--model",
        path_arg(&model),
        "--data",
        path_arg(&data),
        "--out",
        path_arg(&dist_path),
    ]);
    assert_code(&dist, 0);
    let dist_csv = std::fs::read_to_string(&dist_path).unwrap();
    assert_eq!(dist_csv.lines().count(), 31, "header plus one row per molecule");
    assert!(dist_csv.starts_with("property,"));
    for row in dist_csv.lines() {
        assert_eq!(row.split(',').count(), 31, "row: {row}");
    }
}

#[test]
fn depth_study_writes_one_row_per_variant_and_depth() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let gen = molgraf(&[
        "gen-data",
        "--count",
        "30",
        "--seed",
        "6",
        "--out",
        path_arg(&data),
    ]);
    assert_code(&gen, 0);

    let study_path = dir.path().join("study.csv");
    let study = molgraf(&[
        "depth-study",
        "--data",
        path_arg(&data),
        "--variants",
        "gcn",
        "--layers",
        "1..2",
        "--epochs",
        "1",
        "--batch-size",
        "8",
        "--out",
        path_arg(&study_path),
    ]);
    assert_code(&study, 0);
    let csv = std::fs::read_to_string(&study_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "variant,layers,val_mae,test_mae,seconds");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("gcn,1,"));
    assert!(lines[2].starts_with("gcn,2,"));

    let bad_range = molgraf(&[
        "depth-study",
        "--data",
        path_arg(&data),
        "--layers",
        "0..2",
    ]);
    assert_code(&bad_range, 2);

    let bad_variant = molgraf(&[
        "depth-study",
        "--data",
        path_arg(&data),
        "--variants",
        "gcn,transformer",
    ]);
    assert_code(&bad_variant, 2);
}
