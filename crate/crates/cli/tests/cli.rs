use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ddf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddf")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(path: &Path, text: &str) -> String {
    fs::write(path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_SPEC: &str = r#"{"segments_per_class": 20, "seed": 3}"#;

fn small_experiment(dataset: &str) -> String {
    format!(
        r#"{{
  "dataset": "{dataset}",
  "ssl": {{
    "steps": 3,
    "repetitions": 2,
    "time_classifier": {{"epochs": 30}},
    "tf_classifier": {{"epochs": 30}}
  }}
}}"#
    )
}

#[test]
fn synth_preprocess_run_report() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let spec = write(&root.join("spec.json"), SMALL_SPEC);
    let data = root.join("data");
    let out = ddf(&["synth", "--spec", &spec, "--out", data.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(data.join("dataset.json").exists());

    let noisy = root.join("noisy");
    let out = ddf(&["preprocess", "--in", data.to_str().unwrap(), "--snr", "-5", "--out", noisy.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let cfg = write(&root.join("exp.json"), &small_experiment("noisy"));
    let results = root.join("results");
    for method in ["ddf", "self-training"] {
        let out = ddf(&["run", "--config", &cfg, "--method", method, "--out", results.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let steps = fs::read_to_string(results.join("ddf_steps.csv")).unwrap();
    assert!(steps.starts_with("repetition,step,pool_labeled,pool_pseudo,accepted,acc_time,acc_tf,acc_fused\n"));
    assert_eq!(steps.lines().count(), 1 + 2 * 3);
    let st = fs::read_to_string(results.join("self-training_steps.csv")).unwrap();
    assert!(st.lines().nth(1).unwrap().contains(",,"), "self-training has no tf accuracy");
    assert!(results.join("models/ddf_rep0_weights.json").exists());

    let out = ddf(&["report", "--in", results.to_str().unwrap(), "--plots"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(results.join("report.csv").exists());
    let svg = fs::read_to_string(results.join("ddf_results_test.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 3);
}

#[test]
fn run_output_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let cfg = write(
        &root.join("exp.json"),
        r#"{"synth": {"segments_per_class": 20}, "ssl": {"steps": 2, "repetitions": 2, "time_classifier": {"epochs": 20}, "tf_classifier": {"epochs": 20}}}"#,
    );
    let (a, b) = (root.join("a"), root.join("b"));
    for dir in [&a, &b] {
        assert_eq!(code(&ddf(&["run", "--config", &cfg, "--out", dir.to_str().unwrap()])), 0);
    }
    for name in ["ddf_steps.csv", "ddf_results.csv", "ddf_deployment.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn sweep_writes_one_row_per_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let cfg = write(
        &root.join("exp.json"),
        r#"{"synth": {"segments_per_class": 20}, "ssl": {"steps": 2, "repetitions": 2, "time_classifier": {"epochs": 20}, "tf_classifier": {"epochs": 20}}}"#,
    );
    let out_dir = root.join("sweep");
    let out = ddf(&["sweep", "--config", &cfg, "--grid", "0.2:0.8:0.3", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("sweep_results.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3);
    assert_eq!(table.matches(",true\n").count(), 1);
}

#[test]
fn tfr_of_a_raw_segment() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let seg = root.join("seg.bin");
    let samples: Vec<u8> = (0..256)
        .flat_map(|i| ((2.0 * std::f64::consts::PI * 0.125 * i as f64).cos() as f32).to_le_bytes())
        .collect();
    fs::write(&seg, samples).unwrap();
    write(&root.join("seg.json"), r#"{"sample_rate_hz": 1000.0, "channels": 1}"#);
    let params = write(&root.join("ckd.json"), r#"{"c": 1.0, "d_cutoff": 0.1, "e_cutoff": 0.1}"#);
    let out_path = root.join("tfr.bin");
    let out = ddf(&["tfr", "--in", seg.to_str().unwrap(), "--params", &params, "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // round(0.064 · 256) = 16 bins per side.
    assert_eq!(fs::read(&out_path).unwrap().len(), 16 * 16 * 4);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(root.join("tfr.json")).unwrap()).unwrap();
    assert_eq!(meta["time_bins"], 16);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();

    assert_eq!(code(&ddf(&["frobnicate"])), 1);
    assert_eq!(code(&ddf(&["--help"])), 0);

    let bad = write(&root.join("bad.json"), r#"{"ssl": {"xi": 1.5}}"#);
    assert_eq!(code(&ddf(&["run", "--config", &bad, "--out", root.to_str().unwrap()])), 1);

    let missing = write(&root.join("missing.json"), r#"{"dataset": "nowhere"}"#);
    assert_eq!(code(&ddf(&["run", "--config", &missing, "--out", root.to_str().unwrap()])), 2);

    let few = write(&root.join("few.json"), r#"{"synth": {"segments_per_class": 5}}"#);
    assert_eq!(code(&ddf(&["run", "--config", &few, "--out", root.to_str().unwrap()])), 2);

    let diverge = write(
        &root.join("diverge.json"),
        r#"{"synth": {"segments_per_class": 10}, "ssl": {"steps": 1, "repetitions": 1, "time_classifier": {"kind": "softmax_regression", "learning_rate": 1e200, "standardize": false}}}"#,
    );
    assert_eq!(code(&ddf(&["run", "--config", &diverge, "--method", "self-training", "--out", root.to_str().unwrap()])), 3);

    let out = Command::new(env!("CARGO_BIN_EXE_ddf"))
        .env("DDF_THREADS", "lots")
        .args(["report", "--in", root.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}
