use std::path::Path;
use std::process::{Command, Output};

fn kinacoustic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinacoustic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--seed", "7", "--out-dir", p(dir)];
    args.extend_from_slice(extra);
    let out = kinacoustic(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn stream_args(dir: &Path) -> Vec<String> {
    ["audio", "kinematic", "annotations"]
        .iter()
        .zip(["audio.wav", "kinematic.csv", "annotations.csv"])
        .flat_map(|(flag, file)| [format!("--{flag}"), dir.join(file).display().to_string()])
        .collect()
}

fn run_with(cmd: &str, dir: &Path, out_dir: &Path, extra: &[&str]) -> Output {
    let streams = stream_args(dir);
    let mut args: Vec<&str> = vec![cmd, "--out-dir", p(out_dir)];
    args.extend(streams.iter().map(String::as_str));
    args.extend_from_slice(extra);
    kinacoustic(&args)
}

#[test]
fn synth_then_compare_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    synth(&a, &["--duration-s", "120", "--acceptance"]);
    synth(&b, &["--duration-s", "120", "--acceptance"]);
    for f in ["audio.wav", "kinematic.csv", "annotations.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let (ca, cb) = (tmp.path().join("ca"), tmp.path().join("cb"));
    for out in [&ca, &cb] {
        let o = run_with("compare", &a, out, &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in [
        "comparison.txt",
        "comparison.csv",
        "reports.json",
        "timeline_audio.csv",
        "timeline_kinematic.csv",
        "timeline_fused.csv",
    ] {
        assert_eq!(std::fs::read(ca.join(f)).unwrap(), std::fs::read(cb.join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(ca.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn train_classify_evaluate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, &["--duration-s", "120", "--acceptance"]);
    let model = tmp.path().join("model");
    let o = run_with("train", &data, &model, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(model.join("model.json")).unwrap()).unwrap();
    let n_sv = json["support_vectors"].as_array().unwrap().len();
    let std_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(model.join("standardizer.json")).unwrap()).unwrap();
    let n_train = std_json["fitted_on"].as_u64().unwrap() as usize;
    assert!(n_sv > 0 && n_sv <= n_train, "{n_sv} support vectors for {n_train} rows");
    assert!(model.join("transitions.json").exists());

    let out = tmp.path().join("labels");
    let o = run_with("classify", &data, &out, &["--model", p(&model)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let timeline = out.join("timeline.csv");
    let header = std::fs::read_to_string(&timeline).unwrap();
    assert!(header.starts_with("segment_index,t_center_s,raw,swf,bwf,mcf,truth"));

    let o = kinacoustic(&[
        "evaluate",
        "--timeline",
        p(&timeline),
        "--annotations",
        p(&data.join("annotations.csv")),
        "--out-dir",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let report = report.as_array().unwrap();
    assert_eq!(report.len(), 4);
    let mcf = report[3]["accuracy"].as_f64().unwrap();
    assert!(mcf > 0.8, "mcf accuracy {mcf}");
}

#[test]
fn classify_without_model_exits_1_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kinacoustic(&["classify", "--out-dir", p(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`model`"));
}

#[test]
fn bad_flags_and_configs_exit_1() {
    assert_eq!(kinacoustic(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kinacoustic(&["synth", "--modality", "video"]).status.code(), Some(1));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"pipeline": {"svm": {"C": -1}}}"#).unwrap();
    let o = kinacoustic(&["synth", "--config", p(&cfg), "--out-dir", p(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(&cfg, "{not json").unwrap();
    assert_eq!(kinacoustic(&["synth", "--config", p(&cfg)]).status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = kinacoustic(&["synth", "--duration-s", "2", "--out-dir", p(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_sets_fields_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    let from_cfg = tmp.path().join("from_cfg");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"out_dir": {:?}, "seed": 3, "synth": {{"duration_s": 4}}}}"#,
            from_cfg.display().to_string()
        ),
    )
    .unwrap();
    assert!(kinacoustic(&["synth", "--config", p(&cfg)]).status.success());
    let flagged = tmp.path().join("flagged");
    assert!(kinacoustic(&["synth", "--config", p(&cfg), "--seed", "3", "--out-dir", p(&flagged)])
        .status
        .success());
    let a = std::fs::read(from_cfg.join("kinematic.csv")).unwrap();
    assert_eq!(a, std::fs::read(flagged.join("kinematic.csv")).unwrap());
    assert_eq!(a.iter().filter(|&&b| b == b'\n').count(), 401);
}
