use std::path::Path;
use std::process::{Command, Output};

fn peakprint(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peakprint"))
        .args(args)
        .current_dir(dir)
        .env_remove("PEAKPRINT_THREADS")
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn predict_peaks_contract() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&peakprint(
        &["predict-peaks", "8", "5", "4", "2", "--rate", "48000"],
        dir.path(),
    ));
    assert_eq!(v["peak_count"], 161);
    assert_eq!(v["spacing_hz"], 150.0);

    let v = stdout_json(&peakprint(&["predict-peaks", "1"], dir.path()));
    assert_eq!(v["peak_count"], 1);
    assert_eq!(v["normalized_frequencies"][0], 0.0);

    let v = stdout_json(&peakprint(
        &["predict-peaks", "--preset", "encodec48k"],
        dir.path(),
    ));
    assert_eq!(v["peak_count"], 161);

    let csv = peakprint(
        &["--format", "csv", "predict-peaks", "8", "--rate", "48000"],
        dir.path(),
    );
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert_eq!(text.lines().nth(2).unwrap(), "1,0.125,6000");

    let bad = peakprint(&["predict-peaks", "0"], dir.path());
    assert_eq!(code(&bad), 2);
    assert!(!bad.stderr.is_empty());
    assert_eq!(code(&peakprint(&["predict-peaks"], dir.path())), 2);
    assert_eq!(
        code(&peakprint(
            &["predict-peaks", "--preset", "nope"],
            dir.path()
        )),
        2
    );
    assert_eq!(code(&peakprint(&["predict-peaks", "x"], dir.path())), 2);
}

#[test]
fn simulate_writes_one_csv_per_stage() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&peakprint(
        &[
            "simulate",
            "--preset",
            "encodec48k",
            "--frames",
            "20",
            "--out",
            "sim",
        ],
        dir.path(),
    ));
    let stages = v["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 5);
    // Frames cover the same stretch of time at every stage.
    let frames: Vec<u64> = stages
        .iter()
        .map(|s| s["frame_len"].as_u64().unwrap())
        .collect();
    assert_eq!(frames, vec![16, 128, 1024, 4096, 8192]);
    for (i, frame) in frames.iter().enumerate() {
        let rows = read_csv(&dir.path().join(format!("sim/layer_{i}.csv")));
        assert_eq!(rows.len() as u64, frame / 2 + 1);
        assert!(rows.iter().all(|r| r[2] == i as f64));
    }
    let last = read_csv(&dir.path().join("sim/layer_4.csv"));
    assert_eq!(last[1][0], 48000.0 / 8192.0);
    assert!(stages[4]["measured_peaks"].as_u64().unwrap() > 100);
}

#[test]
fn identity_layer_tiles_the_input_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("stack.json"),
        r#"{"input_rate": 24000, "activation": "none", "layers": [{"stride": 2, "taps": [1.0]}]}"#,
    )
    .unwrap();
    let out = peakprint(
        &[
            "simulate",
            "--config",
            "stack.json",
            "--frames",
            "4",
            "--frame-len",
            "256",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let input: Vec<f64> = read_csv(&dir.path().join("o/layer_0.csv"))
        .iter()
        .map(|r| r[1])
        .collect();
    let output: Vec<f64> = read_csv(&dir.path().join("o/layer_1.csv"))
        .iter()
        .map(|r| r[1])
        .collect();
    // Input frames are 128 long, output frames 256; output bin m shows input
    // bin m mod 128, folded into the input half-spectrum.
    assert_eq!(input.len(), 65);
    assert_eq!(output.len(), 129);
    for (m, v) in output.iter().enumerate() {
        let folded = if m <= 64 { m } else { 128 - m };
        assert!((v - input[folded]).abs() < 1e-9, "bin {m}");
    }
}

#[test]
fn simulate_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&peakprint(
            &["simulate", "--config", "missing.json", "--out", "o"],
            dir.path()
        )),
        2
    );
    assert_eq!(
        code(&peakprint(
            &[
                "simulate",
                "--preset",
                "encodec48k",
                "--engine",
                "fft",
                "--out",
                "o"
            ],
            dir.path()
        )),
        2
    );
    std::fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    assert_eq!(
        code(&peakprint(
            &["simulate", "--config", "bad.json", "--out", "o"],
            dir.path()
        )),
        2
    );
    assert_eq!(code(&peakprint(&["simulate", "--out", "o"], dir.path())), 2);
}

fn write_spec(dir: &Path, n: usize) {
    let spec = format!(
        r#"{{"n_per_class": {n}, "duration_s": 2.0, "real_source": "harmonic_mixture",
            "stacks": [{{"tag": "encodec-like", "strides": [8, 5, 4, 2], "seed": 7}}], "seed": 3}}"#
    );
    std::fs::write(dir.join("spec.json"), spec).unwrap();
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let out = peakprint(args, dir);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn full_pipeline_is_accurate_and_reproducible() {
    let mut reports = Vec::new();
    let mut weights = Vec::new();
    for threads in ["1", "3"] {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        write_spec(d, 50);
        run_ok(
            &[
                "--threads",
                threads,
                "gen-data",
                "--spec",
                "spec.json",
                "--out",
                "data",
            ],
            d,
        );
        run_ok(
            &[
                "--threads",
                threads,
                "fingerprint",
                "--in",
                "data/manifest.jsonl",
                "--out",
                "fps.jsonl",
            ],
            d,
        );
        run_ok(
            &[
                "train",
                "--data",
                "fps.jsonl",
                "--out",
                "model.json",
                "--holdout",
                "0.2",
                "--seed",
                "4",
                "--report",
                "holdout.json",
            ],
            d,
        );
        let report: serde_json::Value =
            serde_json::from_slice(&std::fs::read(d.join("holdout.json")).unwrap()).unwrap();
        assert!(report["per_class"]["real"]["accuracy"].as_f64().unwrap() >= 0.99);
        assert!(
            report["per_class"]["encodec-like"]["accuracy"]
                .as_f64()
                .unwrap()
                >= 0.99
        );

        let eval = run_ok(
            &[
                "eval",
                "--model",
                "model.json",
                "--data",
                "data/manifest.jsonl",
            ],
            d,
        );
        let v: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
        assert_eq!(v["total"], 100);

        let real = run_ok(
            &[
                "classify",
                "--model",
                "model.json",
                "--in",
                "data/real/real_0000.wav",
            ],
            d,
        );
        let v: serde_json::Value = serde_json::from_slice(&real.stdout).unwrap();
        assert!(v["results"][0]["probability"].as_f64().unwrap() < 0.5);
        let fake = run_ok(
            &[
                "classify",
                "--model",
                "model.json",
                "--in",
                "data/encodec-like/encodec-like_0001.wav",
            ],
            d,
        );
        let v: serde_json::Value = serde_json::from_slice(&fake.stdout).unwrap();
        assert!(v["results"][0]["probability"].as_f64().unwrap() > 0.99);

        run_ok(
            &["export-weights", "--model", "model.json", "--out", "w.csv"],
            d,
        );
        let rows = read_csv(&d.join("w.csv"));
        assert_eq!(rows.len(), 1877);

        reports.push((
            std::fs::read(d.join("holdout.json")).unwrap(),
            eval.stdout,
            std::fs::read(d.join("model.json")).unwrap(),
        ));
        weights.push(std::fs::read(d.join("w.csv")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(weights[0], weights[1]);
}

#[test]
fn pipeline_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("empty.jsonl"), "").unwrap();
    assert_eq!(
        code(&peakprint(
            &["gen-data", "--spec", "missing.json", "--out", "x"],
            d
        )),
        2
    );
    std::fs::write(
        d.join("bad_spec.json"),
        r#"{"n_per_class": 0, "duration_s": 1, "real_source": "noise", "stacks": []}"#,
    )
    .unwrap();
    assert_eq!(
        code(&peakprint(
            &["gen-data", "--spec", "bad_spec.json", "--out", "x"],
            d
        )),
        2
    );
    assert_eq!(
        code(&peakprint(
            &["fingerprint", "--in", "missing.wav", "--out", "f.csv"],
            d
        )),
        2
    );
    assert_eq!(
        code(&peakprint(
            &["train", "--data", "empty.jsonl", "--out", "m.json"],
            d
        )),
        2
    );
    assert_eq!(
        code(&peakprint(
            &["classify", "--model", "missing.json", "--in", "x.wav"],
            d
        )),
        2
    );
    assert_eq!(
        code(&peakprint(
            &[
                "export-weights",
                "--model",
                "missing.json",
                "--out",
                "w.csv"
            ],
            d
        )),
        2
    );

    // A real model for the remaining checks.
    write_spec(d, 4);
    run_ok(&["gen-data", "--spec", "spec.json", "--out", "data"], d);
    run_ok(
        &[
            "fingerprint",
            "--in",
            "data/manifest.jsonl",
            "--out",
            "fps.jsonl",
        ],
        d,
    );
    run_ok(&["train", "--data", "fps.jsonl", "--out", "model.json"], d);
    assert_eq!(
        code(&peakprint(
            &["eval", "--model", "model.json", "--data", "empty.jsonl"],
            d
        )),
        2
    );
    assert_eq!(
        code(&peakprint(
            &[
                "eval",
                "--model",
                "model.json",
                "--data",
                "fps.jsonl",
                "--breakdown-by",
                "seed"
            ],
            d
        )),
        2
    );
    // Fingerprints taken with another band do not fit the model.
    std::fs::write(
        d.join("cfg.json"),
        r#"{"band_low": 2000, "band_high": 9000}"#,
    )
    .unwrap();
    run_ok(
        &[
            "fingerprint",
            "--config",
            "cfg.json",
            "--in",
            "data/manifest.jsonl",
            "--out",
            "other.jsonl",
        ],
        d,
    );
    assert_eq!(
        code(&peakprint(
            &["eval", "--model", "model.json", "--data", "other.jsonl"],
            d
        )),
        2
    );

    // Runtime failure: the output directory cannot be created.
    std::fs::write(d.join("blocker"), "").unwrap();
    assert_eq!(
        code(&peakprint(
            &[
                "export-weights",
                "--model",
                "model.json",
                "--out",
                "blocker/w.csv"
            ],
            d
        )),
        1
    );
    let corrupt = d.join("corrupt.wav");
    std::fs::write(&corrupt, b"RIFF\x10\x00\x00\x00WAVEjunk").unwrap();
    assert_eq!(
        code(&peakprint(
            &["classify", "--model", "model.json", "--in", "corrupt.wav"],
            d
        )),
        1
    );
}

#[test]
fn fingerprint_single_file_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_spec(d, 2);
    run_ok(&["gen-data", "--spec", "spec.json", "--out", "data"], d);
    run_ok(
        &[
            "fingerprint",
            "--in",
            "data/real/real_0000.wav",
            "--out",
            "fp.csv",
        ],
        d,
    );
    let rows = read_csv(&d.join("fp.csv"));
    assert_eq!(rows.len(), 1877);
    assert!(rows.iter().all(|r| r[1] >= 0.0));
    assert_eq!(
        code(&peakprint(
            &["fingerprint", "--in", "data/real", "--out", "x.csv"],
            d
        )),
        2
    );
}

#[test]
fn help_documents_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let top = String::from_utf8(peakprint(&["--help"], dir.path()).stdout).unwrap();
    for sub in [
        "predict-peaks",
        "simulate",
        "fingerprint",
        "train",
        "classify",
        "eval",
        "gen-data",
        "export-weights",
    ] {
        assert!(top.contains(sub), "{sub}");
        let help = peakprint(&[sub, "--help"], dir.path());
        assert!(help.status.success());
    }
    for flag in ["--log-level", "--format", "--threads"] {
        assert!(top.contains(flag));
    }
    assert_eq!(
        code(&peakprint(
            &["--threads", "0", "predict-peaks", "2"],
            dir.path()
        )),
        2
    );
}
