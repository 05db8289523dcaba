use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use peakprint::audio::{generate_synth_dataset, read_wav, resample, SynthSpec};
use peakprint::deconv::{
    default_min_prominence, measure_peaks_mirrored, noise_latent, predict_peaks as predict,
    run_stack, EngineRegistry, StackConfig,
};
use peakprint::detector::{
    self, evaluate, stratified_split, EvalReport, LabeledFingerprint, LinearModel, TrainConfig,
};
use peakprint::fingerprint::{
    extract_fingerprint, write_fingerprint_csv, write_records, Fingerprint, FingerprintConfig,
    FingerprintRecord,
};
use peakprint::signal::{average_frame_spectrum, log_magnitude, Signal, DEFAULT_EPSILON};
use peakprint::{presets, REAL_LABEL};

use crate::args::*;
use crate::inputs::{audio_items, is_jsonl, load_fingerprint_config, require, try_records};
use crate::UsageError;

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn predict_peaks(a: PredictPeaksArgs, format: Format) -> Result<()> {
    let (strides, rate) = match &a.preset {
        Some(name) => {
            let p = presets::get(name)?;
            (p.strides.clone(), a.rate.or(Some(p.sample_rate)))
        }
        None => (a.strides.clone(), a.rate),
    };
    if strides.is_empty() {
        return Err(usage("give at least one stride or --preset"));
    }
    let pred = predict(&strides, rate)?;
    let text = match format {
        Format::Json => json(&pred)?,
        Format::Csv => {
            let mut s = String::from("n,normalized_frequency,frequency_hz\n");
            for (i, (n, f)) in pred
                .harmonics
                .iter()
                .zip(&pred.normalized_frequencies)
                .enumerate()
            {
                let hz = pred
                    .absolute_frequencies
                    .as_ref()
                    .map(|v| v[i].to_string())
                    .unwrap_or_default();
                writeln!(s, "{n},{f},{hz}")?;
            }
            s
        }
    };
    emit(&text, None)
}

#[derive(Serialize)]
struct StageSummary {
    layer_index: usize,
    file: String,
    sample_rate: f64,
    frame_len: usize,
    frames: usize,
    measured_peaks: usize,
}

#[derive(Serialize)]
struct SimulationSummary {
    engine: String,
    strides: Vec<usize>,
    input_rate: f64,
    output_rate: f64,
    seed: u64,
    predicted_peaks: usize,
    predicted_spacing_hz: Option<f64>,
    stages: Vec<StageSummary>,
}

fn prev_pow2(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

fn standardized(signal: &Signal, offset: f64) -> Result<Signal> {
    let mean = signal.mean();
    let n = signal.len() as f64;
    let sd = (signal
        .samples()
        .iter()
        .map(|v| (v - mean).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    Ok(Signal::new(
        signal
            .samples()
            .iter()
            .map(|v| (v - mean) / sd + offset)
            .collect(),
        signal.sample_rate(),
    )?)
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = match (&a.config, &a.preset) {
        (Some(path), _) => {
            require(path)?;
            StackConfig::load(path).map_err(usage)?
        }
        (None, Some(name)) => {
            let p = presets::get(name)?;
            let total: usize = p.strides.iter().product();
            StackConfig::from_strides(&p.strides, p.sample_rate / total as f64, a.seed)
        }
        (None, None) => return Err(usage("give --config or --preset")),
    };
    let stack = cfg.build()?;
    let engine = EngineRegistry::with_defaults().get(&a.engine)?;
    let strides = stack.strides();
    let total = stack.total_stride();
    if !a.frame_len.is_power_of_two() || a.frame_len < 2 * total {
        return Err(usage(format!(
            "frame length must be a power of two of at least {} for this stack",
            2 * total
        )));
    }
    if a.frames == 0 {
        return Err(usage("--frames must be at least 1"));
    }
    let latent_len = (a.frames * a.frame_len).div_ceil(total);
    let latent = if a.latent == "noise" {
        noise_latent(latent_len, stack.input_rate(), a.latent_offset, a.seed)?
    } else {
        let path = Path::new(&a.latent);
        require(path)?;
        let src = standardized(
            &resample(&read_wav(path)?, stack.input_rate())?,
            a.latent_offset,
        )?;
        let x = src.samples();
        Signal::new(
            (0..latent_len).map(|i| x[i % x.len()]).collect(),
            stack.input_rate(),
        )?
    };
    info!(
        "running {} layers with the {} engine on {} latent samples",
        strides.len(),
        engine.name(),
        latent.len()
    );
    let run = run_stack(&latent, &stack, engine.as_ref(), true)?;

    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut stages = Vec::new();
    let mut cumulative = 1;
    for (i, stage) in run.stages.iter().enumerate() {
        if i > 0 {
            cumulative *= strides[i - 1];
        }
        let frame = prev_pow2(a.frame_len / (total / cumulative)).max(2);
        let avg = average_frame_spectrum(stage, frame)?;
        let peak = avg.iter().cloned().fold(0.0, f64::max);
        let rel: Vec<f64> = avg
            .iter()
            .map(|v| if peak > 0.0 { v / peak } else { *v })
            .collect();
        let log = log_magnitude(&rel, DEFAULT_EPSILON)?;
        let measured =
            measure_peaks_mirrored(&log, default_min_prominence(&log), Some(5), true, true);
        let name = format!("layer_{i}.csv");
        let mut csv = String::from("bin_hz,log_magnitude,layer_index\n");
        for (m, v) in log.iter().enumerate() {
            writeln!(
                csv,
                "{},{v},{i}",
                m as f64 * stage.sample_rate() / frame as f64
            )?;
        }
        let path = a.out.join(&name);
        std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
        stages.push(StageSummary {
            layer_index: i,
            file: name,
            sample_rate: stage.sample_rate(),
            frame_len: frame,
            frames: stage.len() / frame,
            measured_peaks: measured.len(),
        });
    }
    let pred = predict(&strides, Some(stack.output_rate()))?;
    let summary = SimulationSummary {
        engine: engine.name().to_string(),
        strides,
        input_rate: stack.input_rate(),
        output_rate: stack.output_rate(),
        seed: a.seed,
        predicted_peaks: pred.peak_count,
        predicted_spacing_hz: pred.spacing_hz,
        stages,
    };
    let text = json(&summary)?;
    std::fs::write(a.out.join("summary.json"), &text)?;
    emit(&text, None)
}

/// Fingerprints a WAV file, resampling to `rate` first when given.
fn fingerprint_file(
    path: &Path,
    config: Option<&FingerprintConfig>,
    rate: Option<f64>,
) -> Result<Fingerprint> {
    let mut audio = read_wav(path)?;
    if let Some(r) = rate {
        if audio.sample_rate() != r {
            info!(
                "resampling {} from {} Hz to {r} Hz",
                path.display(),
                audio.sample_rate()
            );
            audio = resample(&audio, r)?;
        }
    }
    let cfg = config
        .copied()
        .unwrap_or_else(|| FingerprintConfig::for_rate(audio.sample_rate()));
    extract_fingerprint(&audio, &cfg).with_context(|| format!("fingerprinting {}", path.display()))
}

pub fn fingerprint(a: FingerprintArgs) -> Result<()> {
    let cfg = load_fingerprint_config(a.config.as_deref())?;
    let items = audio_items(&a.input, &a.label)?;
    let fps = items
        .par_iter()
        .map(|item| fingerprint_file(&item.path, cfg.as_ref(), None))
        .collect::<Result<Vec<_>>>()?;
    let csv = a
        .out
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if csv {
        if fps.len() != 1 {
            return Err(usage(format!(
                "{} inputs cannot be written to one CSV; use a .jsonl output",
                fps.len()
            )));
        }
        write_fingerprint_csv(&a.out, &fps[0])?;
    } else {
        let records: Vec<FingerprintRecord> = items
            .iter()
            .zip(&fps)
            .map(|(item, fp)| {
                FingerprintRecord::new(item.path.display().to_string(), item.label.clone(), fp)
            })
            .collect();
        write_records(&a.out, &records)?;
    }
    info!("wrote {} fingerprints to {}", fps.len(), a.out.display());
    Ok(())
}

/// Fingerprints with their source paths.
type Dataset = Vec<(String, LabeledFingerprint)>;

fn labeled_from_records(records: Vec<FingerprintRecord>) -> Result<Dataset> {
    records
        .into_iter()
        .map(|r| {
            let fp = r
                .to_fingerprint(&FingerprintConfig::for_rate(r.sample_rate))
                .with_context(|| format!("record for {}", r.path))?;
            Ok((r.path, LabeledFingerprint::new(fp, r.label)))
        })
        .collect()
}

fn report_text(report: &EvalReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => json(report)?,
        Format::Csv => {
            let mut s = String::from("label,correct,total,accuracy\n");
            for (label, c) in &report.per_class {
                writeln!(s, "{label},{},{},{}", c.correct, c.total, c.accuracy)?;
            }
            let correct = report.confusion.true_positive + report.confusion.true_negative;
            writeln!(
                s,
                "overall,{correct},{},{}",
                report.total, report.overall_accuracy
            )?;
            s
        }
    })
}

pub fn train(a: TrainArgs, format: Format) -> Result<()> {
    require(&a.data)?;
    let records = try_records(&a.data)?
        .ok_or_else(|| usage(format!("{} holds no fingerprints", a.data.display())))?;
    let data: Vec<LabeledFingerprint> = labeled_from_records(records)?
        .into_iter()
        .map(|(_, d)| d)
        .collect();
    let tc = TrainConfig {
        learning_rate: a.lr,
        max_epochs: a.epochs,
        l2_lambda: a.l2,
        tolerance: a.tolerance,
        seed: a.seed,
    };
    tc.validate()?;
    let (train_idx, test_idx) = if a.holdout > 0.0 {
        let labels: Vec<&str> = data.iter().map(|d| d.label.as_str()).collect();
        stratified_split(&labels, a.holdout, a.seed)?
    } else {
        ((0..data.len()).collect(), Vec::new())
    };
    let train_set: Vec<LabeledFingerprint> = train_idx.iter().map(|&i| data[i].clone()).collect();
    let model = detector::train(&train_set, &tc)?;
    model.save(&a.out)?;
    info!(
        "trained on {} fingerprints, model written to {}",
        train_set.len(),
        a.out.display()
    );
    if !test_idx.is_empty() {
        let test_set: Vec<LabeledFingerprint> = test_idx.iter().map(|&i| data[i].clone()).collect();
        let report = evaluate(&model, &test_set, detector::DEFAULT_THRESHOLD)?;
        emit(&report_text(&report, format)?, a.report.as_deref())?;
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<LinearModel> {
    require(path)?;
    LinearModel::load(path).map_err(usage)
}

/// Labelled fingerprints from fingerprint records, or from the audio files
/// of a manifest, directory or single WAV fingerprinted for `model`.
fn dataset_for(model: &LinearModel, input: &Path) -> Result<Dataset> {
    require(input)?;
    if is_jsonl(input) {
        if let Some(records) = try_records(input)? {
            return labeled_from_records(records);
        }
    }
    let items = audio_items(input, "unlabeled")?;
    items
        .par_iter()
        .map(|item| {
            let fp = fingerprint_file(&item.path, Some(&model.config), Some(model.sample_rate))?;
            Ok((
                item.path.display().to_string(),
                LabeledFingerprint::new(fp, item.label.clone()),
            ))
        })
        .collect()
}

#[derive(Serialize)]
struct Classification {
    path: String,
    label: String,
    probability: f64,
    predicted: &'static str,
}

#[derive(Serialize)]
struct ClassifyReport {
    threshold: f64,
    results: Vec<Classification>,
}

pub fn classify(a: ClassifyArgs, format: Format) -> Result<()> {
    let model = load_model(&a.model)?;
    let data = dataset_for(&model, &a.input)?;
    let probs = data
        .par_iter()
        .map(|(_, d)| detector::predict(&model, &d.fingerprint))
        .collect::<peakprint::Result<Vec<f64>>>()?;
    let results: Vec<Classification> = data
        .into_iter()
        .zip(probs)
        .map(|((path, d), p)| Classification {
            path,
            label: d.label,
            probability: p,
            predicted: if p >= a.threshold {
                "synthetic"
            } else {
                REAL_LABEL
            },
        })
        .collect();
    let text = match format {
        Format::Json => json(&ClassifyReport {
            threshold: a.threshold,
            results,
        })?,
        Format::Csv => {
            let mut s = String::from("path,label,probability,predicted\n");
            for r in &results {
                writeln!(
                    s,
                    "{},{},{},{}",
                    r.path, r.label, r.probability, r.predicted
                )?;
            }
            s
        }
    };
    emit(&text, a.out.as_deref())
}

pub fn eval(a: EvalArgs, format: Format) -> Result<()> {
    if a.breakdown_by != "label" {
        return Err(usage(format!(
            "cannot break down by {:?}; only \"label\" is supported",
            a.breakdown_by
        )));
    }
    let model = load_model(&a.model)?;
    let data: Vec<LabeledFingerprint> = dataset_for(&model, &a.data)?
        .into_iter()
        .map(|(_, d)| d)
        .collect();
    let report = evaluate(&model, &data, a.threshold)?;
    emit(&report_text(&report, format)?, a.out.as_deref())
}

#[derive(Serialize)]
struct GenSummary {
    manifest: String,
    files: usize,
}

pub fn gen_data(a: GenDataArgs) -> Result<()> {
    require(&a.spec)?;
    let spec = SynthSpec::load(&a.spec).map_err(usage)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let entries = generate_synth_dataset(&spec, &a.out)?;
    emit(
        &json(&GenSummary {
            manifest: a.out.join("manifest.jsonl").display().to_string(),
            files: entries.len(),
        })?,
        None,
    )
}

pub fn export_weights(a: ExportWeightsArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    detector::export_weights(&model, &a.out)?;
    Ok(())
}
