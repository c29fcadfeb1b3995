use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use windpr::detector::Detector;
use windpr::evaluation::{interpolate_tpr, run_trials, threshold_grid, trial_seeds, Protocol, SpeechPool};
use windpr::synthesis::{build_sequence, gen_coherent_noise, synthetic_speech, NoiseSpec, SequenceSpec};

use crate::args::{RocArgs, SynthArgs, SynthKind, TheoryArgs, DetectArgs};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt, write_json, Csv};
use crate::wav;

/// Sample rate of every synthesized trial in the ROC protocol.
const ROC_SAMPLE_RATE: u32 = 16_000;

pub fn theory(args: &TheoryArgs) -> CliResult<()> {
    let wind = args.wind.corcos()?;
    let speech = args.wind.speech(args.speech_doa_deg)?;
    let grid = args.grid()?;
    let mut csv = Csv::new(args, &["frequency_hz", "pr_wind", "pr_speech"])?;
    for f in grid {
        let w = std::f64::consts::TAU * f;
        csv.row(&[num(f), num(wind.pr_wind(w)), num(speech.pr_speech(w))]);
    }
    csv.write(&args.output)
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let stft = args.stft.config(args.sample_rate)?;
    let corcos = args.wind.corcos()?;
    let (signal, labels) = match args.kind {
        SynthKind::Noise => {
            let x = gen_coherent_noise(&NoiseSpec::new(corcos, args.duration_s, args.seed)?, &stft)?;
            let frames = stft.frame_count(x.len());
            (x, vec![1u8; frames])
        }
        SynthKind::Sequence => {
            let mut spec = SequenceSpec::protocol(args.segment_s, args.seed)?;
            spec.corcos = corcos;
            spec.speech_geometry = args.wind.speech(args.speech_doa_deg)?;
            spec.isnr_db = args.isnr_db;
            let speech = match &args.speech_wav {
                Some(path) => load_mono(path, args.sample_rate)?,
                None => synthetic_speech(spec.speech_duration_s(), args.sample_rate, args.seed)?,
            };
            let seq = build_sequence(&spec, &speech, &stft)?;
            (seq.signal, seq.labels)
        }
    };
    wav::write_stereo(&args.output, &signal, args.sample_rate, args.encoding)?;
    let label_path = args.labels.clone().unwrap_or_else(|| sidecar(&args.output));
    let mut csv = Csv::new(args, &["frame_index", "label"])?;
    for (l, v) in labels.iter().enumerate() {
        csv.row(&[l.to_string(), v.to_string()]);
    }
    csv.write(&label_path)
}

fn sidecar(wav: &Path) -> PathBuf {
    let mut name = wav.file_stem().unwrap_or_default().to_os_string();
    name.push(".labels.csv");
    wav.with_file_name(name)
}

fn load_mono(path: &Path, sample_rate: u32) -> CliResult<Vec<f64>> {
    let audio = wav::read(path)?;
    if audio.sample_rate != sample_rate {
        return Err(CliError::Usage(format!(
            "{}: sample rate {} Hz, expected {sample_rate} Hz",
            path.display(),
            audio.sample_rate
        )));
    }
    Ok(audio.channels.into_iter().next().unwrap_or_default())
}

pub fn detect(args: &DetectArgs) -> CliResult<()> {
    let (rate, signal) = wav::read_stereo(&args.input)?;
    let stft = args.stft.config(rate)?;
    let detector = Detector::new(args.detector.config(), stft, args.stft.smoothing)?;
    let scores = detector.score_signal(&signal)?;
    let mut csv = Csv::new(
        args,
        &["frame_index", "time_s", "soft_pr", "hard_pr", "soft_msc", "hard_msc"],
    )?;
    for s in scores {
        csv.row(&[
            s.frame_index.to_string(),
            num(s.time_s),
            opt(s.soft_pr),
            u8::from(s.hard_pr).to_string(),
            opt(s.soft_msc),
            u8::from(s.hard_msc).to_string(),
        ]);
    }
    csv.write(&args.output)
}

#[derive(Serialize)]
struct RocSummary<'a> {
    auc_pr: f64,
    auc_msc: f64,
    /// Largest shortfall of the PR curve below the MSC curve.
    max_tpr_deficit: f64,
    seeds: Vec<u64>,
    frames_wind: Vec<usize>,
    frames_speech: Vec<usize>,
    speech_clips: Vec<String>,
    config: &'a RocArgs,
}

pub fn roc(args: &RocArgs) -> CliResult<()> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if args.thresholds < 2 {
        return Err(CliError::Usage("--thresholds must be at least 2".into()));
    }
    let stft = args.stft.config(ROC_SAMPLE_RATE)?;
    let mut spec = SequenceSpec::protocol(args.segment_s, args.seed)?;
    spec.corcos = args.wind.corcos()?;
    spec.speech_geometry = args.wind.speech(args.speech_doa_deg)?;
    spec.isnr_db = args.isnr_db;
    let (pool, clip_names) = match &args.speech_dir {
        Some(dir) => speech_pool(dir)?,
        None => (SpeechPool::Synthetic, Vec::new()),
    };
    let protocol = Protocol {
        stft,
        smoothing: args.stft.smoothing,
        pr: args.detector.config(),
        msc: args.detector.config(),
        thresholds: threshold_grid(args.thresholds),
    };
    protocol.pr.resolve(&stft)?;
    let seeds = trial_seeds(args.seed, args.trials);
    let res = run_trials(&seeds, &spec, &pool, &protocol)?;

    let mut csv = Csv::new(args, &["theta", "fpr_pr", "tpr_pr", "fpr_msc", "tpr_msc"])?;
    for (p, m) in res.pr.iter().zip(&res.msc) {
        csv.row(&[
            num(p.theta),
            num(p.false_positive_rate),
            num(p.true_positive_rate),
            num(m.false_positive_rate),
            num(m.true_positive_rate),
        ]);
    }
    csv.write(&args.output)?;

    let max_tpr_deficit = (0..=100)
        .map(|i| {
            let x = i as f64 / 100.0;
            interpolate_tpr(&res.msc, x) - interpolate_tpr(&res.pr, x)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let summary = RocSummary {
        auc_pr: res.auc_pr,
        auc_msc: res.auc_msc,
        max_tpr_deficit,
        seeds,
        frames_wind: res.trials.iter().map(|t| t.m_w).collect(),
        frames_speech: res.trials.iter().map(|t| t.m_s).collect(),
        speech_clips: clip_names,
        config: args,
    };
    write_json(&args.summary, &summary)
}

fn speech_pool(dir: &Path) -> CliResult<(SpeechPool, Vec<String>)> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Usage(format!("{}: no .wav files in speech pool", dir.display())));
    }
    let clips = paths
        .iter()
        .map(|p| load_mono(p, ROC_SAMPLE_RATE))
        .collect::<CliResult<Vec<_>>>()?;
    let names = paths
        .iter()
        .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    Ok((SpeechPool::Clips(clips), names))
}

