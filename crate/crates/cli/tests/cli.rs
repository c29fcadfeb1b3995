use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn windpr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_windpr"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

/// Data rows of a CSV written by the tool, after the config and header lines.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn write_wav(path: &Path, channels: u16, samples: &[i16]) {
    let spec = hound::WavSpec {
        channels,
        sample_rate: 16_000,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for s in samples {
        w.write_sample(*s).unwrap();
    }
    w.finalize().unwrap();
}

#[test]
fn theory_panels() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let a = windpr(p, &["theory", "--wind-doa-deg", "90", "--f-max-hz", "1000", "-o", "a.csv"]);
    assert_eq!(code(&a), 0);
    let a = rows(&p.join("a.csv"));
    assert_eq!(a.len(), 1001);
    let wind: Vec<f64> = a.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(wind.windows(2).all(|w| w[1] > w[0]));
    assert!(a.iter().all(|r| r[2].parse::<f64>().unwrap() < 2e-3));

    let b = windpr(
        p,
        &["theory", "--mic-distance-m", "0.02", "--wind-speed-ms", "2.8", "--f-max-hz", "1000", "-o", "b.csv"],
    );
    assert_eq!(code(&b), 0);
    assert!(rows(&p.join("b.csv")).iter().any(|r| r[1].parse::<f64>().unwrap() > 1.0));
}

#[test]
fn theory_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&windpr(p, &["theory", "--f-min-hz", "10", "--f-max-hz", "5", "-o", "x.csv"])), 2);
    assert_eq!(code(&windpr(p, &["theory", "--mic-distance-m", "0", "-o", "x.csv"])), 2);
    assert_eq!(code(&windpr(p, &["theory"])), 2);
    assert!(!p.join("x.csv").exists());
}

#[test]
fn synth_sequence_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = windpr(p, &["synth", "--segment-s", "2", "-o", "seq.wav"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = hound::WavReader::open(p.join("seq.wav")).unwrap();
    assert_eq!((r.spec().channels, r.spec().sample_rate), (2, 16_000));
    assert_eq!(r.duration(), 160_000);
    let labels: Vec<u8> = rows(&p.join("seq.labels.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    // (160000 - 2048) / 512 + 1
    assert_eq!(labels.len(), 309);
    let mut runs = vec![labels[0]];
    for l in &labels {
        if runs.last() != Some(l) {
            runs.push(*l);
        }
    }
    // the wind and first mixture segment merge into one run of ones
    assert_eq!(runs, [0, 1, 0, 1]);
}

#[test]
fn synth_rejects_negative_duration() {
    let dir = tempfile::tempdir().unwrap();
    let o = windpr(dir.path(), &["synth", "--kind", "noise", "--duration-s", "-2", "-o", "n.wav"]);
    assert_eq!(code(&o), 2);
    let o = windpr(dir.path(), &["synth", "--segment-s", "-1", "-o", "n.wav"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn detect_pure_wind_fires() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for enc in ["pcm16", "float32"] {
        let wav = format!("wind_{enc}.wav");
        let out = format!("wind_{enc}.csv");
        assert_eq!(
            code(&windpr(p, &["synth", "--kind", "noise", "--duration-s", "5", "--encoding", enc, "-o", &wav])),
            0
        );
        assert_eq!(code(&windpr(p, &["detect", &wav, "-o", &out])), 0);
        let r = rows(&p.join(&out));
        let fired = r.iter().filter(|r| r[3] == "1").count();
        assert!(2 * fired > r.len(), "{enc}: {fired}/{}", r.len());
    }
}

#[test]
fn detect_silence_never_fires() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_wav(&p.join("quiet.wav"), 2, &vec![0; 2 * 16_000]);
    assert_eq!(code(&windpr(p, &["detect", "quiet.wav", "-o", "q.csv"])), 0);
    let r = rows(&p.join("q.csv"));
    assert!(!r.is_empty());
    for row in r {
        assert_eq!((row[2].as_str(), row[3].as_str(), row[4].as_str(), row[5].as_str()), ("", "0", "", "0"));
    }
}

#[test]
fn detect_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_wav(&p.join("mono.wav"), 1, &vec![100; 16_000]);
    assert_eq!(code(&windpr(p, &["detect", "mono.wav", "-o", "x.csv"])), 2);
    write_wav(&p.join("ok.wav"), 2, &vec![100; 8_000]);
    let bytes = fs::read(p.join("ok.wav")).unwrap();
    fs::write(p.join("trunc.wav"), &bytes[..20]).unwrap();
    assert_eq!(code(&windpr(p, &["detect", "trunc.wav", "-o", "x.csv"])), 3);
    assert_eq!(code(&windpr(p, &["detect", "missing.wav", "-o", "x.csv"])), 3);

    let spec = hound::WavSpec {
        channels: 2,
        sample_rate: 16_000,
        bits_per_sample: 24,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(p.join("deep.wav"), spec).unwrap();
    for _ in 0..8_000 {
        w.write_sample(1000i32).unwrap();
    }
    w.finalize().unwrap();
    assert_eq!(code(&windpr(p, &["detect", "deep.wav", "-o", "x.csv"])), 4);
    assert_eq!(code(&windpr(p, &["detect", "ok.wav", "--band-hz", "300:100", "-o", "x.csv"])), 2);
}

#[test]
fn roc_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let args = ["roc", "--trials", "1", "--segment-s", "2", "--seed", "3", "-o", "r.csv", "--summary", "r.json"];
    assert_eq!(code(&windpr(p, &args)), 0);
    let first = fs::read(p.join("r.csv")).unwrap();
    assert_eq!(code(&windpr(p, &args)), 0);
    assert_eq!(first, fs::read(p.join("r.csv")).unwrap());
    let r = rows(&p.join("r.csv"));
    assert_eq!(r.len(), 20);
    assert_eq!(r[0][0], "0");
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(p.join("r.json")).unwrap()).unwrap();
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 1);
    assert!(summary["auc_pr"].as_f64().unwrap() > 0.5);
    assert_eq!(summary["config"]["trials"], 1);
}

#[test]
fn roc_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let base = ["roc", "-o", "r.csv", "--summary", "r.json"];
    let with = |extra: &[&'static str]| [&base[..], extra].concat();
    assert_eq!(code(&windpr(p, &with(&["--band-hz", "200:200"]))), 2);
    assert_eq!(code(&windpr(p, &with(&["--trials", "0"]))), 2);
    fs::create_dir(p.join("empty")).unwrap();
    assert_eq!(code(&windpr(p, &with(&["--speech-dir", "empty"]))), 2);
}

#[test]
fn roc_with_speech_directory() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::create_dir(p.join("speech")).unwrap();
    for (i, f) in [180.0, 240.0].iter().enumerate() {
        let s: Vec<i16> = (0..40_000)
            .map(|n| {
                let t = n as f64 / 16_000.0;
                let env = (t * 3.0 * std::f64::consts::TAU).sin().max(0.0);
                (8000.0 * env * (std::f64::consts::TAU * f * t).sin()) as i16
            })
            .collect();
        write_wav(&p.join(format!("speech/clip{i}.wav")), 1, &s);
    }
    let o = windpr(
        p,
        &["roc", "--trials", "2", "--segment-s", "2", "--speech-dir", "speech", "-o", "r.csv", "--summary", "r.json"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(p.join("r.json")).unwrap()).unwrap();
    assert_eq!(summary["speech_clips"], serde_json::json!(["clip0.wav", "clip1.wav"]));
}
