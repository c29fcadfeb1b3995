use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use windpr::corcos::{CorcosParams, SpeechGeometry, DEFAULT_ALPHA1, DEFAULT_ALPHA2, SPEED_OF_SOUND};
use windpr::detector::DetectorConfig;
use windpr::spectral::StftConfig;

use crate::error::{CliError, CliResult};
use crate::wav::Encoding;

#[derive(Debug, Parser)]
#[command(name = "windpr", version, about = "Dual-microphone wind-noise power-ratio analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Theoretical wind and speech power ratios over a frequency grid.
    Theory(TheoryArgs),
    /// Synthesize a labelled speech/wind sequence or plain wind noise.
    Synth(SynthArgs),
    /// Frame-wise PR and MSC detector scores for a two-channel WAV file.
    Detect(DetectArgs),
    /// Multi-trial ROC comparison of the PR and MSC detectors.
    Roc(RocArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WindArgs {
    /// Microphone spacing in meters.
    #[arg(long, default_value_t = 0.004)]
    pub mic_distance_m: f64,
    /// Wind direction relative to the microphone axis, in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub wind_doa_deg: f64,
    /// Free-field wind speed in m/s.
    #[arg(long, default_value_t = 1.8)]
    pub wind_speed_ms: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA1)]
    pub alpha1: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA2)]
    pub alpha2: f64,
    #[arg(long, default_value_t = SPEED_OF_SOUND)]
    pub speed_of_sound: f64,
}

impl WindArgs {
    pub fn corcos(&self) -> CliResult<CorcosParams> {
        Ok(CorcosParams::with_decay(
            self.mic_distance_m,
            self.wind_doa_deg.to_radians(),
            self.wind_speed_ms,
            self.alpha1,
            self.alpha2,
        )?)
    }

    pub fn speech(&self, speech_doa_deg: f64) -> CliResult<SpeechGeometry> {
        Ok(SpeechGeometry::with_speed_of_sound(
            self.mic_distance_m,
            speech_doa_deg.to_radians(),
            self.speed_of_sound,
        )?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StftArgs {
    /// Frame length in milliseconds.
    #[arg(long, default_value_t = 128.0)]
    pub frame_ms: f64,
    /// Fractional frame overlap in [0, 1).
    #[arg(long, default_value_t = 0.75)]
    pub overlap: f64,
    /// Recursive PSD smoothing constant in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub smoothing: f64,
}

impl StftArgs {
    pub fn config(&self, sample_rate: u32) -> CliResult<StftConfig> {
        Ok(StftConfig::from_duration(sample_rate, self.frame_ms, self.overlap)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectorArgs {
    /// Analysis band as LO:HI in Hz.
    #[arg(long, default_value = "0:500", value_parser = parse_band)]
    pub band_hz: (f64, f64),
    /// Hard-decision threshold in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Average raw per-bin ratios instead of clipping them to [0, 1].
    #[arg(long)]
    pub no_clamp: bool,
}

impl DetectorArgs {
    pub fn config(&self) -> DetectorConfig {
        DetectorConfig {
            band_hz: self.band_hz,
            threshold: self.threshold,
            clamp_soft: !self.no_clamp,
        }
    }
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

#[derive(Debug, Args, Serialize)]
pub struct TheoryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub wind: WindArgs,
    /// Speech direction relative to the microphone axis, in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub speech_doa_deg: f64,
    #[arg(long, default_value_t = 0.0)]
    pub f_min_hz: f64,
    #[arg(long, default_value_t = 8000.0)]
    pub f_max_hz: f64,
    #[arg(long, default_value_t = 1.0)]
    pub f_step_hz: f64,
    /// Output CSV.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: PathBuf,
}

impl TheoryArgs {
    pub fn grid(&self) -> CliResult<Vec<f64>> {
        let (lo, hi, step) = (self.f_min_hz, self.f_max_hz, self.f_step_hz);
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || lo < 0.0 || step <= 0.0 {
            return Err(CliError::Usage(
                "frequency grid needs finite f-min >= 0 and f-step > 0".into(),
            ));
        }
        if hi < lo {
            return Err(CliError::Usage(format!("empty frequency grid: f-max {hi} < f-min {lo}")));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| lo + i as f64 * step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// Speech / wind / mixture / speech / mixture.
    Sequence,
    /// Wind noise only.
    Noise,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::Sequence)]
    pub kind: SynthKind,
    #[command(flatten)]
    #[serde(flatten)]
    pub wind: WindArgs,
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    pub speech_doa_deg: f64,
    /// Length of each sequence segment in seconds.
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub segment_s: f64,
    /// Noise length in seconds (noise kind only).
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub duration_s: f64,
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub isnr_db: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 16_000)]
    pub sample_rate: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub stft: StftArgs,
    /// Mono speech WAV; a synthetic surrogate is used when absent.
    #[arg(long)]
    pub speech_wav: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Encoding::Pcm16)]
    pub encoding: Encoding,
    /// Output WAV.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: PathBuf,
    /// Label CSV; defaults to the output path with a `.labels.csv` suffix.
    #[arg(long)]
    #[serde(skip)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DetectArgs {
    /// Two-channel input WAV.
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub stft: StftArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorArgs,
    /// Output CSV.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RocArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub wind: WindArgs,
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    pub speech_doa_deg: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub segment_s: f64,
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub isnr_db: f64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of thresholds i/N for i in 0..N.
    #[arg(long, default_value_t = 20)]
    pub thresholds: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub stft: StftArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorArgs,
    /// Directory of mono 16 kHz speech WAVs; a synthetic surrogate is used when absent.
    #[arg(long)]
    pub speech_dir: Option<PathBuf>,
    /// Output ROC CSV.
    #[arg(short, long)]
    #[serde(skip)]
    pub output: PathBuf,
    /// Output JSON summary.
    #[arg(long)]
    #[serde(skip)]
    pub summary: PathBuf,
}
