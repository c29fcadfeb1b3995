//! Frame-wise wind-noise activity detectors.
//!
//! The soft power-ratio detector averages the measured difference-to-sum
//! ratio over a frequency band; the competing detector averages
//! `1 - MSC` over the same band. Both become hard decisions through a
//! strict threshold comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{band_bins, Band, FramePair, PsdState, Stft, StftConfig, TwoChannel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Lower and upper band edge in Hz.
    pub band_hz: (f64, f64),
    pub threshold: f64,
    /// Clip each bin's power ratio to `[0, 1]` before averaging.
    pub clamp_soft: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            band_hz: (0.0, 500.0),
            threshold: 0.5,
            clamp_soft: true,
        }
    }
}

impl DetectorConfig {
    /// Checks the threshold and resolves the band against an STFT grid.
    pub fn resolve(&self, stft: &StftConfig) -> Result<Band> {
        check_threshold(self.threshold)?;
        band_bins(stft, self.band_hz.0, self.band_hz.1)
    }
}

pub(crate) fn check_threshold(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::parameter(
            "threshold",
            format!("must lie in [0, 1], got {theta}"),
        ))
    }
}

/// Band average of the measured power ratio. `None` when every bin in the
/// band is undefined (digital silence).
pub fn soft_pr(state: &PsdState, band: &Band, clamp: bool) -> Option<f64> {
    let floor = state.floor();
    band_mean(band.iter().filter_map(|k| {
        state
            .power_ratio_with_floor(k, floor)
            .map(|pr| if clamp { pr.clamp(0.0, 1.0) } else { pr })
    }))
}

/// `1 -` band average of the measured magnitude squared coherence.
pub fn soft_msc(state: &PsdState, band: &Band) -> Option<f64> {
    let floor = state.floor();
    band_mean(band.iter().filter_map(|k| state.msc_with_floor(k, floor))).map(|m| 1.0 - m)
}

fn band_mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Hard decision: wind iff `soft > theta`.
#[inline]
pub fn hard(soft: f64, theta: f64) -> bool {
    soft > theta
}

/// Hard decision for a possibly undecided frame; no decision means no wind.
#[inline]
pub fn decide(soft: Option<f64>, theta: f64) -> bool {
    soft.is_some_and(|s| hard(s, theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub frame_index: usize,
    pub time_s: f64,
    /// Soft power-ratio score as configured (clamped or not).
    pub soft_pr: Option<f64>,
    /// Soft power-ratio score without per-bin clipping.
    pub soft_pr_unclamped: Option<f64>,
    pub soft_msc: Option<f64>,
    pub hard_pr: bool,
    pub hard_msc: bool,
}

/// Runs both detectors over one recursively smoothed PSD stream.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectorConfig,
    stft: StftConfig,
    band: Band,
    smoothing: f64,
}

impl Detector {
    pub fn new(config: DetectorConfig, stft: StftConfig, smoothing: f64) -> Result<Self> {
        let band = config.resolve(&stft)?;
        // validates the smoothing constant
        PsdState::new(0, smoothing)?;
        Ok(Self {
            config,
            stft,
            band,
            smoothing,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn band(&self) -> &Band {
        &self.band
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn score_signal(&self, signal: &TwoChannel) -> Result<Vec<FrameScore>> {
        let frames = Stft::new(self.stft).frames(signal).frames;
        self.score_frames(&frames)
    }

    /// Scores frames in order; the PR and MSC detectors read the same state.
    pub fn score_frames(&self, frames: &[FramePair]) -> Result<Vec<FrameScore>> {
        let mut state = PsdState::new(self.stft.num_bins(), self.smoothing)?;
        let theta = self.config.threshold;
        frames
            .iter()
            .map(|frame| {
                state.update(frame)?;
                let raw = soft_pr(&state, &self.band, false);
                let pr = if self.config.clamp_soft {
                    soft_pr(&state, &self.band, true)
                } else {
                    raw
                };
                let msc = soft_msc(&state, &self.band);
                Ok(FrameScore {
                    frame_index: frame.index,
                    time_s: self.stft.frame_time(frame.index),
                    soft_pr: pr,
                    soft_pr_unclamped: raw,
                    soft_msc: msc,
                    hard_pr: decide(pr, theta),
                    hard_msc: decide(msc, theta),
                })
            })
            .collect()
    }
}
