//! STFT front-end and recursively smoothed periodogram estimates.
//!
//! Every frame contributes instantaneous periodograms of the two channels,
//! their cross spectrum, and the difference and sum signals. [`PsdState`]
//! smooths them with a first-order recursion `p ← β·p + (1-β)·periodogram`.

use std::f64::consts::TAU;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bins whose PSD falls below this fraction of the state's total power are
/// treated as undefined.
pub const PSD_FLOOR_REL: f64 = 1e-12;

/// Default recursive smoothing constant.
pub const DEFAULT_SMOOTHING: f64 = 0.5;

/// Two equally long sample streams, one per microphone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TwoChannel {
    pub ch1: Vec<f64>,
    pub ch2: Vec<f64>,
}

impl TwoChannel {
    pub fn new(ch1: Vec<f64>, ch2: Vec<f64>) -> Result<Self> {
        if ch1.len() != ch2.len() {
            return Err(Error::Contract(format!(
                "channel lengths differ: {} vs {}",
                ch1.len(),
                ch2.len()
            )));
        }
        Ok(Self { ch1, ch2 })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            ch1: vec![0.0; len],
            ch2: vec![0.0; len],
        }
    }

    /// Both channels carry the same signal.
    pub fn duplicate(mono: &[f64]) -> Self {
        Self {
            ch1: mono.to_vec(),
            ch2: mono.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.ch1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ch1.is_empty()
    }

    pub fn slice(&self, range: Range<usize>) -> TwoChannel {
        TwoChannel {
            ch1: self.ch1[range.clone()].to_vec(),
            ch2: self.ch2[range].to_vec(),
        }
    }

    pub fn append(&mut self, other: &TwoChannel) {
        self.ch1.extend_from_slice(&other.ch1);
        self.ch2.extend_from_slice(&other.ch2);
    }

    pub fn scaled(&self, gain: f64) -> TwoChannel {
        TwoChannel {
            ch1: self.ch1.iter().map(|x| x * gain).collect(),
            ch2: self.ch2.iter().map(|x| x * gain).collect(),
        }
    }

    /// Mean power of channel 1.
    pub fn power_ch1(&self) -> f64 {
        mean_power(&self.ch1)
    }
}

pub(crate) fn mean_power(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowKind {
    Hann,
}

impl WindowKind {
    /// Periodic window of length `len`.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * (TAU * n as f64 / len as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    sample_rate: u32,
    frame_len: usize,
    hop: usize,
    window: WindowKind,
}

impl Default for StftConfig {
    /// 16 kHz, 128 ms Hann frames, 75% overlap.
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            frame_len: 2048,
            hop: 512,
            window: WindowKind::Hann,
        }
    }
}

impl StftConfig {
    pub fn new(sample_rate: u32, frame_len: usize, hop: usize) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::parameter("sample_rate", "must be > 0"));
        }
        if frame_len < 2 {
            return Err(Error::parameter("frame_len", format!("must be >= 2, got {frame_len}")));
        }
        if hop == 0 || hop > frame_len {
            return Err(Error::parameter(
                "hop",
                format!("must satisfy 0 < hop <= frame_len ({frame_len}), got {hop}"),
            ));
        }
        Ok(Self {
            sample_rate,
            frame_len,
            hop,
            window: WindowKind::Hann,
        })
    }

    /// Frame length given in milliseconds, overlap as a fraction in `[0, 1)`.
    pub fn from_duration(sample_rate: u32, frame_ms: f64, overlap: f64) -> Result<Self> {
        if !(frame_ms.is_finite() && frame_ms > 0.0) {
            return Err(Error::parameter("frame_ms", format!("must be > 0, got {frame_ms}")));
        }
        if !(0.0..1.0).contains(&overlap) {
            return Err(Error::parameter("overlap", format!("must lie in [0, 1), got {overlap}")));
        }
        let frame_len = (sample_rate as f64 * frame_ms / 1000.0).round() as usize;
        let hop = ((frame_len as f64) * (1.0 - overlap)).round().max(1.0) as usize;
        Self::new(sample_rate, frame_len, hop)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window(&self) -> WindowKind {
        self.window
    }

    /// Transform size: the frame length zero-padded to a power of two.
    pub fn fft_len(&self) -> usize {
        self.frame_len.next_power_of_two()
    }

    /// Number of one-sided bins, DC through Nyquist.
    pub fn num_bins(&self) -> usize {
        self.fft_len() / 2 + 1
    }

    pub fn bin_spacing_hz(&self) -> f64 {
        self.sample_rate as f64 / self.fft_len() as f64
    }

    pub fn bin_frequency_hz(&self, k: usize) -> f64 {
        k as f64 * self.bin_spacing_hz()
    }

    /// Angular frequency of bin `k` in rad/s.
    pub fn bin_omega(&self, k: usize) -> f64 {
        TAU * self.bin_frequency_hz(k)
    }

    /// Number of complete frames in a signal of `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            (len - self.frame_len) / self.hop + 1
        }
    }

    /// Time in seconds of the start of frame `l`.
    pub fn frame_time(&self, l: usize) -> f64 {
        (l * self.hop) as f64 / self.sample_rate as f64
    }
}

/// One-sided spectra of both channels for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    pub index: usize,
    pub x1: Vec<Complex64>,
    pub x2: Vec<Complex64>,
}

impl FramePair {
    pub fn num_bins(&self) -> usize {
        self.x1.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameStatus {
    Ok,
    /// The input was shorter than one frame; no frames were produced.
    ShorterThanFrame,
}

#[derive(Debug, Clone)]
pub struct FrameSequence {
    pub frames: Vec<FramePair>,
    pub status: FrameStatus,
}

/// Reusable forward/inverse transform for one [`StftConfig`].
#[derive(Clone)]
pub struct Stft {
    config: StftConfig,
    fft_len: usize,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft").field("config", &self.config).finish()
    }
}

impl Stft {
    pub fn new(config: StftConfig) -> Self {
        Self::with_fft_len(config, config.fft_len())
    }

    /// Transform with extra zero-padding beyond the configured frame.
    pub(crate) fn with_fft_len(config: StftConfig, fft_len: usize) -> Self {
        assert!(fft_len >= config.frame_len(), "transform shorter than frame");
        let mut planner = FftPlanner::new();
        Self {
            window: config.window().coefficients(config.frame_len()),
            forward: planner.plan_fft_forward(fft_len),
            inverse: planner.plan_fft_inverse(fft_len),
            fft_len,
            config,
        }
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn num_bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    pub fn bin_omega(&self, k: usize) -> f64 {
        TAU * k as f64 * self.config.sample_rate() as f64 / self.fft_len as f64
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Windowed one-sided spectrum of `samples[start..start + frame_len]`.
    pub fn spectrum(&self, samples: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(samples.len(), self.config.frame_len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for ((b, s), w) in buf.iter_mut().zip(samples).zip(&self.window) {
            *b = Complex64::new(s * w, 0.0);
        }
        self.forward.process(&mut buf);
        buf.truncate(self.num_bins());
        buf
    }

    /// Real time-domain block from a one-sided spectrum (unnormalized
    /// inverse DFT divided by the transform size).
    pub fn inverse(&self, half: &[Complex64]) -> Vec<f64> {
        let n = self.fft_len;
        debug_assert_eq!(half.len(), self.num_bins());
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[..half.len()].copy_from_slice(half);
        // DC and Nyquist must be real for a real output
        buf[0].im = 0.0;
        if n % 2 == 0 {
            buf[n / 2].im = 0.0;
        }
        for k in 1..n.div_ceil(2) {
            buf[n - k] = half[k].conj();
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    pub fn frames(&self, signal: &TwoChannel) -> FrameSequence {
        let cfg = &self.config;
        let count = cfg.frame_count(signal.len());
        if count == 0 {
            return FrameSequence {
                frames: Vec::new(),
                status: FrameStatus::ShorterThanFrame,
            };
        }
        let frames = (0..count)
            .map(|l| {
                let start = l * cfg.hop();
                let span = start..start + cfg.frame_len();
                FramePair {
                    index: l,
                    x1: self.spectrum(&signal.ch1[span.clone()]),
                    x2: self.spectrum(&signal.ch2[span]),
                }
            })
            .collect();
        FrameSequence {
            frames,
            status: FrameStatus::Ok,
        }
    }
}

/// Splits a two-channel signal into windowed spectra.
pub fn stft_frames(signal: &TwoChannel, config: &StftConfig) -> FrameSequence {
    Stft::new(*config).frames(signal)
}

/// Recursively smoothed auto, cross, difference and sum PSDs per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdState {
    beta: f64,
    updates: usize,
    phi_diff: Vec<f64>,
    phi_sum: Vec<f64>,
    phi_11: Vec<f64>,
    phi_22: Vec<f64>,
    phi_12: Vec<Complex64>,
}

impl PsdState {
    pub fn new(num_bins: usize, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::parameter("smoothing", format!("must lie in [0, 1), got {beta}")));
        }
        Ok(Self {
            beta,
            updates: 0,
            phi_diff: vec![0.0; num_bins],
            phi_sum: vec![0.0; num_bins],
            phi_11: vec![0.0; num_bins],
            phi_22: vec![0.0; num_bins],
            phi_12: vec![Complex64::new(0.0, 0.0); num_bins],
        })
    }

    /// Folds one frame into the estimates. The first frame initializes the
    /// state with its instantaneous periodograms.
    pub fn update(&mut self, frame: &FramePair) -> Result<()> {
        let bins = self.num_bins();
        if frame.x1.len() != bins || frame.x2.len() != bins {
            return Err(Error::Contract(format!(
                "frame has {}/{} bins, state has {bins}",
                frame.x1.len(),
                frame.x2.len()
            )));
        }
        let (keep, take) = if self.updates == 0 {
            (0.0, 1.0)
        } else {
            (self.beta, 1.0 - self.beta)
        };
        for k in 0..bins {
            let a = frame.x1[k];
            let b = frame.x2[k];
            let diff = a - b;
            let sum = a + b;
            self.phi_diff[k] = keep * self.phi_diff[k] + take * diff.norm_sqr();
            self.phi_sum[k] = keep * self.phi_sum[k] + take * sum.norm_sqr();
            self.phi_11[k] = keep * self.phi_11[k] + take * a.norm_sqr();
            self.phi_22[k] = keep * self.phi_22[k] + take * b.norm_sqr();
            self.phi_12[k] = self.phi_12[k] * keep + a * b.conj() * take;
        }
        self.updates += 1;
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn num_bins(&self) -> usize {
        self.phi_11.len()
    }

    /// Number of frames folded in so far.
    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn phi_diff(&self) -> &[f64] {
        &self.phi_diff
    }

    pub fn phi_sum(&self) -> &[f64] {
        &self.phi_sum
    }

    pub fn phi_11(&self) -> &[f64] {
        &self.phi_11
    }

    pub fn phi_22(&self) -> &[f64] {
        &self.phi_22
    }

    pub fn phi_12(&self) -> &[Complex64] {
        &self.phi_12
    }

    /// Absolute floor below which a bin PSD counts as undefined.
    pub fn floor(&self) -> f64 {
        let total: f64 = self
            .phi_11
            .iter()
            .zip(&self.phi_22)
            .map(|(a, b)| a + b)
            .sum();
        PSD_FLOOR_REL * total
    }

    fn defined(&self, value: f64, floor: f64) -> bool {
        self.updates > 0 && value > floor
    }

    /// Measured difference-to-sum power ratio, `None` for an undefined bin.
    pub fn power_ratio(&self, k: usize) -> Option<f64> {
        self.power_ratio_with_floor(k, self.floor())
    }

    pub(crate) fn power_ratio_with_floor(&self, k: usize, floor: f64) -> Option<f64> {
        let sum = self.phi_sum[k];
        self.defined(sum, floor).then(|| self.phi_diff[k] / sum)
    }

    /// Measured magnitude squared coherence, `None` for an undefined bin.
    pub fn msc(&self, k: usize) -> Option<f64> {
        self.msc_with_floor(k, self.floor())
    }

    pub(crate) fn msc_with_floor(&self, k: usize, floor: f64) -> Option<f64> {
        let (p11, p22) = (self.phi_11[k], self.phi_22[k]);
        (self.defined(p11, floor) && self.defined(p22, floor))
            .then(|| self.phi_12[k].norm_sqr() / (p11 * p22))
    }

    /// Measured complex coherence `Φ12 / sqrt(Φ11·Φ22)`.
    pub fn coherence(&self, k: usize) -> Option<Complex64> {
        let floor = self.floor();
        let (p11, p22) = (self.phi_11[k], self.phi_22[k]);
        (self.defined(p11, floor) && self.defined(p22, floor))
            .then(|| self.phi_12[k] / (p11 * p22).sqrt())
    }
}

/// Contiguous range of STFT bins used for band averages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    pub bins: Range<usize>,
}

impl Band {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn iter(&self) -> Range<usize> {
        self.bins.clone()
    }
}

/// Bins whose center frequency lies in `[f_lo, f_hi]`, never including DC.
pub fn band_bins(config: &StftConfig, f_lo: f64, f_hi: f64) -> Result<Band> {
    let nyquist = config.sample_rate() as f64 / 2.0;
    if !(f_lo >= 0.0 && f_lo < f_hi && f_hi <= nyquist) {
        return Err(Error::Config(format!(
            "band [{f_lo}, {f_hi}] Hz must satisfy 0 <= lo < hi <= {nyquist}"
        )));
    }
    let df = config.bin_spacing_hz();
    // tolerate rounding on exact bin-center edges
    let lo = ((f_lo / df) - 1e-9).ceil().max(1.0) as usize;
    let hi = (((f_hi / df) + 1e-9).floor() as usize).min(config.num_bins() - 1);
    if lo > hi {
        return Err(Error::Config(format!(
            "band [{f_lo}, {f_hi}] Hz contains no non-DC bin (spacing {df} Hz)"
        )));
    }
    Ok(Band { bins: lo..hi + 1 })
}

/// Long-run spectra accumulated over a stream of smoothed PSD states.
///
/// Sums every state snapshot, so the result tracks the frame average of the
/// periodograms regardless of the smoothing constant.
#[derive(Debug, Clone)]
pub struct LongRunPsd {
    state: PsdState,
    frames: usize,
    phi_diff: Vec<f64>,
    phi_sum: Vec<f64>,
    phi_11: Vec<f64>,
    phi_22: Vec<f64>,
    phi_12: Vec<Complex64>,
}

impl LongRunPsd {
    pub fn new(num_bins: usize, beta: f64) -> Result<Self> {
        Ok(Self {
            state: PsdState::new(num_bins, beta)?,
            frames: 0,
            phi_diff: vec![0.0; num_bins],
            phi_sum: vec![0.0; num_bins],
            phi_11: vec![0.0; num_bins],
            phi_22: vec![0.0; num_bins],
            phi_12: vec![Complex64::new(0.0, 0.0); num_bins],
        })
    }

    pub fn from_frames(frames: &[FramePair], num_bins: usize, beta: f64) -> Result<Self> {
        let mut acc = Self::new(num_bins, beta)?;
        for f in frames {
            acc.update(f)?;
        }
        Ok(acc)
    }

    pub fn update(&mut self, frame: &FramePair) -> Result<()> {
        self.state.update(frame)?;
        let s = &self.state;
        for k in 0..s.num_bins() {
            self.phi_diff[k] += s.phi_diff[k];
            self.phi_sum[k] += s.phi_sum[k];
            self.phi_11[k] += s.phi_11[k];
            self.phi_22[k] += s.phi_22[k];
            self.phi_12[k] += s.phi_12[k];
        }
        self.frames += 1;
        Ok(())
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    fn floor(&self) -> f64 {
        PSD_FLOOR_REL * self.phi_11.iter().zip(&self.phi_22).map(|(a, b)| a + b).sum::<f64>()
    }

    /// Ratio of the frame-averaged difference and sum PSDs.
    pub fn power_ratio(&self) -> Vec<Option<f64>> {
        let floor = self.floor();
        self.phi_diff
            .iter()
            .zip(&self.phi_sum)
            .map(|(d, s)| (*s > floor).then(|| d / s))
            .collect()
    }

    /// Complex coherence of the frame-averaged auto and cross PSDs.
    pub fn coherence(&self) -> Vec<Option<Complex64>> {
        let floor = self.floor();
        (0..self.phi_12.len())
            .map(|k| {
                let (a, b) = (self.phi_11[k], self.phi_22[k]);
                (a > floor && b > floor).then(|| self.phi_12[k] / (a * b).sqrt())
            })
            .collect()
    }
}
