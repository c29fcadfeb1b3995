//! Test-signal generation: two-channel noise with a prescribed complex
//! coherence, delayed speech, iSNR-controlled mixtures, and labelled
//! speech/wind segment sequences.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corcos::{ComplexCoherence, CorcosParams, SpeechGeometry};
use crate::error::{Error, Result};
use crate::spectral::{mean_power, Stft, StftConfig, TwoChannel};

/// Corner below which the default envelope stops rising.
const ENVELOPE_LOW_CORNER_HZ: f64 = 10.0;
/// Frequency above which the default envelope is flat.
const ENVELOPE_KNEE_HZ: f64 = 1000.0;

/// Per-bin amplitude gain applied to synthesized noise.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum Envelope {
    /// `1/f` amplitude between 10 Hz and 1 kHz, flat above, no DC.
    #[default]
    LowFrequency,
    Flat,
    /// One non-negative gain per one-sided STFT bin.
    Custom(Vec<f64>),
}

impl Envelope {
    /// Gains for every bin of `config`, normalized to unit total power.
    pub fn gains(&self, config: &StftConfig) -> Result<Vec<f64>> {
        let bins = config.num_bins();
        let mut g: Vec<f64> = match self {
            Envelope::LowFrequency => (0..bins)
                .map(|k| {
                    let f = config.bin_frequency_hz(k);
                    if k == 0 {
                        0.0
                    } else {
                        1.0 / f.clamp(ENVELOPE_LOW_CORNER_HZ, ENVELOPE_KNEE_HZ)
                    }
                })
                .collect(),
            Envelope::Flat => (0..bins).map(|k| if k == 0 { 0.0 } else { 1.0 }).collect(),
            Envelope::Custom(g) => {
                if g.len() != bins {
                    return Err(Error::Config(format!(
                        "custom envelope has {} gains, STFT has {bins} bins",
                        g.len()
                    )));
                }
                if let Some(bad) = g.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return Err(Error::parameter(
                        "envelope",
                        format!("gains must be finite and >= 0, found {bad}"),
                    ));
                }
                g.clone()
            }
        };
        let power: f64 = g.iter().map(|v| v * v).sum();
        if power <= 0.0 {
            return Err(Error::Config("envelope has zero total power".into()));
        }
        let norm = power.sqrt().recip();
        g.iter_mut().for_each(|v| *v *= norm);
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub corcos: CorcosParams,
    pub duration_s: f64,
    pub envelope: Envelope,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(corcos: CorcosParams, duration_s: f64, seed: u64) -> Result<Self> {
        check_duration(duration_s)?;
        Ok(Self {
            corcos,
            duration_s,
            envelope: Envelope::default(),
            seed,
        })
    }
}

fn check_duration(duration_s: f64) -> Result<()> {
    if duration_s.is_finite() && duration_s > 0.0 {
        Ok(())
    } else {
        Err(Error::parameter(
            "duration",
            format!("must be finite and > 0, got {duration_s}"),
        ))
    }
}

fn samples_for(duration_s: f64, config: &StftConfig) -> usize {
    (duration_s * config.sample_rate() as f64).round() as usize
}

/// Two-channel noise whose long-run complex coherence follows the Corcos model.
pub fn gen_coherent_noise(spec: &NoiseSpec, config: &StftConfig) -> Result<TwoChannel> {
    let corcos = spec.corcos;
    gen_noise_with_coherence(
        spec.duration_s,
        &spec.envelope,
        spec.seed,
        config,
        |omega| Ok(corcos.coherence(omega)),
    )
}

/// Two-channel noise with an arbitrary target coherence per angular frequency.
///
/// Each STFT bin mixes two independent complex Gaussian draws as
/// `X1 = N1`, `X2 = conj(γ)·N1 + sqrt(1 - |γ|²)·N2`, so that
/// `E[X1·conj(X2)] = γ`. Frames are Hann-windowed and overlap-added; the
/// result is scaled to unit mean power on channel 1.
pub fn gen_noise_with_coherence<F>(
    duration_s: f64,
    envelope: &Envelope,
    seed: u64,
    config: &StftConfig,
    target: F,
) -> Result<TwoChannel>
where
    F: Fn(f64) -> Result<ComplexCoherence>,
{
    check_duration(duration_s)?;
    let gains = envelope.gains(config)?;
    let bins = config.num_bins();
    let frame_len = config.frame_len();
    let hop = config.hop();
    let mixing = (0..bins)
        .map(|k| {
            let g = target(config.bin_omega(k))?.value();
            let residual = 1.0 - g.norm_sqr();
            if residual < -1e-12 {
                return Err(Error::Contract(format!(
                    "target coherence magnitude {} exceeds one at bin {k}",
                    g.norm()
                )));
            }
            Ok((g.conj(), residual.max(0.0).sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;

    let len = samples_for(duration_s, config);
    // one frame of lead-in and lead-out so the kept span is fully overlapped
    let padded = len + 2 * frame_len;
    let frames = (padded - frame_len) / hop + 1;
    let stft = Stft::new(*config);
    let window = stft.window().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TwoChannel::zeros(frames * hop + frame_len);
    let mut s1 = vec![Complex64::new(0.0, 0.0); bins];
    let mut s2 = vec![Complex64::new(0.0, 0.0); bins];
    let real_bin = |k: usize| k == 0 || 2 * k == config.fft_len();

    for l in 0..frames {
        for k in 0..bins {
            let (n1, n2) = if real_bin(k) {
                (
                    Complex64::new(rng.sample(StandardNormal), 0.0),
                    Complex64::new(rng.sample(StandardNormal), 0.0),
                )
            } else {
                (complex_normal(&mut rng), complex_normal(&mut rng))
            };
            let (gc, r) = mixing[k];
            let mut second = gc * n1 + n2 * r;
            if real_bin(k) {
                second.im = 0.0;
            }
            s1[k] = n1 * gains[k];
            s2[k] = second * gains[k];
        }
        let b1 = stft.inverse(&s1);
        let b2 = stft.inverse(&s2);
        let start = l * hop;
        for n in 0..frame_len {
            out.ch1[start + n] += b1[n] * window[n];
            out.ch2[start + n] += b2[n] * window[n];
        }
    }

    let kept = out.slice(frame_len..frame_len + len);
    let power = kept.power_ch1();
    if power <= 0.0 {
        return Err(Error::Config("synthesized noise has zero power".into()));
    }
    Ok(kept.scaled(power.sqrt().recip()))
}

fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Channel 1 is the input; channel 2 is the input delayed by the speech
/// TDOA, applied as a per-bin phase `exp(-iωτ)` in the STFT domain and
/// resynthesized by weighted overlap-add.
pub fn delay_speech(
    mono: &[f64],
    geometry: &SpeechGeometry,
    config: &StftConfig,
) -> Result<TwoChannel> {
    let tau = geometry.tdoa();
    let frame_len = config.frame_len();
    if tau.abs() * config.sample_rate() as f64 >= frame_len as f64 / 4.0 {
        return Err(Error::parameter(
            "tdoa",
            format!("delay of {tau} s is not small against the frame length"),
        ));
    }
    let nyquist_omega = TAU * config.sample_rate() as f64 / 2.0;
    if (nyquist_omega * tau).abs() < 1e-12 {
        return Ok(TwoChannel::duplicate(mono));
    }

    // padding keeps the shifted frame clear of circular wrap-around
    let stft = Stft::with_fft_len(*config, 2 * config.fft_len());
    let hop = config.hop();
    let phase: Vec<Complex64> = (0..stft.num_bins())
        .map(|k| Complex64::from_polar(1.0, -stft.bin_omega(k) * tau))
        .collect();

    let mut padded = vec![0.0; frame_len];
    padded.extend_from_slice(mono);
    padded.resize(padded.len() + 2 * frame_len, 0.0);
    let frames = (padded.len() - frame_len) / hop + 1;
    let mut acc = vec![0.0; frames * hop + frame_len];
    let mut weight = vec![0.0; acc.len()];
    let window = stft.window();
    for l in 0..frames {
        let start = l * hop;
        let mut spec = stft.spectrum(&padded[start..start + frame_len]);
        spec.iter_mut().zip(&phase).for_each(|(x, p)| *x *= p);
        let block = stft.inverse(&spec);
        // the shifted frame may spill past either end of its span; indices
        // beyond frame_len + margin wrapped around from negative time
        let margin = (block.len() - frame_len) / 2;
        for (i, v) in block.iter().enumerate() {
            let t = if i < frame_len + margin {
                (start + i) as isize
            } else {
                (start + i) as isize - block.len() as isize
            };
            if let Some(slot) = usize::try_from(t).ok().and_then(|t| acc.get_mut(t)) {
                *slot += v;
            }
        }
        for n in 0..frame_len {
            weight[start + n] += window[n];
        }
    }
    let delayed = (frame_len..frame_len + mono.len())
        .map(|n| if weight[n] > 1e-9 { acc[n] / weight[n] } else { 0.0 })
        .collect();
    TwoChannel::new(mono.to_vec(), delayed)
}

/// Adds `noise` to `speech` after rescaling the noise by one scalar so the
/// channel-1 power ratio equals `isnr_db`. Noise longer than the speech is
/// cropped; shorter noise is looped.
pub fn mix_at_isnr(speech: &TwoChannel, noise: &TwoChannel, isnr_db: f64) -> Result<TwoChannel> {
    let gain = isnr_gain(speech, noise, isnr_db)?;
    let n = speech.len();
    let m = noise.len();
    let ch1 = (0..n).map(|i| speech.ch1[i] + gain * noise.ch1[i % m]).collect();
    let ch2 = (0..n).map(|i| speech.ch2[i] + gain * noise.ch2[i % m]).collect();
    TwoChannel::new(ch1, ch2)
}

/// The scalar noise gain `mix_at_isnr` applies.
pub fn isnr_gain(speech: &TwoChannel, noise: &TwoChannel, isnr_db: f64) -> Result<f64> {
    if !isnr_db.is_finite() {
        return Err(Error::parameter("isnr_db", "must be finite"));
    }
    if speech.is_empty() || noise.is_empty() {
        return Err(Error::Config("cannot mix empty signals".into()));
    }
    let p_speech = speech.power_ch1();
    let looped: Vec<f64> = (0..speech.len()).map(|i| noise.ch1[i % noise.len()]).collect();
    let p_noise = mean_power(&looped);
    if p_speech <= 0.0 {
        return Err(Error::Config("speech has zero power over the mixture".into()));
    }
    if p_noise <= 0.0 {
        return Err(Error::Config("noise has zero power over the mixture".into()));
    }
    Ok((p_speech / (p_noise * 10f64.powf(isnr_db / 10.0))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Speech,
    Wind,
    Mixture,
}

impl SegmentKind {
    /// Ground-truth label: 1 when wind is present.
    pub fn label(self) -> u8 {
        match self {
            SegmentKind::Speech => 0,
            SegmentKind::Wind | SegmentKind::Mixture => 1,
        }
    }

    fn has_speech(self) -> bool {
        matches!(self, SegmentKind::Speech | SegmentKind::Mixture)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub plan: Vec<Segment>,
    pub isnr_db: f64,
    pub speech_geometry: SpeechGeometry,
    pub corcos: CorcosParams,
    pub envelope: Envelope,
    pub seed: u64,
}

/// Segment length used by [`SequenceSpec::protocol`] when none is given.
pub const DEFAULT_SEGMENT_S: f64 = 3.0;
pub const DEFAULT_ISNR_DB: f64 = -5.0;

impl SequenceSpec {
    /// Speech / wind / mixture / speech / mixture, each `segment_s` long,
    /// with broadside speech and axial wind at 1.8 m/s over a 4 mm array.
    pub fn protocol(segment_s: f64, seed: u64) -> Result<Self> {
        use SegmentKind::*;
        check_duration(segment_s)?;
        let d = 0.004;
        Ok(Self {
            plan: [Speech, Wind, Mixture, Speech, Mixture]
                .into_iter()
                .map(|kind| Segment {
                    kind,
                    duration_s: segment_s,
                })
                .collect(),
            isnr_db: DEFAULT_ISNR_DB,
            speech_geometry: SpeechGeometry::new(d, FRAC_PI_2)?,
            corcos: CorcosParams::new(d, 0.0, 1.8)?,
            envelope: Envelope::default(),
            seed,
        })
    }

    pub fn total_duration_s(&self) -> f64 {
        self.plan.iter().map(|s| s.duration_s).sum()
    }

    /// Seconds of speech material the plan consumes.
    pub fn speech_duration_s(&self) -> f64 {
        self.plan
            .iter()
            .filter(|s| s.kind.has_speech())
            .map(|s| s.duration_s)
            .sum()
    }
}

/// A synthesized sequence with its ground truth.
#[derive(Debug, Clone)]
pub struct LabeledSignal {
    pub signal: TwoChannel,
    /// Sample ranges of each plan segment.
    pub segments: Vec<Range<usize>>,
    /// Per-frame label on the STFT grid.
    pub labels: Vec<u8>,
    /// Per-frame index of the segment holding most of the frame's samples.
    pub frame_segments: Vec<usize>,
}

/// Concatenates the plan's segments. Speech material is taken from
/// `speech_source` in order; frames straddling a boundary take the label
/// of the majority of their samples (ties count as wind).
pub fn build_sequence(
    spec: &SequenceSpec,
    speech_source: &[f64],
    config: &StftConfig,
) -> Result<LabeledSignal> {
    if spec.plan.is_empty() {
        return Err(Error::Config("segment plan is empty".into()));
    }
    for s in &spec.plan {
        check_duration(s.duration_s)?;
    }
    if spec.speech_geometry.mic_distance() != spec.corcos.mic_distance() {
        return Err(Error::parameter(
            "mic_distance",
            "speech geometry and wind model disagree on microphone spacing",
        ));
    }
    let lengths: Vec<usize> = spec.plan.iter().map(|s| samples_for(s.duration_s, config)).collect();
    let total: usize = lengths.iter().sum();
    let speech_needed: usize = spec
        .plan
        .iter()
        .zip(&lengths)
        .filter(|(s, _)| s.kind.has_speech())
        .map(|(_, n)| n)
        .sum();
    if speech_source.len() < speech_needed {
        return Err(Error::Config(format!(
            "speech source has {} samples, plan needs {speech_needed}",
            speech_source.len()
        )));
    }

    let speech = delay_speech(&speech_source[..speech_needed], &spec.speech_geometry, config)?;
    let needs_wind = spec.plan.iter().any(|s| s.kind != SegmentKind::Speech);
    let noise = if needs_wind {
        let noise_spec = NoiseSpec {
            corcos: spec.corcos,
            duration_s: total as f64 / config.sample_rate() as f64,
            envelope: spec.envelope.clone(),
            seed: spec.seed,
        };
        Some(gen_coherent_noise(&noise_spec, config)?)
    } else {
        None
    };

    let mut signal = TwoChannel::default();
    let mut segments = Vec::with_capacity(spec.plan.len());
    let mut speech_pos = 0;
    let mut pos = 0;
    for (seg, &n) in spec.plan.iter().zip(&lengths) {
        let span = pos..pos + n;
        let piece = match seg.kind {
            SegmentKind::Speech => {
                let s = speech.slice(speech_pos..speech_pos + n);
                speech_pos += n;
                s
            }
            SegmentKind::Wind => noise.as_ref().expect("noise generated").slice(span.clone()),
            SegmentKind::Mixture => {
                let s = speech.slice(speech_pos..speech_pos + n);
                speech_pos += n;
                let v = noise.as_ref().expect("noise generated").slice(span.clone());
                mix_at_isnr(&s, &v, spec.isnr_db)?
            }
        };
        signal.append(&piece);
        segments.push(span);
        pos += n;
    }

    let (labels, frame_segments) = frame_labels(&spec.plan, &segments, config, total);
    Ok(LabeledSignal {
        signal,
        segments,
        labels,
        frame_segments,
    })
}

fn frame_labels(
    plan: &[Segment],
    segments: &[Range<usize>],
    config: &StftConfig,
    total: usize,
) -> (Vec<u8>, Vec<usize>) {
    let count = config.frame_count(total);
    let mut labels = Vec::with_capacity(count);
    let mut owners = Vec::with_capacity(count);
    for l in 0..count {
        let start = l * config.hop();
        let end = start + config.frame_len();
        let mut wind = 0;
        let mut clean = 0;
        let mut owner = (0, 0);
        for (i, (seg, range)) in plan.iter().zip(segments).enumerate() {
            let overlap = end.min(range.end).saturating_sub(start.max(range.start));
            if overlap == 0 {
                continue;
            }
            if seg.kind.label() == 1 {
                wind += overlap;
            } else {
                clean += overlap;
            }
            // ties go to the wind segment, as for the label
            if overlap > owner.1 || (overlap == owner.1 && seg.kind.label() == 1) {
                owner = (i, overlap);
            }
        }
        labels.push(u8::from(wind >= clean));
        owners.push(owner.0);
    }
    (labels, owners)
}

/// Speech-like test signal: voiced syllables with a drifting pitch,
/// formant-shaped harmonics, short fricative bursts and pauses.
///
/// Stands in for recorded speech where only the inter-channel structure
/// matters; no claim is made about perceptual realism.
pub fn synthetic_speech(duration_s: f64, sample_rate: u32, seed: u64) -> Result<Vec<f64>> {
    check_duration(duration_s)?;
    let fs = sample_rate as f64;
    let len = (duration_s * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; len];
    let base_f0 = rng.gen_range(100.0..200.0);
    let mut phase = 0.0f64;
    let mut pos = (rng.gen_range(0.0..0.05) * fs) as usize;

    while pos < len {
        let syllable = (rng.gen_range(0.12..0.3) * fs) as usize;
        let pause = if rng.gen_bool(0.15) {
            rng.gen_range(0.2..0.4)
        } else {
            rng.gen_range(0.03..0.12)
        };
        let f0_start = base_f0 * rng.gen_range(0.85..1.15);
        let f0_end = base_f0 * rng.gen_range(0.8..1.2);
        let formants = [
            rng.gen_range(300.0..800.0),
            rng.gen_range(900.0..2200.0),
            rng.gen_range(2400.0..3200.0),
        ];
        let level = rng.gen_range(0.5..1.0);

        // unvoiced onset
        if rng.gen_bool(0.4) {
            let burst = (rng.gen_range(0.03..0.08) * fs) as usize;
            let mut prev = 0.0;
            for i in 0..burst.min(len.saturating_sub(pos)) {
                let w: f64 = rng.sample(StandardNormal);
                let shaped = w - prev;
                prev = w;
                let env = (std::f64::consts::PI * i as f64 / burst as f64).sin();
                out[pos + i] += 0.08 * level * env * shaped;
            }
            pos += burst / 2;
        }

        let end = (pos + syllable).min(len);
        let harmonics = (4000.0 / base_f0) as usize;
        for n in pos..end {
            let t = (n - pos) as f64 / syllable as f64;
            let f0 = f0_start + (f0_end - f0_start) * t;
            phase = (phase + TAU * f0 / fs) % TAU;
            let env = (std::f64::consts::PI * t).sin().powf(0.6);
            let mut v = 0.0;
            for h in 1..=harmonics {
                let f = h as f64 * f0;
                let gain = formant_gain(f, &formants) / h as f64;
                v += gain * (h as f64 * phase).sin();
            }
            out[n] += level * env * v;
        }
        pos = end + (pause * fs) as usize;
    }

    let power = mean_power(&out);
    if power > 0.0 {
        let g = (0.1 / power).sqrt();
        out.iter_mut().for_each(|v| *v *= g);
    }
    Ok(out)
}

fn formant_gain(f: f64, formants: &[f64; 3]) -> f64 {
    const BANDWIDTH: f64 = 120.0;
    formants
        .iter()
        .enumerate()
        .map(|(i, &fc)| {
            let x = (f - fc) / (BANDWIDTH * (1 + i) as f64);
            1.0 / (1.0 + x * x) / (1 + i) as f64
        })
        .sum::<f64>()
        + 0.05
}
